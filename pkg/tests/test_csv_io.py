"""Tests for csv_io module."""

import os
import tempfile

import numpy as np
import pytest
from transport_bounds.csv_io import read_source, read_target, write_source, write_target
from transport_bounds.domain_model import SourceDataset, TargetDataset
from transport_bounds.errors import SchemaError


def write_text(directory, name, text):
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    return path


def test_round_trip_is_exact():
    """Test that export followed by ingest reproduces every value."""
    rng = np.random.default_rng(0)
    src = SourceDataset(x=rng.beta(0.5, 0.5, size=(25, 4)), w=np.arange(25) % 2, y=rng.normal(scale=3, size=25))
    tgt = TargetDataset(x=rng.uniform(size=(10, 4)) * 1e-7)
    with tempfile.TemporaryDirectory() as tmp:
        write_source(src, os.path.join(tmp, "source.csv"))
        write_target(tgt, os.path.join(tmp, "target.csv"))
        src_back = read_source(os.path.join(tmp, "source.csv"))
        tgt_back = read_target(os.path.join(tmp, "target.csv"))
        with open(os.path.join(tmp, "source.csv"), encoding="utf-8") as f:
            header = f.readline().strip()
    assert header == "x1,x2,x3,x4,w,y"
    assert np.array_equal(src_back.x, src.x)
    assert np.array_equal(src_back.w, src.w)
    assert np.array_equal(src_back.y, src.y)
    assert np.array_equal(tgt_back.x, tgt.x)


def test_read_source_values():
    """Test a small hand-written source file."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "s.csv", "x1,x2,w,y\n0.5,1,1,2.25\n0,-1,0,1\n")
        src = read_source(path, propensity=0.3)
    assert src.x.tolist() == [[0.5, 1.0], [0.0, -1.0]]
    assert src.w.tolist() == [1, 0]
    assert src.y.tolist() == [2.25, 1.0]
    assert src.propensity == 0.3


def test_missing_outcome_column():
    """Test that a source file without y names the column."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "s.csv", "x1,x2,w\n0.5,1,1\n")
        with pytest.raises(SchemaError) as info:
            read_source(path)
    assert info.value.column == "y"
    assert "'y'" in str(info.value)


def test_misnamed_covariate_column():
    """Test that covariates must be named x1..xd in order."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "t.csv", "x1,age\n0.5,30\n")
        with pytest.raises(SchemaError) as info:
            read_target(path)
    assert info.value.column == "age"


def test_non_numeric_value():
    """Test that a text cell is rejected with its column."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "s.csv", "x1,w,y\n0.5,1,abc\n0.1,0,2\n")
        with pytest.raises(SchemaError) as info:
            read_source(path)
    assert info.value.column == "y"


def test_missing_value():
    """Test that an empty cell is rejected."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "t.csv", "x1,x2\n0.5,\n")
        with pytest.raises(SchemaError) as info:
            read_target(path)
    assert info.value.column == "x2"


def test_bad_treatment_value():
    """Test that w outside {0, 1} is a schema error."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "s.csv", "x1,w,y\n0.5,2,1\n")
        with pytest.raises(SchemaError) as info:
            read_source(path)
    assert info.value.column == "w"


def test_empty_file():
    """Test that a zero-byte file is a schema error."""
    with tempfile.TemporaryDirectory() as tmp:
        path = write_text(tmp, "t.csv", "")
        with pytest.raises(SchemaError):
            read_target(path)


def test_missing_file():
    """Test that a missing path raises FileNotFoundError."""
    with pytest.raises(FileNotFoundError):
        read_source("/nonexistent/source.csv")
