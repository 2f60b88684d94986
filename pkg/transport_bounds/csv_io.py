"""CSV ingestion and export of the two location datasets.

Source files carry the header ``x1,...,xd,w,y``; target files ``x1,...,xd``.
Files are UTF-8 with '.' as decimal separator. Floats are written in their
shortest round-trip form and read back with round-trip precision, so an
export followed by an ingest reproduces the data exactly.
"""

import logging
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from .domain_model import SourceDataset, TargetDataset
from .errors import SchemaError

logger = logging.getLogger(__name__)


def covariate_columns(dim: int) -> List[str]:
    return [f"x{j + 1}" for j in range(dim)]


def _read_frame(path: str | Path, kind: str) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{kind.capitalize()} file '{path}' not found")
    try:
        frame = pd.read_csv(path, float_precision="round_trip", encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{kind.capitalize()} file '{path}' is empty")
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _covariates(frame: pd.DataFrame, path: str | Path, extra: List[str]) -> List[str]:
    """Check that the header is x1..xd followed by ``extra`` and return the x columns."""
    for column in extra:
        if column not in frame.columns:
            raise SchemaError(f"File '{path}' is missing column '{column}'", column=column)
    names = [c for c in frame.columns if c not in extra]
    expected = covariate_columns(len(names))
    if not names:
        raise SchemaError(f"File '{path}' has no covariate columns (expected x1, x2, ...)", column="x1")
    if names != expected:
        bad = next(n for n, e in zip(names, expected) if n != e)
        raise SchemaError(
            f"File '{path}' has unexpected column '{bad}'; covariates must be named {', '.join(expected)}",
            column=bad,
        )
    return names


def _numeric(frame: pd.DataFrame, path: str | Path) -> pd.DataFrame:
    for column in frame.columns:
        if frame[column].isna().any():
            row = int(np.flatnonzero(frame[column].isna().to_numpy())[0])
            raise SchemaError(f"File '{path}' has a missing value in column '{column}' (row {row})",
                              column=column)
        try:
            frame[column] = pd.to_numeric(frame[column], errors="raise")
        except (ValueError, TypeError):
            raise SchemaError(f"File '{path}' has a non-numeric value in column '{column}'", column=column)
    return frame


def read_source(path: str | Path, propensity: float = 0.5) -> SourceDataset:
    """Load a source CSV (x1..xd, w, y).

    Raises:
        FileNotFoundError: the file does not exist
        SchemaError: header or values do not follow the schema
    """
    frame = _read_frame(path, "source")
    names = _covariates(frame, path, ["w", "y"])
    frame = _numeric(frame[names + ["w", "y"]].copy(), path)
    w = frame["w"].to_numpy(dtype=float)
    if not np.all(np.isin(w, (0.0, 1.0))):
        raise SchemaError(f"File '{path}' has treatment values other than 0 and 1", column="w")
    logger.info("Read %d source units with %d covariates from %s", len(frame), len(names), path)
    return SourceDataset(
        x=frame[names].to_numpy(dtype=float).reshape(len(frame), len(names)),
        w=w,
        y=frame["y"].to_numpy(dtype=float),
        propensity=propensity,
    )


def read_target(path: str | Path) -> TargetDataset:
    """Load a target CSV (x1..xd)."""
    frame = _read_frame(path, "target")
    names = _covariates(frame, path, [])
    frame = _numeric(frame[names].copy(), path)
    logger.info("Read %d target units with %d covariates from %s", len(frame), len(names), path)
    return TargetDataset(x=frame[names].to_numpy(dtype=float).reshape(len(frame), len(names)))


def source_frame(src: SourceDataset) -> pd.DataFrame:
    frame = pd.DataFrame(src.x, columns=covariate_columns(src.dim))
    frame["w"] = src.w.astype(np.int64)
    frame["y"] = src.y
    return frame


def target_frame(tgt: TargetDataset) -> pd.DataFrame:
    return pd.DataFrame(tgt.x, columns=covariate_columns(tgt.dim))


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(frame))
    return path


def write_source(src: SourceDataset, path: str | Path) -> Path:
    return write_frame(source_frame(src), path)


def write_target(tgt: TargetDataset, path: str | Path) -> Path:
    return write_frame(target_frame(tgt), path)
