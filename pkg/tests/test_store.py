"""Tests for the results store and the results browser."""

import asyncio
import json
import os
import tempfile

import pandas as pd
import pytest
from transport_bounds.density_ratio import BalanceRow
from transport_bounds.store.store import load_results, manifest_lines, tabular_data
from transport_bounds.view.App import ResultsBrowserApp
from transport_bounds.view.Renderer.BalanceReportTreeRenderer import BalanceReportTreeRenderer

ROWS = [
    BalanceRow("treated", "intercept", 1.0, 1.0, 0.0, True),
    BalanceRow("treated", "x1", 0.52, 0.5, 0.02, False),
    BalanceRow("control", "intercept", 1.0, 1.0, 1e-10, True),
    BalanceRow("control", "x1", 0.5, 0.5, -3e-9, True),
]


def write_results(directory, table_name="estimates.csv"):
    pd.DataFrame({"gamma": [0.0, 0.1], "balanced_lower": [1.5, 1.25], "balanced_upper": [1.5, 1.75]}).to_csv(
        os.path.join(directory, table_name), index=False)
    pd.DataFrame([row.__dict__ for row in ROWS]).to_csv(os.path.join(directory, "balance.csv"), index=False)
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump({"tool": "transport-estimate", "settings": {"seed": 3, "basis": "identity"}}, f)


def test_load_results():
    """Test reading the table, balance report and manifest of a run."""
    with tempfile.TemporaryDirectory() as tmp:
        write_results(tmp)
        bundle = load_results(tmp)
    assert bundle.table_name == "estimates.csv"
    assert bundle.table[0] == ("gamma", "balanced_lower", "balanced_upper")
    assert len(bundle.table) == 3
    assert bundle.balance == ROWS
    assert bundle.manifest["settings"]["seed"] == 3
    assert bundle.title.startswith("estimates.csv")


def test_load_results_prefers_sweep_table():
    """Test that a sweep table is shown when both tables exist."""
    with tempfile.TemporaryDirectory() as tmp:
        write_results(tmp)
        write_results(tmp, "sweep.csv")
        assert load_results(tmp).table_name == "sweep.csv"


def test_load_results_without_table():
    """Test that a directory without results is reported."""
    with tempfile.TemporaryDirectory() as tmp:
        with pytest.raises(FileNotFoundError):
            load_results(tmp)


def test_tabular_data_shortens_floats():
    """Test the display formatting of the table rows."""
    rows = tabular_data(pd.DataFrame({"gamma": [0.1], "estimator": ["balanced"], "value": [1.23456789]}))
    assert rows == [("gamma", "estimator", "value"), ("0.1", "balanced", "1.23457")]


def test_manifest_lines_flatten_sections():
    """Test the flattened manifest shown in the log panel."""
    lines = manifest_lines({"tool": "t", "settings": {"seed": 1, "lp": {"tol": 1e-6}}})
    assert lines == ["settings.lp.tol = 1e-06", "settings.seed = 1", "tool = t"]


def test_renderer_groups_by_arm():
    """Test grouping of balance rows per arm in first-seen order."""
    groups = BalanceReportTreeRenderer.group_by_arm(ROWS)
    assert list(groups) == ["treated", "control"]
    assert [r.feature for r in groups["control"]] == ["intercept", "x1"]


@pytest.mark.parametrize("text, expected", [
    ("", 4), ("fail", 1), ("x1", 2), ("control", 2), ("zzz", 0),
])
def test_renderer_filter(text, expected):
    """Test filtering by feature, arm and failed rows."""
    assert len(BalanceReportTreeRenderer().filter_data(ROWS, text)) == expected


def test_app_loads_results_directory():
    """Test the results browser headless on a prepared run directory."""
    async def run(directory):
        app = ResultsBrowserApp(results_dir=directory)
        async with app.run_test() as pilot:
            await pilot.pause()
            tree = app.query_one("#balance-tree")
            return app.bundle, app.sub_title, str(tree.border_subtitle)

    with tempfile.TemporaryDirectory() as tmp:
        write_results(tmp)
        bundle, sub_title, counted = asyncio.run(run(tmp))
    assert bundle is not None
    assert bundle.table_name == "estimates.csv"
    assert sub_title.startswith("estimates.csv")
    assert counted == "4 of 4"
