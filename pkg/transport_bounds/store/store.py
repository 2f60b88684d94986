"""Loading a results directory for the results browser."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

from transport_bounds.density_ratio import BalanceRow

RESULT_TABLES = ("sweep.csv", "estimates.csv")


@dataclass
class ResultsBundle:
    """Everything one run of transport-estimate or transport-sweep wrote."""
    directory: Path
    table_name: str = ""
    table: List[tuple] = field(default_factory=list)
    balance: List[BalanceRow] = field(default_factory=list)
    manifest: Dict[str, Any] = field(default_factory=dict)

    @property
    def title(self) -> str:
        return f"{self.table_name} in {self.directory.name}" if self.table_name else "No results loaded"


def tabular_data(frame: pd.DataFrame) -> list[tuple]:
    """Header tuple followed by one tuple per row, floats shortened for display."""
    rows: list[tuple] = [tuple(frame.columns)]
    for record in frame.itertuples(index=False):
        rows.append(tuple(f"{v:.6g}" if isinstance(v, float) else v for v in record))
    return rows


def balance_rows(frame: pd.DataFrame) -> List[BalanceRow]:
    return [
        BalanceRow(
            arm=str(r.arm),
            feature=str(r.feature),
            weighted_source_mean=float(r.weighted_source_mean),
            target_mean=float(r.target_mean),
            residual=float(r.residual),
            passed=bool(r.passed),
        )
        for r in frame.itertuples(index=False)
    ]


def manifest_lines(manifest: Dict[str, Any], prefix: str = "") -> List[str]:
    """Flatten nested manifest sections into 'a.b = value' lines."""
    lines: List[str] = []
    for key in sorted(manifest):
        value = manifest[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines += manifest_lines(value, prefix=f"{name}.")
        else:
            lines.append(f"{name} = {value}")
    return lines


def load_results(directory: str | Path) -> ResultsBundle:
    """Read the results table, balance report and manifest of a run.

    Raises:
        FileNotFoundError: the directory holds neither sweep.csv nor estimates.csv
    """
    directory = Path(directory)
    bundle = ResultsBundle(directory=directory)
    for name in RESULT_TABLES:
        path = directory / name
        if path.exists():
            bundle.table_name = name
            bundle.table = tabular_data(pd.read_csv(path, float_precision="round_trip"))
            break
    else:
        raise FileNotFoundError(f"No {' or '.join(RESULT_TABLES)} in '{directory}'")
    if (directory / "balance.csv").exists():
        bundle.balance = balance_rows(pd.read_csv(directory / "balance.csv", float_precision="round_trip"))
    if (directory / "manifest.json").exists():
        with open(directory / "manifest.json", encoding="utf-8") as f:
            bundle.manifest = json.load(f)
    return bundle
