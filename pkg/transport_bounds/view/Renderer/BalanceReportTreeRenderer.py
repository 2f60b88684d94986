"""Tree renderer for the per-arm balance report."""

from typing import Dict, List
from textual.widgets import Tree
from transport_bounds.density_ratio import BalanceRow
from transport_bounds.view.Renderer.TreeRenderer import TreeRenderer


class BalanceReportTreeRenderer(TreeRenderer[BalanceRow]):
    """Arm -> feature -> weighted source mean / target mean / residual."""

    ARM_EMOJI  = "🧪"
    PASS_EMOJI = "✅"
    FAIL_EMOJI = "❌"

    @staticmethod
    def group_by_arm(rows: List[BalanceRow]) -> Dict[str, List[BalanceRow]]:
        groups: Dict[str, List[BalanceRow]] = {}
        for row in rows:
            groups.setdefault(row.arm, []).append(row)
        return groups

    def fill_tree(self, tree: Tree, data: List[BalanceRow]) -> None:
        rows = list(data)
        tree.clear()
        tree.root.expand()
        for arm, arm_rows in self.group_by_arm(rows).items():
            failed = sum(not r.passed for r in arm_rows)
            summary = "all balanced" if failed == 0 else f"{failed} off balance"
            arm_node = tree.root.add(f"{self.ARM_EMOJI} {arm} ({summary})", expand=True)
            for row in arm_rows:
                mark = self.PASS_EMOJI if row.passed else self.FAIL_EMOJI
                feature_node = arm_node.add(f"{mark} {row.feature} [dim]residual {row.residual:.2e}[/dim]",
                                            expand=False)
                feature_node.add_leaf(f"weighted source mean = {row.weighted_source_mean:.10g}")
                feature_node.add_leaf(f"target mean          = {row.target_mean:.10g}")

    def filter_data(self, data: List[BalanceRow], filter_text: str) -> List[BalanceRow]:
        rows = list(data)
        if not filter_text:
            return rows
        if filter_text in ("fail", "failed"):
            return [r for r in rows if not r.passed]
        return [r for r in rows if filter_text in r.feature.lower() or filter_text in r.arm.lower()]
