"""Tree renderers for different data types."""

from .BalanceReportTreeRenderer import BalanceReportTreeRenderer

__all__ = ["BalanceReportTreeRenderer"]
