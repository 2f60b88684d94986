from textual.widget import Widget
from textual.widgets import DataTable
from textual.app import ComposeResult



class TableComponent(Widget):
    """DataTable over a header tuple followed by row tuples."""

    def __init__(self, rows: list[tuple], component_id: str = "results-table"):
        super().__init__(id=component_id)
        self.rows = rows

    def compose(self) -> ComposeResult:
        yield DataTable(zebra_stripes=True)

    def on_mount(self) -> None:
        self._fill()

    def reload_rows(self, rows: list[tuple]) -> None:
        self.rows = rows
        self._fill()

    def _fill(self) -> None:
        table = self.query_one(DataTable)
        table.clear(columns=True)
        if not self.rows:
            return
        table.add_columns(*self.rows[0])
        table.add_rows(self.rows[1:])
