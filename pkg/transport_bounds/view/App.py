from textual.app         import App, ComposeResult
from textual.reactive    import reactive
from textual.containers  import Container,Vertical,Horizontal,HorizontalScroll
from textual.widgets     import Header,Footer,Input
from transport_bounds.density_ratio                              import BalanceRow
from transport_bounds.view.Components.TreeComponent              import TreeComponent
from transport_bounds.view.Components.TableComponent             import TableComponent
from transport_bounds.view.Components.LogComponent               import LogComponent
from transport_bounds.view.Renderer.BalanceReportTreeRenderer    import BalanceReportTreeRenderer
from transport_bounds.view.logger import Logger
import transport_bounds.store.store as store


class ResultsBrowserApp(App):
    """A Textual app for browsing the output directory of transport-estimate / transport-sweep.

    Args:
        results_dir: Optional directory to open. If None, starts empty.
    """

    CSS_PATH = "style.tcss"
    BINDINGS = [("D","toggle_dark","Toggle dark mode")]

    results_dir = reactive("")

    def __init__(self, results_dir: str | None = None, **kwargs):
        super().__init__(**kwargs)
        self._initial_dir = results_dir
        self.bundle: store.ResultsBundle | None = None

    def compose(self)-> ComposeResult:
        """Create child widgets for the app."""
        yield Header()
        with Container():
            with Vertical(id="main-panel"):
                with Horizontal(id="main-content"):
                    vertical=Vertical(id="right-panel")
                    vertical.border_title="Bounds"
                    with vertical:
                        yield Input(
                            placeholder="Enter results directory...",
                            id="results-dir-input",
                            value=self._initial_dir or ""
                        )
                        with HorizontalScroll(id="table-scroll"):
                            yield TableComponent([])

                    yield TreeComponent[BalanceRow](
                        data=[],
                        renderer=BalanceReportTreeRenderer(),
                        title="Balance report",
                        component_id="balance-tree",
                        border_title="Balance Report",
                        placeholder="Filter features, arms or 'fail'..."
                    )
                yield LogComponent()
        yield Footer()

    def on_mount(self) -> None:
        if self._initial_dir:
            self.results_dir = self._initial_dir

    def watch_results_dir(self, new_dir: str) -> None:
        """Load the run in ``new_dir`` into the table, tree and log."""
        if not new_dir:
            return
        log = self.query_one(LogComponent)
        try:
            self.bundle = store.load_results(new_dir)
        except (OSError, ValueError) as e:
            Logger.log_message(self, "ResultsBrowserApp", new_dir, "LoadFailed", str(e))
            return

        self.query_one(TableComponent).reload_rows(self.bundle.table)
        balance_tree = self.query_one("#balance-tree", TreeComponent)
        balance_tree.reload_data(self.bundle.balance, title=f"Balance report ({len(self.bundle.balance)} rows)")
        self.sub_title = self.bundle.title
        Logger.log_message(self, "ResultsBrowserApp", new_dir, "Loaded", self.bundle.table_name)
        log.write_lines(store.manifest_lines(self.bundle.manifest))

        input_field = self.query_one("#results-dir-input", Input)
        if input_field.value != new_dir:
            input_field.value = new_dir

    def on_input_submitted(self, event: Input.Submitted) -> None:
        if event.input.id != "results-dir-input":
            return
        new_dir = event.value.strip()
        if new_dir:
            self.results_dir = new_dir

    def action_toggle_dark(self)-> None:
        """An Action to toggle dark mode."""
        self.theme = ("textual-dark" if self.theme == "textual-light" else "textual-light")


def main():
    """CLI entry point for the results browser."""
    import sys

    results_dir = None
    if len(sys.argv) > 1:
        results_dir = sys.argv[1]

    app = ResultsBrowserApp(results_dir=results_dir)
    app.run()


if __name__ == "__main__":
    main()
