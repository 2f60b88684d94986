from textual.widgets import Tree, Input,RichLog
from typing import Union
from textual.widget import Widget
from datetime import datetime
from transport_bounds.logger import format_log_message

TreeNodeEvent = Union[Tree.NodeSelected, Tree.NodeHighlighted]

class Logger:
    """Writes widget events into the app's event log."""

    @staticmethod
    def _log(widget:Widget,event:Union[Input.Changed,TreeNodeEvent]) -> None:
        if isinstance(event,Input.Changed):
            Logger._log_input_event(widget,event)
        else:
            Logger._log_tree_event(widget,event)

    @staticmethod
    def log_message(widget:Widget,component:str,item:str,event_name:str,value:str) -> None:
        log                 = widget.app.query_one("#event-log", RichLog)
        message             = format_log_message(component, item, event_name, value)
        timestamp           = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        log.write(f"[{timestamp}] {message}")

    @staticmethod
    def _log_input_event(widget: Widget, event: Input.Changed) -> None:
        Logger.log_message(widget,
                           event.input.__class__.__name__,
                           event.input.id or "unknown",
                           type(event).__name__,
                           str(event.value))

    @staticmethod
    def _log_tree_event(widget: Widget, event: TreeNodeEvent) -> None:
        Logger.log_message(widget,
                           event.node.__class__.__name__,
                           widget.query_one(Tree).id or "unknown",
                           type(event).__name__,
                           str(event.node.label))
