from typing import List, TypeVar, Protocol
from textual.widgets     import Tree

T = TypeVar('T')


class TreeRenderer(Protocol[T]):
    """How a TreeComponent draws and filters its rows.

    filter_data receives the filter text already stripped and lower-cased.
    """

    def fill_tree(self, tree: Tree, data: List[T]) -> None:
        ...

    def filter_data(self, data: List[T], filter_text: str) -> List[T]:
        ...
