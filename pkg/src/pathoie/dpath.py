"""Shortest dependency paths between two tokens of a parse tree.

A path is the unique simple path between two nodes, found by climbing from
both endpoints to their lowest common ancestor.  Each node carries the four
classifier input features (form, lemma, POS, NE) plus the label of the edge
that connects it to the previous node on the path, suffixed with a
direction marker: ``↑`` when the step moves toward the root, ``↓`` when it
moves toward a leaf.  The first node gets the reserved ``START`` label.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import DependencyTree

START_EDGE = "START"
UP = "↑"
DOWN = "↓"


@dataclass(frozen=True)
class PathNode:
    index: int
    form: str
    lemma: str
    pos: str
    ne: str
    edge: str  # e.g. "pobj↓", "nsubj↑", or START for the first node

    @property
    def direction(self) -> str:
        """Direction marker of the incoming edge ('' for the start node)."""
        if self.edge.endswith(UP):
            return UP
        if self.edge.endswith(DOWN):
            return DOWN
        return ""


@dataclass(frozen=True)
class DepPath:
    nodes: tuple
    rel_index: int
    arg_index: int

    def __len__(self):
        return len(self.nodes)

    def indices(self) -> tuple:
        return tuple(node.index for node in self.nodes)


def _node(tree: DependencyTree, index: int, edge: str) -> PathNode:
    tok = tree.token(index)
    return PathNode(index=index, form=tok.form, lemma=tok.lemma, pos=tok.pos, ne=tok.ne, edge=edge)


def shortest_path(tree: DependencyTree, rel: int, arg: int) -> DepPath:
    """The unique simple tree path from ``rel`` to ``arg``.

    ``rel == arg`` yields the single-node path.
    """
    n = len(tree)
    for index in (rel, arg):
        if not 1 <= index <= n:
            raise ValueError("token index %d out of range 1..%d" % (index, n))

    # Ancestor chain of rel, including rel itself, up to the root.
    chain = []
    depth_of = {}
    cur = rel
    while cur != 0:
        depth_of[cur] = len(chain)
        chain.append(cur)
        cur = tree.parent(cur)

    # Climb from arg until the chain is hit; that node is the LCA.
    climb = []
    cur = arg
    while cur not in depth_of:
        climb.append(cur)
        cur = tree.parent(cur)
    lca = cur

    nodes = [_node(tree, rel, START_EDGE)]
    # Upward leg: rel .. lca (edge label is the deprel of the lower token).
    for hop in range(1, depth_of[lca] + 1):
        lower = chain[hop - 1]
        upper = chain[hop]
        nodes.append(_node(tree, upper, tree.token(lower).deprel + UP))
    # Downward leg: lca .. arg.
    for lower in reversed(climb):
        nodes.append(_node(tree, lower, tree.token(lower).deprel + DOWN))
    return DepPath(nodes=tuple(nodes), rel_index=rel, arg_index=arg)


def is_linear(path: DepPath) -> bool:
    """True iff every edge points the same way (one endpoint is an
    ancestor of the other).  Single-node paths are vacuously linear."""
    directions = {node.direction for node in path.nodes[1:]}
    return len(directions) <= 1


def path_length(path: DepPath) -> int:
    """Number of nodes on the path (a k-edge path has length k+1)."""
    return len(path.nodes)


def format_path(path: DepPath) -> str:
    """Render a path as ``rel —label↓— node —label↓— arg`` for debugging."""
    parts = [path.nodes[0].form]
    for node in path.nodes[1:]:
        parts.append("—%s—" % node.edge)
        parts.append(node.form)
    return " ".join(parts)
