"""Finite rooted trees in the tree signature (root, prefix order, meet, pred).

A node is a path of segments.  Each segment is a pair ``(branch, tag)``:
``branch`` is the branch index of the underlying plan node and ``tag`` is
either :data:`STAR` (for singleton branches) or an element index in
``0..n-1`` (for replicated branches).  The root is the empty path.

All values here are immutable; every operation is pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import DomainError

# Tag marking a segment that belongs to a singleton (mark-1) branch.
STAR: None = None

Segment = tuple[int, Optional[int]]
PlanPath = tuple[int, ...]


def _seg_key(seg: Segment) -> tuple[int, int]:
    branch, tag = seg
    return (branch, -1 if tag is STAR else tag)


@dataclass(frozen=True, order=False)
class Node:
    """A tree element, identified by its full path from the root."""

    segs: tuple[Segment, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.segs)

    @property
    def plan_path(self) -> PlanPath:
        """Branch indices of the path: the projection onto the plan."""
        return tuple(branch for branch, _ in self.segs)

    def prefix(self, length: int) -> "Node":
        return Node(self.segs[:length])

    def parent(self) -> "Node":
        # pred of the root is the root, by convention.
        if not self.segs:
            return self
        return Node(self.segs[:-1])

    def child(self, branch: int, tag: Optional[int]) -> "Node":
        return Node(self.segs + ((branch, tag),))

    def is_prefix_of(self, other: "Node") -> bool:
        return other.segs[: len(self.segs)] == self.segs

    def sort_key(self) -> tuple:
        return tuple(_seg_key(s) for s in self.segs)

    def __lt__(self, other: "Node") -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "Node") -> bool:
        return self.sort_key() <= other.sort_key()

    def __str__(self) -> str:
        return format_node(self)

    def __repr__(self) -> str:
        return f"Node({format_node(self)!r})"


ROOT = Node()


def format_node(node: Node) -> str:
    """Textual form: ``eps`` for the root, else ``branch:tag`` segments joined by ``/``."""
    if not node.segs:
        return "eps"
    return "/".join(
        f"{branch}:{'*' if tag is STAR else tag}" for branch, tag in node.segs
    )


_SEG_RE = re.compile(r"^(\d+):(\*|\d+)$")


def parse_node(text: str) -> Node:
    """Inverse of :func:`format_node`."""
    text = text.strip()
    if text == "eps":
        return ROOT
    segs: list[Segment] = []
    for part in text.split("/"):
        m = _SEG_RE.match(part.strip())
        if not m:
            raise DomainError(f"bad node segment {part!r} in {text!r}")
        branch = int(m.group(1))
        tag = STAR if m.group(2) == "*" else int(m.group(2))
        segs.append((branch, tag))
    return Node(tuple(segs))


class FiniteTree:
    """A finite prefix-closed set of nodes; meets and predecessors come for free.

    ``size_param`` records the ``n`` used to build an expansion, when there
    is one; plain trees leave it unset.
    """

    __slots__ = ("nodes", "size_param", "_children", "_sorted")

    def __init__(self, nodes: Iterable[Node], size_param: Optional[int] = None):
        node_set = frozenset(nodes)
        if ROOT not in node_set:
            raise DomainError("a tree must contain the root")
        children: dict[Node, list[Node]] = {v: [] for v in node_set}
        for v in node_set:
            if v.segs:
                p = v.parent()
                if p not in node_set:
                    raise DomainError(f"tree is not prefix-closed at {v}")
                children[p].append(v)
        for kids in children.values():
            kids.sort()
        self.nodes = node_set
        self.size_param = size_param
        self._children = children
        self._sorted = sorted(node_set)

    def __contains__(self, node: Node) -> bool:
        return node in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self._sorted)

    def sorted_nodes(self) -> list[Node]:
        return list(self._sorted)

    def children(self, node: Node) -> list[Node]:
        if node not in self.nodes:
            raise DomainError(f"unknown node {node}")
        return list(self._children[node])

    def height(self) -> int:
        return max(v.depth for v in self.nodes)

    def require(self, *nodes: Node) -> None:
        for v in nodes:
            if v not in self.nodes:
                raise DomainError(f"unknown node {v}")


def meet(tree: FiniteTree, a: Node, b: Node) -> Node:
    """Longest common prefix of ``a`` and ``b``: their maximum lower bound."""
    tree.require(a, b)
    return meet_nodes(a, b)


def meet_nodes(a: Node, b: Node) -> Node:
    i = 0
    limit = min(len(a.segs), len(b.segs))
    while i < limit and a.segs[i] == b.segs[i]:
        i += 1
    return Node(a.segs[:i])


def predk(tree: FiniteTree, a: Node, k: int) -> Node:
    """Drop the last ``k`` segments of ``a``, clamping at the root."""
    tree.require(a)
    if k >= a.depth:
        return ROOT
    return a.prefix(a.depth - k)


@dataclass(frozen=True)
class CanonicalForm:
    """Deterministic code; equal codes iff the rooted (labeled) trees are isomorphic."""

    code: str

    def __str__(self) -> str:
        return self.code


def _code_below(
    tree: FiniteTree, node: Node, annotate: Optional[Callable[[Node], str]]
) -> str:
    kids = sorted(_code_below(tree, c, annotate) for c in tree.children(node))
    anno = annotate(node) if annotate is not None else ""
    return "(" + anno + "".join(kids) + ")"


def canonical(tree: FiniteTree, use_labels: bool = False) -> CanonicalForm:
    """Bottom-up sorted-children encoding of the rooted tree.

    With ``use_labels`` the plan projection of every node is woven into the
    code, so equality means label-preserving isomorphism.
    """
    annotate = None
    if use_labels:
        annotate = lambda v: ".".join(map(str, v.plan_path)) + ";"
    return CanonicalForm(_code_below(tree, ROOT, annotate))


def generated_nodes(tup: Iterable[Node]) -> frozenset[Node]:
    """Substructure generated by a tuple: all prefixes of its entries, plus the root."""
    out: set[Node] = {ROOT}
    for a in tup:
        for i in range(1, a.depth + 1):
            out.add(a.prefix(i))
    return frozenset(out)


@dataclass(frozen=True)
class TupleType:
    """Quantifier-free type of a tuple: its generated substructure with the
    tuple positions marked, compressed to a canonical code."""

    code: str
    generated: frozenset[Node] = field(compare=False, hash=False)
    labeled: bool = field(compare=False, hash=False, default=True)

    def __str__(self) -> str:
        return self.code


def qftp(tree: FiniteTree, tup: tuple[Node, ...], use_labels: bool = True) -> TupleType:
    """Quantifier-free type of ``tup`` in ``tree``.

    Two tuples get equal values exactly when the entrywise correspondence
    extends to an isomorphism of their generated substructures (respecting
    plan labels when ``use_labels`` is set).
    """
    tree.require(*tup)
    gen = generated_nodes(tup)
    positions: dict[Node, tuple[int, ...]] = {}
    for i, a in enumerate(tup):
        positions[a] = positions.get(a, ()) + (i,)
    sub = FiniteTree(gen)

    def annotate(v: Node) -> str:
        label = ".".join(map(str, v.plan_path)) if use_labels else ""
        pos = ",".join(map(str, positions.get(v, ())))
        return f"{label}|{pos};"

    return TupleType(_code_below(sub, ROOT, annotate), gen, use_labels)


def subtree(tree: FiniteTree, at: Node) -> FiniteTree:
    """The tree above ``at``, re-rooted (prefixes stripped)."""
    tree.require(at)
    k = at.depth
    return FiniteTree(
        Node(v.segs[k:]) for v in tree.nodes if at.is_prefix_of(v)
    )


def find_embedding(
    src: FiniteTree,
    dst: FiniteTree,
    partial: Optional[dict[Node, Node]] = None,
    use_labels: bool = True,
) -> Optional[dict[Node, Node]]:
    """Search for an injective structure-preserving map extending ``partial``.

    Preserves the root, pred, meet, the prefix order, and (when asked) plan
    labels.  Returns None when no embedding exists.
    """
    partial = dict(partial or {})
    assignment: dict[Node, Node] = {ROOT: ROOT}
    for a, b in partial.items():
        src.require(a)
        dst.require(b)
    for a, b in partial.items():
        # Embeddings preserve depth; pin down every prefix that follows.
        if a.depth != b.depth:
            raise DomainError(f"partial map does not preserve depth at {a}")
        for i in range(a.depth, -1, -1):
            pa, pb = a.prefix(i), b.prefix(i)
            if pa in assignment and assignment[pa] != pb:
                raise DomainError(f"inconsistent partial map at {pa}")
            assignment[pa] = pb
    if use_labels:
        for a, b in assignment.items():
            if a.plan_path != b.plan_path:
                raise DomainError(f"partial map breaks labels at {a}")
    used = set(assignment.values())
    if len(used) != len(assignment):
        raise DomainError("partial map is not injective")

    order = [v for v in src.sorted_nodes() if v.segs]

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        pa = a.parent()
        image_parent = assignment[pa]
        if a in assignment:
            if assignment[a].parent() != image_parent:
                return False
            return extend(i + 1)
        for cand in dst.children(image_parent):
            if cand in used:
                continue
            if use_labels and cand.plan_path != a.plan_path:
                continue
            assignment[a] = cand
            used.add(cand)
            if extend(i + 1):
                return True
            del assignment[a]
            used.discard(cand)
        return False

    if not extend(0):
        return None
    return dict(assignment)
