"""Downward closure, tree closure, anchors, and orbits inside an expansion."""

from __future__ import annotations

from typing import Iterable

from .errors import DomainError
from .plan import Expansion
from .trees import Node, ROOT, qftp

NodeSet = frozenset[Node]


def downset(e: Expansion, members: Iterable[Node]) -> NodeSet:
    """All prefixes of the given nodes, members included.

    The root belongs to the downset of any non-empty set, being below
    everything.
    """
    out: set[Node] = set()
    for b in members:
        e.tree.require(b)
        for i in range(b.depth + 1):
            out.add(b.prefix(i))
    return frozenset(out)


def tcl(e: Expansion, members: Iterable[Node]) -> NodeSet:
    """Tree closure: the least superset of the downset (plus the root) that
    contains every mark-1 child of each of its members.

    Computed by the staged construction: stage 0 is the root together with
    the downset; each later stage adds the nodes whose plan mark is 1 and
    whose predecessor is already in.
    """
    closed: set[Node] = {ROOT} | set(downset(e, members))
    frontier = list(closed)
    while frontier:
        nxt: list[Node] = []
        for v in frontier:
            for c in e.tree.children(v):
                if c not in closed and not e.mark_is_inf(c):
                    closed.add(c)
                    nxt.append(c)
        frontier = nxt
    return frozenset(closed)


def anchor(e: Expansion, a: Node, members: Iterable[Node]) -> Node:
    """The maximum tree-closure element below-or-equal ``a``.

    Equals ``a`` exactly when ``a`` is in the closure; the root always
    qualifies, so the maximum exists.
    """
    e.tree.require(a)
    closed = tcl(e, members)
    return anchor_in(closed, a)


def anchor_in(closed: NodeSet, a: Node) -> Node:
    """Anchor of ``a`` relative to an already-computed closed set."""
    for i in range(a.depth, -1, -1):
        p = a.prefix(i)
        if p in closed:
            return p
    raise DomainError("closed set does not contain the root")


def orbit(e: Expansion, a: Node, members: Iterable[Node]) -> NodeSet:
    """All nodes with the same labeled quantifier-free type as ``a`` over the
    given parameters.

    By finite homogeneity this is exactly the orbit of ``a`` under the
    automorphisms fixing the parameters pointwise.
    """
    e.tree.require(a)
    params = tuple(sorted(set(members)))
    e.tree.require(*params)
    target = tuple_code(e, (a,) + params)
    return frozenset(
        x for x in e.nodes() if tuple_code(e, (x,) + params) == target
    )


def tuple_code(e: Expansion, tup: tuple[Node, ...]) -> str:
    """Labeled quantifier-free type code of a tuple, memoized per expansion."""
    memo = e._qftp_memo
    hit = memo.get(tup)
    if hit is None:
        hit = qftp(e.tree, tup, use_labels=True).code
        memo[tup] = hit
    return hit
