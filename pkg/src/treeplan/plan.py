"""Tree plans and their finite expansions.

A tree plan is a finite prefix-closed set of branch-index paths with a
``1``/``inf`` mark on every node (the root is always ``1``).  Expanding a
plan at size ``n`` replaces every mark-``inf`` node by ``n`` tagged copies
per parent and every mark-``1`` node by a single star-tagged copy.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import BudgetError, DomainError, PlanSyntaxError
from .trees import STAR, FiniteTree, Node, PlanPath, ROOT

DEFAULT_NODE_BUDGET = 2_000_000


def node_budget(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    env = os.environ.get("TREEPLAN_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise BudgetError(f"TREEPLAN_BUDGET is not an integer: {env!r}")
    return DEFAULT_NODE_BUDGET


@dataclass(frozen=True)
class TreePlan:
    """The pair (node set, set of replicated nodes)."""

    nodes: frozenset[PlanPath]
    inf_nodes: frozenset[PlanPath]

    def __post_init__(self):
        if () not in self.nodes:
            raise DomainError("a plan must contain the empty path")
        if () in self.inf_nodes:
            raise DomainError("the plan root must carry mark 1")
        if not self.inf_nodes <= self.nodes:
            raise DomainError("inf-marked paths must be plan nodes")
        for sigma in self.nodes:
            if sigma and sigma[:-1] not in self.nodes:
                raise DomainError(f"plan is not prefix-closed at {sigma}")
        for sigma in self.nodes:
            branches = sorted(tau[-1] for tau in self.nodes if tau[:-1] == sigma and tau)
            if branches != list(range(len(branches))):
                raise DomainError(f"branch indices below {sigma} are not consecutive")

    def __contains__(self, sigma: PlanPath) -> bool:
        return sigma in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def is_inf(self, sigma: PlanPath) -> bool:
        if sigma not in self.nodes:
            raise DomainError(f"unknown plan node {sigma}")
        return sigma in self.inf_nodes

    def children(self, sigma: PlanPath) -> list[PlanPath]:
        if sigma not in self.nodes:
            raise DomainError(f"unknown plan node {sigma}")
        kids = [tau for tau in self.nodes if tau[:-1] == sigma and tau]
        return sorted(kids)

    def sorted_nodes(self) -> list[PlanPath]:
        return sorted(self.nodes)

    def __str__(self) -> str:
        return plan_text(self)


def make_plan(marked: Mapping[PlanPath, bool]) -> TreePlan:
    """Build a plan from a path -> is_inf mapping."""
    return TreePlan(
        frozenset(marked),
        frozenset(sigma for sigma, inf in marked.items() if inf),
    )


def parse_plan(text: str) -> TreePlan:
    """Parse the parenthesized grammar ``node := "(" mark { node } ")"``.

    Marks are ``1`` or ``inf``; ``#`` starts a comment running to end of
    line.  Branch order follows textual order.
    """
    stripped = []
    for line in text.splitlines():
        hash_at = line.find("#")
        stripped.append(line if hash_at < 0 else line[:hash_at])
    src = "\n".join(stripped) if stripped else text

    marked: dict[PlanPath, bool] = {}
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(src) and src[pos].isspace():
            pos += 1

    def expect(ch: str):
        nonlocal pos
        skip_ws()
        if pos >= len(src) or src[pos] != ch:
            raise PlanSyntaxError(f"expected {ch!r}", pos)
        pos += 1

    def parse_node(path: PlanPath):
        nonlocal pos
        expect("(")
        skip_ws()
        if src.startswith("inf", pos):
            mark_inf = True
            pos += 3
        elif pos < len(src) and src[pos] == "1":
            mark_inf = False
            pos += 1
        else:
            raise PlanSyntaxError("expected mark '1' or 'inf'", pos)
        if path == () and mark_inf:
            raise PlanSyntaxError("the root must carry mark 1", pos)
        marked[path] = mark_inf
        branch = 0
        while True:
            skip_ws()
            if pos < len(src) and src[pos] == "(":
                parse_node(path + (branch,))
                branch += 1
            else:
                break
        expect(")")

    parse_node(())
    skip_ws()
    if pos != len(src):
        raise PlanSyntaxError("trailing input after plan", pos)
    return make_plan(marked)


def plan_text(p: TreePlan) -> str:
    def render(sigma: PlanPath) -> str:
        mark = "inf" if sigma in p.inf_nodes else "1"
        kids = "".join(" " + render(tau) for tau in p.children(sigma))
        return f"({mark}{kids})"

    return render(())


def height(p: TreePlan) -> int:
    """Length of the longest path in the plan."""
    return max(len(sigma) for sigma in p.nodes)


def ell(p: TreePlan) -> int:
    """One more than the largest number of mark-1 children at any node."""
    best = 0
    for sigma in p.nodes:
        ones = sum(1 for tau in p.children(sigma) if tau not in p.inf_nodes)
        best = max(best, ones)
    return 1 + best


def inf_count(p: TreePlan, sigma: PlanPath) -> int:
    """Number of inf-marked nodes on the path down to and including ``sigma``."""
    if sigma not in p.nodes:
        raise DomainError(f"unknown plan node {sigma}")
    return sum(1 for i in range(1, len(sigma) + 1) if sigma[:i] in p.inf_nodes)


def subplan(p: TreePlan, sigma: PlanPath) -> TreePlan:
    """The plan seen from ``sigma``: tails re-rooted, root mark reset to 1."""
    if sigma not in p.nodes:
        raise DomainError(f"unknown plan node {sigma}")
    marked: dict[PlanPath, bool] = {}
    k = len(sigma)
    for tau in p.nodes:
        if tau[:k] == sigma:
            tail = tau[k:]
            marked[tail] = tail != () and tau in p.inf_nodes
    return make_plan(marked)


def plan_canonical(p: TreePlan) -> str:
    """Mark-annotated sorted-children code; equal codes iff plans are isomorphic."""

    def code(sigma: PlanPath) -> str:
        mark = "i" if sigma in p.inf_nodes else "1"
        kids = sorted(code(tau) for tau in p.children(sigma))
        return "(" + mark + "".join(kids) + ")"

    return code(())


def plan_isomorphic(p: TreePlan, q: TreePlan) -> bool:
    """Root- and mark-preserving bijection respecting pred; branches may permute."""
    return plan_canonical(p) == plan_canonical(q)


def predicted_size(p: TreePlan, n: int) -> int:
    """Node count of the expansion at size ``n``, computed without building it."""

    def count(sigma: PlanPath) -> int:
        total = 1
        for tau in p.children(sigma):
            factor = n if tau in p.inf_nodes else 1
            total += factor * count(tau)
        return total

    return count(())


class Expansion:
    """The finite structure obtained from a plan at size ``n``.

    Carries the plan, the tree of tagged paths, per-plan-node fibers, and a
    memo for tuple-type codes (orbit computations reuse them heavily).
    """

    __slots__ = ("plan", "n", "tree", "_fibers", "_qftp_memo")

    def __init__(self, plan: TreePlan, n: int, tree: FiniteTree):
        self.plan = plan
        self.n = n
        self.tree = tree
        fibers: dict[PlanPath, list[Node]] = {sigma: [] for sigma in plan.nodes}
        for v in tree.sorted_nodes():
            fibers[v.plan_path].append(v)
        self._fibers = fibers
        self._qftp_memo: dict = {}

    def fiber(self, sigma: PlanPath) -> list[Node]:
        if sigma not in self.plan.nodes:
            raise DomainError(f"unknown plan node {sigma}")
        return list(self._fibers[sigma])

    def nodes(self) -> list[Node]:
        return self.tree.sorted_nodes()

    def __contains__(self, node: Node) -> bool:
        return node in self.tree

    def __len__(self) -> int:
        return len(self.tree)

    def mark_is_inf(self, node: Node) -> bool:
        return node.plan_path in self.plan.inf_nodes

    def __repr__(self) -> str:
        return f"Expansion({plan_text(self.plan)!r}, n={self.n}, size={len(self)})"


def expand(p: TreePlan, n: int, budget: Optional[int] = None) -> Expansion:
    """Materialize the expansion of ``p`` at size ``n``.

    Every mark-1 plan child contributes one star-tagged copy per parent;
    every inf child contributes ``n`` tagged copies.  Rejects ``n < 1`` and
    anything above the node budget.
    """
    if n < 1:
        raise DomainError("expansion size must be at least 1")
    limit = node_budget(budget)
    size = predicted_size(p, n)
    if size > limit:
        raise BudgetError(f"expansion would have {size} nodes; budget is {limit}")

    nodes: list[Node] = []

    def grow(node: Node, sigma: PlanPath):
        nodes.append(node)
        for tau in p.children(sigma):
            branch = tau[-1]
            if tau in p.inf_nodes:
                for t in range(n):
                    grow(node.child(branch, t), tau)
            else:
                grow(node.child(branch, STAR), tau)

    grow(ROOT, ())
    return Expansion(p, n, FiniteTree(nodes, size_param=n))


def induced_automorphism(e: Expansion, perm: Mapping[int, int]) -> dict[Node, Node]:
    """Automorphism obtained by renaming every non-star tag through ``perm``."""
    if sorted(perm) != list(range(e.n)) or sorted(perm.values()) != list(range(e.n)):
        raise DomainError(f"perm must be a bijection on 0..{e.n - 1}")

    def apply(v: Node) -> Node:
        return Node(
            tuple(
                (branch, STAR if tag is STAR else perm[tag]) for branch, tag in v.segs
            )
        )

    return {v: apply(v) for v in e.nodes()}
