"""Embedding extension, automorphism construction, amalgamation, plan
inference from finite samples, and the dividing criterion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .closure import NodeSet, anchor_in, orbit, tcl, tuple_code
from .errors import CapacityError, DomainError, InferenceError
from .plan import Expansion, TreePlan, expand, make_plan
from .trees import (
    FiniteTree,
    Node,
    PlanPath,
    ROOT,
    STAR,
    canonical,
    format_node,
    subtree,
)

# --------------------------------------------------------------------------
# Embeddings between expansions


def check_embedding(src: Expansion, dst: Expansion, f: dict[Node, Node]) -> None:
    """Raise unless ``f`` is a total label-preserving embedding of ``src``."""
    if src.plan != dst.plan:
        raise DomainError("expansions come from different plans")
    if set(f.keys()) != set(src.tree.nodes):
        raise DomainError("map is not total on the source")
    _check_partial_embedding(dst, f)


def _check_partial_embedding(dst: Expansion, f: dict[Node, Node]) -> None:
    values = set(f.values())
    if len(values) != len(f):
        raise DomainError("map is not injective")
    if f.get(ROOT) != ROOT:
        raise DomainError("map must fix the root")
    for a, b in f.items():
        if b not in dst:
            raise DomainError(f"image {b} is outside the target")
        if a.plan_path != b.plan_path:
            raise DomainError(f"map breaks labels at {a}")
        if a.segs:
            pa = a.parent()
            if pa in f and f[pa] != b.parent():
                raise DomainError(f"map breaks pred at {a}")


def _one_close_pairs(dst: Expansion, f: dict[Node, Node], u: Node, v: Node):
    stack = [(u, v)]
    while stack:
        cu, cv = stack.pop()
        for tau in dst.plan.children(cu.plan_path):
            if tau in dst.plan.inf_nodes:
                continue
            nu, nv = cu.child(tau[-1], STAR), cv.child(tau[-1], STAR)
            if nu not in f:
                f[nu] = nv
                stack.append((nu, nv))


def extend_embedding(
    src: Expansion,
    closed: NodeSet,
    f: dict[Node, Node],
    dst: Expansion,
    c: Node,
) -> dict[Node, Node]:
    """Extend an embedding of a tree-closed set by one node above it.

    For a singleton-branch node nothing changes (it is already in the
    closure).  Otherwise the image is the least fresh sibling with the
    right projection under the image of the predecessor, and the closure
    above the new node follows canonically.  Raises CapacityError when the
    target fiber has no fresh member.
    """
    src.tree.require(c)
    if frozenset(f.keys()) != closed:
        raise DomainError("map domain must equal the closed set")
    if tcl(src, closed) != closed:
        raise DomainError("base set is not tree-closed")
    if c.parent() not in closed:
        raise DomainError("predecessor of the new node must be in the base")
    _check_partial_embedding(dst, f)
    if c in closed:
        return dict(f)
    branch = c.segs[-1][0]
    tau = c.plan_path
    if tau not in src.plan.inf_nodes:
        # Mark-1 nodes above the base already belong to its closure.
        return dict(f)
    d = f[c.parent()]
    used = set(f.values())
    fresh = None
    for t in range(dst.n):
        cand = d.child(branch, t)
        if cand not in used:
            fresh = cand
            break
    if fresh is None:
        raise CapacityError(
            f"no fresh sibling under {format_node(d)} for branch {branch}"
        )
    out = dict(f)
    out[c] = fresh
    _one_close_pairs(dst, out, c, fresh)
    return out


def extend_to_automorphism(e: Expansion, f: dict[Node, Node]) -> dict[Node, Node]:
    """Grow a tree-closed partial embedding of ``e`` into itself until total.

    Always succeeds: fibers on both sides have equal size, so a fresh
    sibling exists at every step; a total injection of a finite structure
    into itself is onto.
    """
    out = dict(f)
    closed = frozenset(out.keys())
    remaining = [v for v in e.nodes() if v not in out]
    while remaining:
        c = next(v for v in remaining if v.parent() in out)
        out = extend_embedding(e, closed, out, e, c)
        closed = frozenset(out.keys())
        remaining = [v for v in remaining if v not in out]
    return out


def rearrange(em: Expansion, en: Expansion, h: dict[Node, Node]) -> dict[Node, Node]:
    """Automorphism ``g`` of the larger expansion with ``g`` after ``h`` the
    identity on the smaller one.

    Also checks that ``h`` preserves projections, which every structure
    embedding here must.
    """
    if em.plan != en.plan:
        raise DomainError("expansions come from different plans")
    if em.n > en.n:
        raise DomainError("source must not be larger than target")
    check_embedding(em, en, h)
    seed = {h[a]: a for a in em.nodes()}
    g = extend_to_automorphism(en, seed)
    for a in em.nodes():
        if g[h[a]] != a:
            raise DomainError("rearrangement failed to invert the embedding")
    return g


def inclusion_embedding(em: Expansion, en: Expansion) -> dict[Node, Node]:
    """The natural embedding of a smaller expansion into a larger one."""
    if em.plan != en.plan or em.n > en.n:
        raise DomainError("no natural inclusion")
    return {v: v for v in em.nodes()}


def automorphism_over(
    e: Expansion, tup_a: tuple[Node, ...], tup_b: tuple[Node, ...]
) -> Optional[dict[Node, Node]]:
    """An automorphism of ``e`` carrying one tuple to the other entrywise,
    when their labeled quantifier-free types agree; None otherwise."""
    e.tree.require(*tup_a)
    e.tree.require(*tup_b)
    if len(tup_a) != len(tup_b):
        return None
    if tuple_code(e, tup_a) != tuple_code(e, tup_b):
        return None
    f: dict[Node, Node] = {ROOT: ROOT}
    for a, b in zip(tup_a, tup_b):
        if a.depth != b.depth:
            return None
        for i in range(1, a.depth + 1):
            u, v = a.prefix(i), b.prefix(i)
            if u in f and f[u] != v:
                return None
            f[u] = v
    for u, v in list(f.items()):
        _one_close_pairs(e, f, u, v)
    if len(set(f.values())) != len(f):
        return None
    return extend_to_automorphism(e, f)


# --------------------------------------------------------------------------
# Disjoint amalgamation


@dataclass(frozen=True)
class Amalgam:
    base: Expansion
    left: Expansion
    right: Expansion
    target: Expansion
    j1: dict[Node, Node]
    j2: dict[Node, Node]

    def images_agree_on_base(self, f1: dict[Node, Node], f2: dict[Node, Node]) -> bool:
        return all(self.j1[f1[a]] == self.j2[f2[a]] for a in self.base.nodes())

    def disjointness(self, f1: dict[Node, Node], f2: dict[Node, Node]) -> bool:
        common = set(self.j1.values()) & set(self.j2.values())
        base_image = {self.j1[f1[a]] for a in self.base.nodes()}
        return common == base_image


def _retag(node: Node, tag_map) -> Node:
    return Node(
        tuple((br, STAR if t is STAR else tag_map(t)) for br, t in node.segs)
    )


def amalgamate(
    base: Expansion,
    left: Expansion,
    right: Expansion,
    f1: dict[Node, Node],
    f2: dict[Node, Node],
) -> Amalgam:
    """Disjoint amalgam of two expansions over a common base.

    The target is the expansion at the sum of the two sizes; the left copy
    embeds by inclusion after rearranging, the right copy by the piecewise
    tag shift that fixes the base tags and moves the rest past the left
    block.  The images intersect exactly in the image of the base.
    """
    if not (base.plan == left.plan == right.plan):
        raise DomainError("amalgamation needs expansions of one plan")
    check_embedding(base, left, f1)
    check_embedding(base, right, f2)
    g1 = rearrange(base, left, f1)
    g2 = rearrange(base, right, f2)
    n0, n1, n2 = base.n, left.n, right.n
    target = expand(base.plan, n1 + n2)

    def shift(t: int) -> int:
        return t if t < n0 else t + n1

    j1 = {a: g1[a] for a in left.nodes()}
    j2 = {a: _retag(g2[a], shift) for a in right.nodes()}
    return Amalgam(base, left, right, target, j1, j2)


# --------------------------------------------------------------------------
# Plan inference from finite samples


def _children_classes(t: FiniteTree) -> list[tuple[str, int, FiniteTree]]:
    groups: dict[str, list[FiniteTree]] = {}
    for c in t.children(ROOT):
        sub = subtree(t, c)
        groups.setdefault(canonical(sub).code, []).append(sub)
    return sorted(
        (code, len(subs), subs[0]) for code, subs in groups.items()
    )


def _assemble(parts: list[tuple[TreePlan, int, int]]) -> TreePlan:
    marked: dict[PlanPath, bool] = {(): False}
    branch = 0
    for sub, inf_copies, one_copies in parts:
        for is_inf, copies in ((True, inf_copies), (False, one_copies)):
            for _ in range(copies):
                marked[(branch,)] = is_inf
                for tau in sub.nodes:
                    if tau:
                        marked[(branch,) + tau] = tau in sub.inf_nodes
                branch += 1
    return make_plan(marked)


def _infer_known(t1: FiniteTree, t2: FiniteTree, n: int) -> TreePlan:
    if len(t1) == 1:
        if len(t2) != 1:
            raise InferenceError("samples disagree at a leaf")
        return make_plan({(): False})
    classes1 = _children_classes(t1)
    classes2 = _children_classes(t2)
    if len(classes1) != len(classes2):
        raise InferenceError(
            "child classes do not correspond one-to-one",
            offending=[c for c, _, _ in classes1] + [c for c, _, _ in classes2],
        )

    edges: dict[tuple[int, int], tuple[TreePlan, int, int]] = {}
    for i, (code1, c1, rep1) in enumerate(classes1):
        for j, (code2, c2, rep2) in enumerate(classes2):
            k = c2 - c1
            m = c1 - k * n
            if k < 0 or m < 0:
                continue
            try:
                sub = _infer_known(rep1, rep2, n)
            except InferenceError:
                continue
            if canonical(_expand_tree(sub, n)).code != code1:
                continue
            if canonical(_expand_tree(sub, n + 1)).code != code2:
                continue
            edges[(i, j)] = (sub, k, m)

    assignment: list[Optional[int]] = [None] * len(classes1)
    taken = [False] * len(classes2)

    def match(i: int) -> bool:
        if i == len(classes1):
            return True
        for j in range(len(classes2)):
            if not taken[j] and (i, j) in edges:
                assignment[i] = j
                taken[j] = True
                if match(i + 1):
                    return True
                assignment[i] = None
                taken[j] = False
        return False

    if not match(0):
        raise InferenceError(
            "no consistent class matching",
            offending=[code for code, _, _ in classes1],
        )
    return _assemble([edges[(i, assignment[i])] for i in range(len(classes1))])


def _expand_tree(p: TreePlan, n: int) -> FiniteTree:
    return expand(p, n).tree


def infer_plan(t1: FiniteTree, t2: FiniteTree) -> TreePlan:
    """Reconstruct a plan from samples presumed built at consecutive sizes.

    Per matched child class the count difference gives the number of
    replicated children and the remainder the number of singletons; the
    size parameter is searched from large to small (replication is
    preferred over coincidence) and the winner must reproduce both samples
    exactly.
    """
    shape1, shape2 = canonical(t1).code, canonical(t2).code
    errors: list[str] = []
    for n in range(len(t1), 0, -1):
        try:
            p = _infer_known(t1, t2, n)
        except InferenceError as err:
            errors.append(f"n={n}: {err}")
            continue
        if canonical(_expand_tree(p, n)).code == shape1 and (
            canonical(_expand_tree(p, n + 1)).code == shape2
        ):
            return p
        errors.append(f"n={n}: reconstruction does not reproduce the samples")
    raise InferenceError(
        "samples admit no consistent plan", offending=errors
    )


def infer_plan_threshold(t: FiniteTree, threshold: int) -> TreePlan:
    """Single-sample heuristic: a child class repeated more than
    ``threshold`` times reads as one replicated child, otherwise as that
    many singletons.  Under-threshold replication is misread by design.
    """
    if threshold < 1:
        raise DomainError("threshold must be at least 1")
    if len(t) == 1:
        return make_plan({(): False})
    parts = []
    for _code, count, rep in _children_classes(t):
        sub = infer_plan_threshold(rep, threshold)
        if count > threshold:
            parts.append((sub, 1, 0))
        else:
            parts.append((sub, 0, count))
    return _assemble(parts)


# --------------------------------------------------------------------------
# The dividing criterion


@dataclass(frozen=True)
class DividingVerdict:
    divides: bool
    witness: Optional[Node] = None
    conjugates: Optional[frozenset[Node]] = None
    two_inconsistent: Optional[bool] = None


def instance_solutions(e: Expansion, witness: Node, k: int) -> frozenset[Node]:
    """Solutions of "the k-fold predecessor of x is the witness"."""
    e.tree.require(witness)
    depth = witness.depth + k
    return frozenset(
        x for x in e.nodes() if x.depth == depth and witness.is_prefix_of(x)
    )


def check_dividing(
    e: Expansion,
    a: Node,
    members_b: Iterable[Node],
    members_c: Iterable[Node],
) -> DividingVerdict:
    """Decide whether the type of ``a`` over B divides over C.

    It does exactly when ``a`` is outside the closure of C and some
    replicated node of the closure of B, itself outside the closure of C,
    sits on the path between the C-anchor of ``a`` (exclusive) and ``a``
    (inclusive).  The witness comes with its conjugate family over C and a
    pairwise-disjointness check of the corresponding instance sets.
    """
    set_b = frozenset(members_b)
    set_c = frozenset(members_c)
    if not set_c <= set_b:
        raise DomainError("C must be contained in B")
    e.tree.require(a, *set_b)
    closed_c = tcl(e, set_c)
    if a in closed_c:
        return DividingVerdict(False)
    closed_b = tcl(e, set_b)
    anchor_c = anchor_in(closed_c, a)
    witness = None
    for i in range(anchor_c.depth + 1, a.depth + 1):
        cand = a.prefix(i)
        if cand in closed_b and cand not in closed_c and e.mark_is_inf(cand):
            witness = cand
            break
    if witness is None:
        return DividingVerdict(False)
    family = orbit(e, witness, set_c)
    k = a.depth - witness.depth
    sets = [instance_solutions(e, w, k) for w in sorted(family)]
    disjoint = all(
        not (sets[i] & sets[j])
        for i in range(len(sets))
        for j in range(i + 1, len(sets))
    )
    return DividingVerdict(True, witness, family, disjoint)


# --------------------------------------------------------------------------
# Plain-tree input formats for inference


def parse_tree_text(text: str) -> FiniteTree:
    """Parse either the parenthesized grammar (marks ignored) or a
    node-per-line parent-index list."""
    body = []
    for line in text.splitlines():
        cut = line.find("#")
        body.append(line if cut < 0 else line[:cut])
    cleaned = "\n".join(body).strip()
    if not cleaned:
        raise DomainError("empty tree input")
    if cleaned.startswith("("):
        return _parse_tree_paren(cleaned)
    return _parse_parent_list(cleaned)


def _parse_tree_paren(src: str) -> FiniteTree:
    nodes: list[Node] = []
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(src) and src[pos].isspace():
            pos += 1

    def parse(at: Node):
        nonlocal pos
        skip_ws()
        if pos >= len(src) or src[pos] != "(":
            raise DomainError(f"expected '(' at position {pos}")
        pos += 1
        skip_ws()
        if src.startswith("inf", pos):
            pos += 3
        elif pos < len(src) and src[pos] == "1":
            pos += 1
        nodes.append(at)
        branch = 0
        while True:
            skip_ws()
            if pos < len(src) and src[pos] == "(":
                parse(at.child(branch, STAR))
                branch += 1
            else:
                break
        skip_ws()
        if pos >= len(src) or src[pos] != ")":
            raise DomainError(f"expected ')' at position {pos}")
        pos += 1

    parse(ROOT)
    skip_ws()
    if pos != len(src):
        raise DomainError("trailing input after tree")
    return FiniteTree(nodes)


def _parse_parent_list(src: str) -> FiniteTree:
    parents: list[int] = []
    for raw in src.split():
        try:
            parents.append(int(raw))
        except ValueError:
            raise DomainError(f"bad parent index {raw!r}")
    if not parents or parents[0] != -1:
        raise DomainError("the first entry must be -1 (the root)")
    paths: list[Node] = [ROOT]
    child_counts = [0] * len(parents)
    for i, parent in enumerate(parents[1:], start=1):
        if not 0 <= parent < i:
            raise DomainError(f"node {i} must name an earlier parent")
        paths.append(paths[parent].child(child_counts[parent], STAR))
        child_counts[parent] += 1
    return FiniteTree(paths)
