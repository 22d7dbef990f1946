"""Failure-tree splitting.

Splitting at ``q`` copies the aggregator when ``q`` is first reached and
makes ``q`` the root of its own tree, so later traversals never walk
below it.  Costs are in model units: one aggregator slot write costs
``c_u`` and one copy costs ``copy_cost``.

The worst-case traversal cost of a tree rooted at ``r`` is
``c_u · Σ_{x ≠ r} |Σ(x)| · subtree(x)``, where ``subtree(x)`` counts the
states whose failure path passes through ``x``.  Splitting at ``q`` inside
a tree rooted at ``q'`` improves that bound by
``Δ(q|q') = -copy_cost + (D_q - D_q') · subtree(q) · c_u``, with ``D_q`` the
out-symbol total on the failure path from ``q`` down to, but excluding,
the original root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .automaton import NO_FALLBACK, Automaton, FailureForest

__all__ = [
    "SplitPolicy",
    "SplitPlan",
    "TreePlan",
    "default_update_cost",
    "dynamic_should_split",
    "path_sums",
    "optimal_static_split",
    "best_single_split",
    "brute_force_split",
    "worst_case_cost",
    "plan_static_splits",
    "memo_copy_cost",
]

MODES = ("none", "dynamic", "static")
COPY_MODELS = ("interned", "sigma")


def default_update_cost(n_symbols: int, ring: bool) -> float:
    """1 for subtraction-based aggregators, log2|Σ| (at least 1) otherwise."""
    if ring or n_symbols < 2:
        return 1.0
    return max(1.0, math.log2(n_symbols))


@dataclass(frozen=True)
class TreePlan:
    root: int
    splits: tuple
    improvement: float
    D: dict = field(repr=False, default_factory=dict)


@dataclass(frozen=True)
class SplitPlan:
    trees: tuple  # TreePlan per non-singleton tree
    c_u: float
    copy_cost: float

    @property
    def states(self) -> frozenset:
        return frozenset(s for t in self.trees for s in t.splits)

    @property
    def improvement(self) -> float:
        return sum(t.improvement for t in self.trees)


@dataclass(frozen=True)
class SplitPolicy:
    mode: str = "none"
    c_u: float | None = None  # None: pick by aggregator capability
    copy_model: str = "interned"  # "interned" key count, or "sigma" for |Σ|
    plan: SplitPlan | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"split mode must be one of {MODES}")
        if self.copy_model not in COPY_MODELS:
            raise ValueError(f"copy model must be one of {COPY_MODELS}")


def dynamic_should_split(visits_so_far: int, sigma_q: int, c_u: float, copy_cost: float) -> bool:
    """Split now iff one more destructive Visit would push the total past a copy."""
    return (visits_so_far + 1) * sigma_q * c_u > copy_cost


def path_sums(forest: FailureForest, sizes, root: int) -> dict:
    """D_q for every state of the tree rooted at ``root`` (root excluded)."""
    D = {root: 0}
    for q in forest.tree_of(root)[1:]:
        D[q] = D[forest.parent[q]] + sizes[q]
    return D


def _delta(q, qp, D, subtree, c_u, copy_cost):
    return -copy_cost + (D[q] - D[qp]) * subtree[q] * c_u


def optimal_static_split(forest: FailureForest, root: int, sizes, c_u: float,
                         copy_cost: float) -> TreePlan:
    """Exact best split set for one tree via the include/exclude recurrence."""
    tree = forest.tree_of(root)
    if forest.parent[root] != NO_FALLBACK:
        raise ValueError(f"state {root} is not a tree root")
    D = path_sums(forest, sizes, root)
    if len(tree) == 1:
        return TreePlan(root, (), 0.0, D)
    sub = forest.subtree
    parent = forest.parent
    kids = forest.children
    bar, take = {}, {}  # keyed (q, q'); take marks the include branch
    for q in reversed(tree[1:]):  # children before their fallback
        qp = parent[q]
        below_q = sum(bar[(p, q)] for p in kids[q])
        while qp != NO_FALLBACK:
            inc = below_q + _delta(q, qp, D, sub, c_u, copy_cost)
            exc = sum(bar[(p, qp)] for p in kids[q])
            if inc > exc:
                bar[(q, qp)], take[(q, qp)] = inc, True
            else:
                bar[(q, qp)], take[(q, qp)] = exc, False
            qp = parent[qp]
    total = sum(bar[(p, root)] for p in kids[root])

    splits = []
    stack = [(p, root) for p in kids[root]]
    while stack:
        q, qp = stack.pop()
        if take[(q, qp)]:
            splits.append(q)
            stack.extend((p, q) for p in kids[q])
        else:
            stack.extend((p, qp) for p in kids[q])
    return TreePlan(root, tuple(sorted(splits)), float(total), D)


def best_single_split(forest: FailureForest, root: int, sizes, c_u: float, copy_cost: float):
    """The single split state with the largest positive improvement, or (None, 0)."""
    D = path_sums(forest, sizes, root)
    best, best_gain = None, 0.0
    for q in forest.tree_of(root)[1:]:
        gain = -copy_cost + D[q] * forest.subtree[q] * c_u
        if gain > best_gain or (gain == best_gain and best is not None and q < best):
            best, best_gain = q, gain
    return best, float(best_gain)


def worst_case_cost(forest: FailureForest, root: int, sizes, c_u: float, copy_cost: float,
                    splits=()) -> float:
    """Bound for one tree with ``splits`` applied, counted path by path."""
    cut = set(splits)
    parent = forest.parent
    units = 0
    for y in forest.tree_of(root):
        x = y
        while x != root and x not in cut:
            units += sizes[x]
            x = parent[x]
        # x is the effective root of y's tree and costs nothing to reach
    return len(cut) * copy_cost + units * c_u


def brute_force_split(forest: FailureForest, root: int, sizes, c_u: float, copy_cost: float):
    """Exhaustive search over split subsets; returns (best set, improvement)."""
    candidates = forest.tree_of(root)[1:]
    base = worst_case_cost(forest, root, sizes, c_u, copy_cost)
    best, best_gain = (), 0.0
    for k in range(1, len(candidates) + 1):
        for subset in combinations(candidates, k):
            gain = base - worst_case_cost(forest, root, sizes, c_u, copy_cost, subset)
            if gain > best_gain:
                best, best_gain = subset, gain
    return tuple(sorted(best)), float(best_gain)


def plan_static_splits(a: Automaton, forest: FailureForest, c_u: float,
                       copy_cost: float | None = None) -> SplitPlan:
    """Optimal static plan for every non-singleton tree of ``a``."""
    if copy_cost is None:
        copy_cost = float(a.n_symbols)
    sizes = [len(a.sigma(q)) for q in range(a.n_states)]
    plans = tuple(
        optimal_static_split(forest, tree[0], sizes, c_u, copy_cost)
        for tree in forest.trees
        if len(tree) > 1
    )
    return SplitPlan(plans, c_u, copy_cost)


def memo_copy_cost(a: Automaton, forest: FailureForest, copy_model: str = "interned",
                   sigma_bar=None) -> int:
    """Modeled cost of copying at every non-root state, as memoization does.

    Under the interned model a copy at ``q`` costs ``|Σ̄(q^φ)|``; under the
    ``sigma`` model it costs ``|Σ|``.
    """
    total = 0
    for q in range(a.n_states):
        f = forest.parent[q]
        if f == NO_FALLBACK:
            continue
        if copy_model == "sigma":
            total += a.n_symbols
        else:
            total += sigma_bar[f]
    return total
