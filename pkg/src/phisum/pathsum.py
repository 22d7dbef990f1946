"""Pathsum algorithms for acyclic WFSA-φ.

Every algorithm returns a :class:`PathsumReport` carrying the value and
exact operation counters.  ⊕/⊗/⊖ calls are counted by wrapping the
semiring; everything else is incremented inline.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .aggregator import DivisionRingAggregator, RingAggregator, aggregator_for
from .automaton import (
    NO_FALLBACK,
    Automaton,
    FailureForest,
    build_failure_forest,
    failure_expand,
    validate,
)
from .errors import PathBudgetExceeded
from .semiring import OpCounts, instrument, require_ring
from .splitting import (
    SplitPolicy,
    default_update_cost,
    dynamic_should_split,
    memo_copy_cost,
    plan_static_splits,
)
from .toposort import StateOrder, make_order

__all__ = [
    "PathsumReport",
    "ALGORITHMS",
    "brute_force_pathsum",
    "expand_backward",
    "memoization_backward",
    "ring_backward",
    "general_backward",
    "pathsum",
    "memo_modeled_cost",
]

COUNTERS = (
    "oplus",
    "otimes",
    "ominus",
    "inverse",
    "beta_qa",
    "visits",
    "leaves",
    "sets",
    "mults",
    "copies",
    "expanded_arcs",
    "failure_copies",
    "paths",
)


@dataclass
class PathsumReport:
    Z: object
    algorithm: str
    semiring: str
    order: str = "-"
    compatible: bool | None = None
    counters: dict = field(default_factory=lambda: dict.fromkeys(COUNTERS, 0))
    extras: dict = field(default_factory=dict)
    beta: list | None = field(default=None, repr=False)
    wall_us: int = 0

    def __getitem__(self, name):
        return self.counters[name]

    def as_record(self, fmt=None) -> dict:
        rec = {
            "Z": fmt(self.Z) if fmt else self.Z,
            "algorithm": self.algorithm,
            "semiring": self.semiring,
            "order": self.order,
            "compatible": self.compatible,
        }
        rec.update(self.counters)
        rec.update({k: v for k, v in self.extras.items()
                    if v is None or isinstance(v, (bool, int, float, str))})
        rec["wall_us"] = self.wall_us
        return rec


class _Counted:
    """Counters shared by one run, plus the instrumented semiring."""

    def __init__(self, a: Automaton):
        self.ops = OpCounts()
        self.sr = instrument(a.semiring, self.ops)
        self.c = dict.fromkeys(COUNTERS, 0)

    def report(self, Z, algorithm, a, order=None, beta=None, extras=None):
        self.c.update(
            oplus=self.ops.oplus, otimes=self.ops.otimes,
            ominus=self.ops.ominus, inverse=self.ops.inverse,
        )
        return PathsumReport(
            Z=Z,
            algorithm=algorithm,
            semiring=a.semiring.name,
            order=order.strategy if order is not None else "-",
            compatible=order.claims_compatible if order is not None else None,
            counters=self.c,
            extras=extras or {},
            beta=beta,
        )


def _total(sr, a: Automaton, beta):
    zero = sr.zero
    Z = zero
    for q in range(a.n_states):
        if a.init[q] != zero:
            Z = sr.plus(Z, sr.times(a.init[q], beta[q]))
    return Z


def _arc_sum(sr, targets, beta):
    dst, w = targets[0]
    acc = sr.times(w, beta[dst])
    for dst, w in targets[1:]:
        acc = sr.plus(acc, sr.times(w, beta[dst]))
    return acc


# -- brute force ----------------------------------------------------------------


def _expanded_arcs_naive(a: Automaton, sr, q):
    """Explicit arcs of ``q`` after following failure arcs, built from scratch."""
    found = {}
    scale = None
    cur = q
    while True:
        for sym, targets in a.out[cur]:
            if sym in found:
                continue
            if scale is None:
                found[sym] = list(targets)
            else:
                found[sym] = [(d, sr.times(scale, w)) for d, w in targets]
        f = a.fallback[cur]
        if f == NO_FALLBACK:
            break
        w_phi = a.phi_weight[cur]
        scale = w_phi if scale is None else sr.times(scale, w_phi)
        cur = f
    return [(d, w) for sym in sorted(found) for d, w in found[sym]]


def brute_force_pathsum(a: Automaton, budget: int = 10**6) -> PathsumReport:
    """Enumerate every path of the failure-expanded automaton.

    The expansion here is independent of :func:`failure_expand` so the two
    can check each other.  Raises :class:`PathBudgetExceeded` once more
    than ``budget`` paths have been enumerated.
    """
    run = _Counted(a)
    sr = run.sr
    zero = sr.zero
    arcs = [_expanded_arcs_naive(a, sr, q) for q in range(a.n_states)]
    count = 0
    Z = zero

    for start in range(a.n_states):
        lam = a.init[start]
        if lam == zero:
            continue
        stack = [(start, lam)]
        while stack:
            q, acc = stack.pop()
            count += 1
            if count > budget:
                raise PathBudgetExceeded(f"more than {budget} paths")
            Z = sr.plus(Z, sr.times(acc, a.final[q]))
            for dst, w in arcs[q]:
                stack.append((dst, sr.times(acc, w)))
    run.c["paths"] = count
    return run.report(Z, "brute", a)


# -- failure expansion + backward ---------------------------------------------------


def expand_backward(a: Automaton, order: StateOrder) -> PathsumReport:
    run = _Counted(a)
    sr = run.sr
    ea = failure_expand(a)
    beta = [sr.zero] * a.n_states
    for q in order:
        acc = a.final[q]
        for _, targets in ea.out[q]:
            for dst, w in targets:
                acc = sr.plus(acc, sr.times(w, beta[dst]))
        beta[q] = acc
    run.c["expanded_arcs"] = ea.n_arcs - a.n_arcs
    return run.report(_total(sr, a, beta), "expand", a, order, beta)


# -- memoization --------------------------------------------------------------------


def memoization_backward(a: Automaton, order: StateOrder, weighted: bool | None = None) -> PathsumReport:
    """Copy β(q^φ, b) back for every symbol b that q does not override."""
    run = _Counted(a)
    sr = run.sr
    weighted = a.weighted_phi if weighted is None else weighted
    n = a.n_states
    beta = [sr.zero] * n
    memo: list = [None] * n
    per_state = [0] * n
    for q in order:
        table = {}
        local = sr.zero
        for sym, targets in a.out[q]:
            v = _arc_sum(sr, targets, beta)
            table[sym] = v
            local = sr.plus(local, v)
        fail = sr.zero
        f = a.fallback[q]
        if f != NO_FALLBACK:
            w_phi = a.phi_weight[q]
            copied = 0
            for b, v in memo[f].items():
                if b in table:
                    continue
                if weighted:
                    v = sr.times(w_phi, v)
                table[b] = v
                fail = sr.plus(fail, v)
                copied += 1
            per_state[q] = copied
        memo[q] = table
        beta[q] = sr.plus(a.final[q], sr.plus(local, fail))
    run.c["failure_copies"] = sum(per_state)
    # one table copy per state with a fallback
    run.c["copies"] = sum(1 for f in a.fallback if f != NO_FALLBACK)
    rep = run.report(_total(sr, a, beta), "memo", a, order, beta)
    rep.extras["failure_copies_per_state"] = per_state
    rep.extras["memo"] = memo
    return rep


# -- memoizing β(q, a) shared by the ring and general algorithms ---------------------


class _BetaQA:
    """β(q, a): local arc sum when a ∈ Σ(q), else follow the failure chain.

    Every call, including each step along a failure chain and memo hits,
    increments the ``beta_qa`` counter.
    """

    def __init__(self, a: Automaton, sr, beta, counters, weighted: bool):
        self.sr = sr
        self.beta = beta
        self.c = counters
        self.out = [dict(arcs) for arcs in a.out]
        self.fallback = a.fallback
        self.phi_weight = a.phi_weight
        self.weighted = weighted
        self.memo = [dict() for _ in range(a.n_states)]

    def __call__(self, q, sym):
        sr = self.sr
        c = self.c
        chain = []
        cur = q
        while True:
            c["beta_qa"] += 1
            memo = self.memo[cur]
            if sym in memo:
                val = memo[sym]
                break
            targets = self.out[cur].get(sym)
            if targets is not None:
                val = _arc_sum(sr, targets, self.beta)
                memo[sym] = val
                break
            f = self.fallback[cur]
            if f == NO_FALLBACK:
                val = sr.zero
                memo[sym] = val
                break
            chain.append(cur)
            cur = f
        for s in reversed(chain):
            if self.weighted:
                val = sr.times(self.phi_weight[s], val)
            self.memo[s][sym] = val
        return val


# -- ring -------------------------------------------------------------------------------


def ring_backward(a: Automaton, order: StateOrder | None = None,
                  weighted: bool | None = None) -> PathsumReport:
    """Replace overridden summands of β(q^φ, Σ) using ⊖."""
    require_ring(a.semiring, "ring_backward")
    if order is None:
        order = make_order(a, "kahn")
    run = _Counted(a)
    sr = run.sr
    weighted = a.weighted_phi if weighted is None else weighted
    n = a.n_states
    beta = [sr.zero] * n
    beta_sigma = [sr.zero] * n
    qa = _BetaQA(a, sr, beta, run.c, weighted)
    for q in order:
        syms = a.sigma(q)
        local = sr.zero
        for sym in syms:
            local = sr.plus(local, qa(q, sym))
        f = a.fallback[q]
        if f == NO_FALLBACK:
            total = local
        else:
            overridden = sr.zero
            for sym in syms:
                overridden = sr.plus(overridden, qa(f, sym))
            fail = sr.minus(beta_sigma[f], overridden)
            if weighted:
                fail = sr.times(a.phi_weight[q], fail)
            total = sr.plus(fail, local)
        beta_sigma[q] = total
        beta[q] = sr.plus(a.final[q], total)
    rep = run.report(_total(sr, a, beta), "ring", a, order, beta)
    rep.extras["beta_sigma"] = beta_sigma
    rep.extras["beta_qa_memo"] = qa.memo
    return rep


# -- general ------------------------------------------------------------------------


def general_backward(
    a: Automaton,
    order: StateOrder,
    split: SplitPolicy | None = None,
    aggregator: str | None = None,
    weighted: bool | None = None,
    pessimal: bool = False,
    forest: FailureForest | None = None,
    trace=None,
) -> PathsumReport:
    """One shared aggregator per (possibly split) failure tree.

    With ``pessimal=True`` the aggregator is walked back to its tree's root
    after every state, which realises the worst-case Visit count for any
    order.  ``trace`` may be a callable receiving ``(event, state, agg)``
    for ``visit``/``leave``/``copy`` events, and ``state`` once the
    aggregator represents a newly enumerated state.
    """
    forest = forest or build_failure_forest(a)
    policy = split or SplitPolicy("none")
    run = _Counted(a)
    sr = run.sr
    c = run.c
    weighted = a.weighted_phi if weighted is None else weighted
    agg_cls = aggregator_for(a.semiring, aggregator)
    ring_like = agg_cls in (RingAggregator, DivisionRingAggregator)
    c_u = policy.c_u if policy.c_u is not None else default_update_cost(a.n_symbols, ring_like)

    n = a.n_states
    fallback = a.fallback
    phi_weight = a.phi_weight
    sigma = a.sigma
    beta = [sr.zero] * n
    qa = _BetaQA(a, sr, beta, c, weighted)

    plan = None
    eff_root = [f == NO_FALLBACK for f in fallback]
    if policy.mode == "static":
        plan = policy.plan or plan_static_splits(
            a, forest, c_u, a.n_symbols if policy.copy_model == "sigma" else None
        )
        for s in plan.states:
            eff_root[s] = True
    split_kids = [[] for _ in range(n)]
    if plan is not None:
        for s in plan.states:
            split_kids[fallback[s]].append(s)

    gamma = {}
    frontier = {}
    pending = {}
    destructive = [0] * n
    units = 0
    copy_interned = 0
    copy_sigma = 0
    dynamic_splits = []

    def visit(g, q):
        c["visits"] += 1
        if weighted and fallback[q] != NO_FALLBACK:
            g.mult(phi_weight[q])
            c["mults"] += 1
        for sym in sigma(q):
            g.set(sym, qa(q, sym))
            c["sets"] += 1
        if trace:
            trace("visit", q, g)

    def leave(g, q):
        c["leaves"] += 1
        g.undo(len(sigma(q)) + (1 if weighted and fallback[q] != NO_FALLBACK else 0))
        if trace:
            trace("leave", q, g)

    def copy_of(g, q):
        nonlocal copy_interned, copy_sigma
        c["copies"] += 1
        copy_interned += len(g)
        copy_sigma += a.n_symbols
        if trace:
            trace("copy", q, g)
        return g.clone_snapshot()

    for q in order:
        if forest.is_singleton(q):
            total = sr.zero
            for sym in sigma(q):
                total = sr.plus(total, qa(q, sym))
            beta[q] = sr.plus(a.final[q], total)
            continue
        r = q
        while not eff_root[r]:
            r = fallback[r]
        if r == q:
            if fallback[q] == NO_FALLBACK:
                g = agg_cls(sr)
            else:
                g = pending.pop(q)
            visit(g, q)
            gamma[q] = g
        else:
            g = gamma[r]
            cur = frontier[r]
            while not forest.is_descendant(cur, q):
                leave(g, cur)
                cur = fallback[cur]
            path = []
            x = q
            while x != cur:
                path.append(x)
                x = fallback[x]
            for x in reversed(path):
                if policy.mode == "dynamic":
                    k = len(g) if policy.copy_model == "interned" else a.n_symbols
                    if dynamic_should_split(destructive[x], len(sigma(x)), c_u, k):
                        frontier[r] = fallback[x]
                        g = copy_of(g, x)
                        visit(g, x)
                        eff_root[x] = True
                        gamma[x] = g
                        r = x
                        dynamic_splits.append(x)
                        continue
                visit(g, x)
                destructive[x] += 1
                units += len(sigma(x))
        frontier[r] = q
        beta[q] = sr.plus(a.final[q], g.value())
        if trace:
            trace("state", q, g)
        for s in split_kids[q]:
            pending[s] = copy_of(g, s)
        if pessimal:
            cur = q
            while cur != r:
                leave(g, cur)
                cur = fallback[cur]
            frontier[r] = r

    copy_cost = copy_sigma if policy.copy_model == "sigma" else copy_interned
    extras = {
        "split": policy.mode,
        "aggregator": agg_cls.kind,
        "c_u": c_u,
        "update_units": units,
        "copy_cost_interned": copy_interned,
        "copy_cost_sigma": copy_sigma,
        "modeled_cost": units * c_u + copy_cost,
        "visits_per_state": destructive,
        "splits": sorted(plan.states) if plan is not None else sorted(dynamic_splits),
    }
    if plan is not None:
        extras["predicted_improvement"] = plan.improvement
        extras["plan"] = plan
    return run.report(_total(sr, a, beta), "general", a, order, beta, extras)


# -- dispatcher ---------------------------------------------------------------------


ALGORITHMS = ("brute", "expand", "memo", "ring", "general")


def pathsum(
    a: Automaton,
    algorithm: str = "general",
    order="kahn",
    split: str | SplitPolicy = "none",
    weighted_phi: bool | None = None,
    aggregator: str | None = None,
    pessimal: bool = False,
    budget: int = 10**6,
    trace=None,
) -> PathsumReport:
    """Validate, pick an order and run one algorithm.

    ``weighted_phi=None`` enables the weighted code path only when some
    failure weight differs from 𝟙.  ``False`` with non-𝟙 failure weights is
    rejected; ``True`` forces the weighted path.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if algorithm == "ring":
        require_ring(a.semiring, "the ring algorithm")
    if weighted_phi is False and a.weighted_phi:
        raise ValueError("automaton has failure weights other than one; weighted mode required")
    validate(a)
    weighted = a.weighted_phi if weighted_phi is None else weighted_phi
    start = time.perf_counter()
    if algorithm == "brute":
        rep = brute_force_pathsum(a, budget)
    else:
        forest = build_failure_forest(a)
        state_order = make_order(a, order, forest)
        if algorithm == "expand":
            rep = expand_backward(a, state_order)
        elif algorithm == "memo":
            rep = memoization_backward(a, state_order, weighted)
        elif algorithm == "ring":
            rep = ring_backward(a, state_order, weighted)
        else:
            policy = split if isinstance(split, SplitPolicy) else SplitPolicy(split)
            rep = general_backward(
                a, state_order, policy, aggregator, weighted, pessimal, forest, trace
            )
    rep.wall_us = int((time.perf_counter() - start) * 1e6)
    rep.extras["weighted_phi"] = weighted
    return rep


def memo_modeled_cost(a: Automaton, copy_model: str = "interned", forest=None) -> int:
    """Always-copy cost in model units, the yardstick for dynamic splitting."""
    forest = forest or build_failure_forest(a)
    ea = failure_expand(a)
    bar = [len(ea.sigma(q)) for q in range(a.n_states)]
    return memo_copy_cost(a, forest, copy_model, bar)
