"""Immutable WFSA-φ model, failure expansion and failure-forest analysis.

States and symbols are dense integers.  Arcs are grouped by source state
and sub-grouped by symbol; ``out[q]`` is a tuple of ``(a, targets)`` pairs
sorted by symbol, where ``targets`` is a tuple of ``(q', w)`` sorted by
target.  ``fallback[q]`` is ``-1`` for states without a failure arc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CycleError, DuplicateFailureArc, ValidationError
from .semiring import Semiring

__all__ = [
    "Automaton",
    "ValidationReport",
    "FailureForest",
    "SparsityStats",
    "validate",
    "failure_expand",
    "build_failure_forest",
    "compute_stats",
    "find_cycle",
]

NO_FALLBACK = -1


class Automaton:
    """A weighted finite-state automaton with optional failure arcs.

    Build instances with :meth:`Automaton.build`; the constructor itself
    trusts its arguments.
    """

    __slots__ = (
        "semiring",
        "state_names",
        "symbol_names",
        "out",
        "init",
        "final",
        "fallback",
        "phi_weight",
        "merged_parallel",
        "_sigma",
    )

    def __init__(self, semiring, state_names, symbol_names, out, init, final,
                 fallback, phi_weight, merged_parallel=0):
        self.semiring = semiring
        self.state_names = tuple(state_names)
        self.symbol_names = tuple(symbol_names)
        self.out = tuple(out)
        self.init = tuple(init)
        self.final = tuple(final)
        self.fallback = tuple(fallback)
        self.phi_weight = tuple(phi_weight)
        self.merged_parallel = merged_parallel
        self._sigma = tuple(tuple(a for a, _ in arcs) for arcs in self.out)

    # -- construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        semiring: Semiring,
        n_states: int,
        arcs: Iterable[tuple] = (),
        phi: Iterable[tuple] = (),
        init=None,
        final=None,
        n_symbols: int | None = None,
        state_names: Sequence[str] | None = None,
        symbol_names: Sequence[str] | None = None,
        check: bool = True,
    ) -> "Automaton":
        """Assemble an automaton from integer-labelled parts.

        ``arcs`` holds ``(src, sym, dst, w)`` tuples; parallel arcs on the
        same ``(src, sym, dst)`` are merged with ⊕.  ``phi`` holds
        ``(src, dst)`` or ``(src, dst, w)``.  ``init`` and ``final`` are
        mappings (or sequences) from state to weight; missing entries are 𝟘.
        """
        sr = semiring
        grouped: list[dict] = [dict() for _ in range(n_states)]
        merged = 0
        max_sym = -1
        for src, sym, dst, w in arcs:
            _check_state(src, n_states)
            _check_state(dst, n_states)
            if sym < 0:
                raise ValidationError(f"negative symbol id {sym}")
            max_sym = max(max_sym, sym)
            by_sym = grouped[src].setdefault(sym, {})
            if dst in by_sym:
                by_sym[dst] = sr.plus(by_sym[dst], w)
                merged += 1
            else:
                by_sym[dst] = w
        if n_symbols is None:
            n_symbols = max_sym + 1 if symbol_names is None else len(symbol_names)
        if max_sym >= n_symbols:
            raise ValidationError(f"symbol id {max_sym} outside alphabet of size {n_symbols}")

        fallback = [NO_FALLBACK] * n_states
        phi_weight = [sr.one] * n_states
        for entry in phi:
            src, dst = entry[0], entry[1]
            w = entry[2] if len(entry) > 2 else sr.one
            _check_state(src, n_states)
            _check_state(dst, n_states)
            if fallback[src] != NO_FALLBACK:
                raise DuplicateFailureArc(src)
            fallback[src] = dst
            phi_weight[src] = w

        out = []
        for q in range(n_states):
            out.append(tuple(
                (a, tuple(sorted(grouped[q][a].items())))
                for a in sorted(grouped[q])
            ))

        a = cls(
            sr,
            state_names if state_names is not None else [str(i) for i in range(n_states)],
            symbol_names if symbol_names is not None else [f"s{i}" for i in range(n_symbols)],
            out,
            _dense(init, n_states, sr.zero),
            _dense(final, n_states, sr.zero),
            fallback,
            phi_weight,
            merged,
        )
        if len(a.symbol_names) != n_symbols:
            raise ValidationError("symbol_names does not match alphabet size")
        if len(a.state_names) != n_states:
            raise ValidationError("state_names does not match state count")
        if check:
            validate(a)
        return a

    # -- accessors ----------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.out)

    @property
    def n_symbols(self) -> int:
        return len(self.symbol_names)

    @property
    def n_arcs(self) -> int:
        return sum(len(t) for arcs in self.out for _, t in arcs)

    def sigma(self, q: int) -> tuple:
        """Out-symbols Σ(q), sorted."""
        return self._sigma[q]

    def has_fallback(self, q: int) -> bool:
        return self.fallback[q] != NO_FALLBACK

    @property
    def has_phi(self) -> bool:
        return any(f != NO_FALLBACK for f in self.fallback)

    @property
    def weighted_phi(self) -> bool:
        one = self.semiring.one
        return any(
            f != NO_FALLBACK and w != one
            for f, w in zip(self.fallback, self.phi_weight)
        )

    def arcs(self):
        """Yield every arc as ``(src, sym, dst, w)``."""
        for q, arcs in enumerate(self.out):
            for a, targets in arcs:
                for dst, w in targets:
                    yield q, a, dst, w

    def phi_arcs(self):
        for q, f in enumerate(self.fallback):
            if f != NO_FALLBACK:
                yield q, f, self.phi_weight[q]

    def successors(self, q: int):
        """Targets of all arcs and of the failure arc leaving ``q``."""
        for _, targets in self.out[q]:
            for dst, _ in targets:
                yield dst
        if self.fallback[q] != NO_FALLBACK:
            yield self.fallback[q]

    def replace(self, **changes) -> "Automaton":
        fields = {name: getattr(self, name) for name in self.__slots__ if name != "_sigma"}
        fields.update(changes)
        return Automaton(**fields)

    def __eq__(self, other):
        if not isinstance(other, Automaton):
            return NotImplemented
        return (
            self.semiring.name == other.semiring.name
            and self.state_names == other.state_names
            and self.symbol_names == other.symbol_names
            and self.out == other.out
            and self.init == other.init
            and self.final == other.final
            and self.fallback == other.fallback
            and self.phi_weight == other.phi_weight
        )

    def __hash__(self):
        return hash((self.state_names, self.out, self.fallback))

    def __repr__(self):
        return (
            f"<Automaton {self.semiring.name} |Q|={self.n_states} "
            f"|Σ|={self.n_symbols} |E|={self.n_arcs} "
            f"φ={sum(f != NO_FALLBACK for f in self.fallback)}>"
        )


def _check_state(q, n):
    if not 0 <= q < n:
        raise ValidationError(f"state id {q} out of range 0..{n - 1}")


def _dense(mapping, n, zero):
    if mapping is None:
        return [zero] * n
    if isinstance(mapping, dict):
        vec = [zero] * n
        for q, w in mapping.items():
            _check_state(q, n)
            vec[q] = w
        return vec
    vec = list(mapping)
    if len(vec) != n:
        raise ValidationError("weight vector length does not match state count")
    return vec


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    n_states: int
    n_arcs: int
    n_phi: int
    merged_parallel: int


def find_cycle(a: Automaton):
    """Return one cycle of E ∪ E^φ as a list of states, or None."""
    n = a.n_states
    color = [0] * n  # 0 new, 1 on stack, 2 done
    parent = [-1] * n
    for start in range(n):
        if color[start]:
            continue
        stack = [(start, iter(a.successors(start)))]
        color[start] = 1
        while stack:
            q, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[q] = 2
                stack.pop()
                continue
            if color[nxt] == 0:
                color[nxt] = 1
                parent[nxt] = q
                stack.append((nxt, iter(a.successors(nxt))))
            elif color[nxt] == 1:
                cycle = [q]
                while cycle[-1] != nxt:
                    cycle.append(parent[cycle[-1]])
                cycle.reverse()
                return cycle
    return None


def validate(a: Automaton) -> ValidationReport:
    """Check acyclicity of E ∪ E^φ; the other invariants hold by construction."""
    cycle = find_cycle(a)
    if cycle is not None:
        raise CycleError([a.state_names[q] for q in cycle])
    return ValidationReport(
        n_states=a.n_states,
        n_arcs=a.n_arcs,
        n_phi=sum(1 for _ in a.phi_arcs()),
        merged_parallel=a.merged_parallel,
    )


# -- failure forest -----------------------------------------------------------


class FailureForest:
    """Connected components of the φ-graph.

    Orientation follows the failure arcs: the root of a tree has no
    fallback, and ``d`` is a *descendant* of ``q`` when ``d`` lies on the
    φ-path from ``q`` to the root.  ``ancs[q]`` is the number of states on
    that path (so ``ancs[root] == 1``).  ``subtree[q]`` counts the states
    whose φ-path passes through ``q``, including ``q`` itself.
    """

    def __init__(self, a: Automaton):
        n = a.n_states
        self.parent = a.fallback
        children = [[] for _ in range(n)]
        for q, f in enumerate(a.fallback):
            if f != NO_FALLBACK:
                children[f].append(q)
        self.children = tuple(tuple(c) for c in children)
        self.roots = tuple(q for q in range(n) if a.fallback[q] == NO_FALLBACK)

        self.tree_id = [-1] * n
        self.enter = [0] * n
        self.exit = [0] * n
        self.ancs = [0] * n
        self.subtree = [1] * n
        trees = []
        clock = 0
        for t, root in enumerate(self.roots):
            order = []
            self.ancs[root] = 1
            stack = [(root, 0)]
            while stack:
                q, i = stack.pop()
                if i == 0:
                    self.tree_id[q] = t
                    self.enter[q] = clock
                    clock += 1
                    order.append(q)
                kids = self.children[q]
                if i < len(kids):
                    stack.append((q, i + 1))
                    c = kids[i]
                    self.ancs[c] = self.ancs[q] + 1
                    stack.append((c, 0))
                else:
                    self.exit[q] = clock
                    clock += 1
            for q in reversed(order):
                f = a.fallback[q]
                if f != NO_FALLBACK:
                    self.subtree[f] += self.subtree[q]
            trees.append(tuple(order))
        if any(t < 0 for t in self.tree_id):
            # a state never reached from a root sits on a φ-cycle
            bad = [q for q in range(n) if self.tree_id[q] < 0]
            raise CycleError([a.state_names[q] for q in bad])
        self.trees = tuple(trees)
        self.tree_id = tuple(self.tree_id)
        self.enter = tuple(self.enter)
        self.exit = tuple(self.exit)
        self.ancs = tuple(self.ancs)
        self.subtree = tuple(self.subtree)
        self.height = tuple(d - 1 for d in self.ancs)
        self.t_max = max((len(t) for t in trees), default=0)
        self.pi_max = max(self.ancs, default=0)

    def root_of(self, q: int) -> int:
        return self.trees[self.tree_id[q]][0]

    def tree_of(self, q: int) -> tuple:
        return self.trees[self.tree_id[q]]

    def is_descendant(self, d: int, q: int) -> bool:
        """True iff ``d`` lies on the φ-path from ``q`` to its root."""
        return (
            self.tree_id[d] == self.tree_id[q]
            and self.enter[d] <= self.enter[q]
            and self.exit[q] <= self.exit[d]
        )

    def path_to_root(self, q: int) -> list:
        path = [q]
        while self.parent[path[-1]] != NO_FALLBACK:
            path.append(self.parent[path[-1]])
        return path

    def is_singleton(self, q: int) -> bool:
        return len(self.trees[self.tree_id[q]]) == 1


def build_failure_forest(a: Automaton) -> FailureForest:
    return FailureForest(a)


# -- failure expansion --------------------------------------------------------


def _phi_topological(a: Automaton, forest: FailureForest):
    """States ordered so each fallback precedes the states that fail to it."""
    for tree in forest.trees:
        yield from tree


def failure_expand(a: Automaton) -> Automaton:
    """Replace every failure arc by the explicit arcs it stands for.

    Inherited arcs are left-multiplied by the failure weight; arcs landing
    on an existing ``(q, a, q')`` triple are ⊕-merged.
    """
    if not a.has_phi:
        return a
    sr = a.semiring
    one = sr.one
    forest = build_failure_forest(a)
    expanded: list = [None] * a.n_states
    for q in _phi_topological(a, forest):
        own = a.out[q]
        f = a.fallback[q]
        if f == NO_FALLBACK:
            expanded[q] = own
            continue
        w_phi = a.phi_weight[q]
        mine = dict(own)
        merged = {}
        for sym, targets in expanded[f]:
            if sym in mine:
                continue
            if w_phi == one:
                merged[sym] = targets
            else:
                merged[sym] = tuple((dst, sr.times(w_phi, w)) for dst, w in targets)
        merged.update(mine)
        expanded[q] = tuple((sym, merged[sym]) for sym in sorted(merged))
    return Automaton(
        sr,
        a.state_names,
        a.symbol_names,
        expanded,
        a.init,
        a.final,
        [NO_FALLBACK] * a.n_states,
        [one] * a.n_states,
        a.merged_parallel,
    )


# -- sparsity statistics ------------------------------------------------------


@dataclass(frozen=True)
class SparsityStats:
    n_states: int
    n_symbols: int
    n_arcs: int
    n_arcs_bar: int
    sigma_total: int  # Σ_q |Σ(q)|
    sigma_bar_total: int  # Σ_q |Σ̄(q)|
    sigma_hat_total: int  # Σ_q |Σ̂(q)|
    sigma_sizes: tuple
    sigma_bar_sizes: tuple
    sigma_hat: tuple  # frozenset per state
    t_max: int
    pi_max: int

    @property
    def s(self) -> float:
        denom = self.n_states * self.n_symbols
        return self.sigma_total / denom if denom else 0.0

    @property
    def s_bar(self) -> float:
        denom = self.n_states * self.n_symbols
        return self.sigma_bar_total / denom if denom else 0.0

    @property
    def added_arcs(self) -> int:
        return self.n_arcs_bar - self.n_arcs

    def ideal_k(self, tree_size: int) -> float:
        """|T|·sqrt(s·log2|Σ|), reported for information only."""
        if self.n_symbols < 2:
            return 0.0
        return tree_size * math.sqrt(self.s * math.log2(self.n_symbols))

    def as_dict(self) -> dict:
        return {
            "states": self.n_states,
            "symbols": self.n_symbols,
            "arcs": self.n_arcs,
            "arcs_bar": self.n_arcs_bar,
            "s": self.s,
            "s_bar": self.s_bar,
            "sigma_total": self.sigma_total,
            "sigma_bar_total": self.sigma_bar_total,
            "sigma_hat_total": self.sigma_hat_total,
            "t_max": self.t_max,
            "pi_max": self.pi_max,
        }


def compute_stats(a: Automaton, forest: FailureForest | None = None) -> SparsityStats:
    forest = forest or build_failure_forest(a)
    expanded = failure_expand(a)
    n = a.n_states
    sigma_sizes = tuple(len(a.sigma(q)) for q in range(n))
    bar_sizes = tuple(len(expanded.sigma(q)) for q in range(n))

    # Σ̂(q): union of Σ over every state whose φ-path passes through q
    hat: list = [None] * n
    for tree in forest.trees:
        for q in reversed(tree):
            acc = set(a.sigma(q))
            for c in forest.children[q]:
                acc |= hat[c]
            hat[q] = frozenset(acc)
    return SparsityStats(
        n_states=n,
        n_symbols=a.n_symbols,
        n_arcs=a.n_arcs,
        n_arcs_bar=expanded.n_arcs,
        sigma_total=sum(sigma_sizes),
        sigma_bar_total=sum(bar_sizes),
        sigma_hat_total=sum(len(h) for h in hat),
        sigma_sizes=sigma_sizes,
        sigma_bar_sizes=bar_sizes,
        sigma_hat=tuple(hat),
        t_max=forest.t_max,
        pi_max=forest.pi_max,
    )
