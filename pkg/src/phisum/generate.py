"""Seeded random automata and the named fixture families."""
from __future__ import annotations

import random

from .automaton import Automaton
from .semiring import REAL, Semiring

__all__ = [
    "random_automaton",
    "vocrf_lattice",
    "shoelaces",
    "backoff_tree",
    "override_example",
    "phi_cycle",
    "FAMILIES",
]


def _symbol_names(n):
    width = max(2, len(str(max(n - 1, 0))))
    return [f"s{i:0{width}d}" for i in range(n)]


def random_automaton(
    n_states: int,
    n_symbols: int,
    density: float,
    phi_prob: float = 0.3,
    seed: int = 0,
    semiring: Semiring = REAL,
    weighted_phi: bool = False,
    deterministic: bool = True,
) -> Automaton:
    """Arcs and failure arcs always point from a lower to a higher state id.

    Each state carries each symbol independently with probability
    ``density``, so the expected out-symbol fraction is ``density`` for
    every state that has a successor.
    """
    if n_states < 1 or n_symbols < 1:
        raise ValueError("need at least one state and one symbol")
    if not 0.0 <= density <= 1.0 or not 0.0 <= phi_prob <= 1.0:
        raise ValueError("density and phi_prob must lie in [0, 1]")
    rng = random.Random(seed)
    arcs, phi = [], []
    for q in range(n_states - 1):
        for sym in range(n_symbols):
            if rng.random() >= density:
                continue
            dsts = {rng.randrange(q + 1, n_states)}
            if not deterministic:
                while rng.random() < 0.3:
                    dsts.add(rng.randrange(q + 1, n_states))
            for d in sorted(dsts):
                arcs.append((q, sym, d, semiring.random(rng)))
        if rng.random() < phi_prob:
            w = semiring.random(rng) if weighted_phi else semiring.one
            phi.append((q, rng.randrange(q + 1, n_states), w))
    init = {0: semiring.random(rng)}
    final = {n_states - 1: semiring.random(rng)}
    for q in range(1, n_states):
        if rng.random() < 0.3:
            init[q] = semiring.random(rng)
    for q in range(n_states - 1):
        if rng.random() < 0.5:
            final[q] = semiring.random(rng)
    return Automaton.build(
        semiring,
        n_states,
        arcs=arcs,
        phi=phi,
        init=init,
        final=final,
        n_symbols=n_symbols,
        symbol_names=_symbol_names(n_symbols),
    )


def vocrf_lattice(
    length: int,
    contexts: int,
    n_symbols: int,
    density: float = 0.3,
    seed: int = 0,
    semiring: Semiring = REAL,
    weighted_phi: bool = False,
) -> Automaton:
    """A layered lattice whose failure trees live inside single layers.

    Layer ``t`` holds ``contexts`` states forming a random backoff tree;
    ordinary arcs only go from layer ``t`` to layer ``t + 1``, so no
    ordinary path joins two states of the same failure tree.  A last
    single-state layer collects the final weight.
    """
    rng = random.Random(seed)
    n_states = length * contexts + 1
    sink = n_states - 1
    arcs, phi = [], []
    for t in range(length):
        base = t * contexts
        for i in range(1, contexts):
            w = semiring.random(rng) if weighted_phi else semiring.one
            phi.append((base + i, base + rng.randrange(i), w))
        for i in range(contexts):
            q = base + i
            # the backoff root is complete so every symbol has a home
            syms = [a for a in range(n_symbols) if i == 0 or rng.random() < density]
            for a in syms:
                if t + 1 == length:
                    d = sink
                else:
                    d = (t + 1) * contexts + rng.randrange(contexts)
                arcs.append((q, a, d, semiring.random(rng)))
    return Automaton.build(
        semiring,
        n_states,
        arcs=arcs,
        phi=phi,
        init={contexts - 1: semiring.one},
        final={sink: semiring.one},
        n_symbols=n_symbols,
        symbol_names=_symbol_names(n_symbols),
    )


def shoelaces(n: int, semiring: Semiring = REAL, weight=None) -> Automaton:
    """Two interleaved failure chains that force alternating traversal.

    States are named 1..n.  Arcs ``k -a-> k-1`` for k ≥ 3 and failure arcs
    2→1, 3→1 and k→k-2 for k ≥ 4 admit only the order 1, 2, 3, ...
    """
    if n < 2:
        raise ValueError("shoelaces needs at least two states")
    w = semiring.parse("0.5") if weight is None and semiring is REAL else weight
    w = semiring.one if w is None else w
    arcs = [(k - 1, 0, k - 2, w) for k in range(3, n + 1)]
    phi = [(1, 0)] + ([(2, 0)] if n >= 3 else [])
    phi += [(k - 1, k - 3) for k in range(4, n + 1)]
    return Automaton.build(
        semiring,
        n,
        arcs=arcs,
        phi=phi,
        init={n - 1: semiring.one},
        final={0: semiring.one, 1: semiring.one},
        n_symbols=1,
        state_names=[str(k) for k in range(1, n + 1)],
        symbol_names=["a"],
    )


def backoff_tree(semiring: Semiring = REAL, weight=None, init=None, final=None) -> Automaton:
    """The eight-state example with one failure tree rooted at state 4.

    ``init`` and ``final`` map state *names* (1..8) to weights.
    """
    w = semiring.one if weight is None else weight
    ids = {str(k): k - 1 for k in range(1, 9)}
    arcs = [("2", "a", "3"), ("4", "a", "6"), ("4", "b", "5"), ("7", "b", "8")]
    sym = {"a": 0, "b": 1}
    return Automaton.build(
        semiring,
        8,
        arcs=[(ids[s], sym[y], ids[d], w) for s, y, d in arcs],
        phi=[(ids["1"], ids["2"]), (ids["2"], ids["4"]), (ids["7"], ids["4"])],
        init={ids[k]: v for k, v in (init or {"7": semiring.one}).items()},
        final={ids[k]: v for k, v in (final or {"6": semiring.one}).items()},
        n_symbols=2,
        state_names=list(ids),
        symbol_names=["a", "b"],
    )


def override_example(semiring: Semiring = REAL) -> Automaton:
    """q overrides a and b of its fallback; c is inherited."""
    names = ["q", "qphi", "q1", "q2", "q3", "q4"]
    w = semiring.parse
    arcs = [
        (0, 0, 2, w("0.1")),
        (0, 0, 3, w("0.2")),
        (0, 1, 3, w("0.3")),
        (1, 2, 4, w("0.4")),
        (1, 1, 5, w("0.5")),
    ]
    return Automaton.build(
        semiring,
        6,
        arcs=arcs,
        phi=[(0, 1)],
        init={0: semiring.one},
        final={q: semiring.one for q in range(2, 6)},
        n_symbols=3,
        state_names=names,
        symbol_names=["a", "b", "c"],
    )


def phi_cycle(semiring: Semiring = REAL, check: bool = True) -> Automaton:
    """Ordinary plus failure arcs form a cycle although the expansion would not."""
    one = semiring.one
    return Automaton.build(
        semiring,
        3,
        arcs=[(0, 0, 1, one), (0, 1, 2, one), (1, 0, 2, one)],
        phi=[(1, 0)],
        init={0: one},
        final={2: one},
        n_symbols=2,
        state_names=["1", "2", "3"],
        symbol_names=["a", "b"],
        check=check,
    )


FAMILIES = ("random", "lattice", "shoelaces")
