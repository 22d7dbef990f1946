"""Reverse topological orders over E ∪ E^φ.

A reverse topological order lists every state after all of its
successors, which is the order the backward algorithms consume.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from .automaton import NO_FALLBACK, Automaton, FailureForest, build_failure_forest, find_cycle
from .errors import CycleError

__all__ = [
    "StateOrder",
    "kahn_reverse_topo",
    "greedy_compatible_order",
    "is_compatible",
    "is_reverse_topological",
    "make_order",
]


@dataclass(frozen=True)
class StateOrder:
    states: tuple
    strategy: str
    claims_compatible: bool = False

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)


def _counts(a: Automaton):
    """Per-state successor-edge counts and predecessor lists."""
    n = a.n_states
    pending = [0] * n
    preds = [[] for _ in range(n)]
    for q in range(n):
        for d in a.successors(q):
            pending[q] += 1
            preds[d].append(q)
    return pending, preds


def _raise_cycle(a: Automaton):
    cycle = find_cycle(a)
    raise CycleError([a.state_names[q] for q in cycle] if cycle else ["?"])


def kahn_reverse_topo(a: Automaton) -> StateOrder:
    """Kahn's algorithm on the reversed graph, lowest state id first."""
    pending, preds = _counts(a)
    ready = [q for q in range(a.n_states) if pending[q] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        q = heapq.heappop(ready)
        out.append(q)
        for p in preds[q]:
            pending[p] -= 1
            if pending[p] == 0:
                heapq.heappush(ready, p)
    if len(out) != a.n_states:
        _raise_cycle(a)
    return StateOrder(tuple(out), "kahn")


def greedy_compatible_order(a: Automaton, forest: FailureForest | None = None) -> StateOrder:
    """Kahn's algorithm with a preference for cheap states.

    A ready state is cheap when its fallback is the state its tree's
    aggregator currently represents, so enumerating it costs a single
    Visit.  Ready states are taken in three tiers: cheap states first, then
    states that do not disturb a tree in progress (singletons and roots of
    trees not yet started), and only then expensive states.  After each
    pop the simulated frontier descends while it has no unenumerated
    φ-children, stopping at the root.
    """
    forest = forest or build_failure_forest(a)
    n = a.n_states
    fallback = a.fallback
    pending, preds = _counts(a)
    kids_left = [len(c) for c in forest.children]
    frontier = {}  # tree id -> represented state
    done = [False] * n
    is_ready = [False] * n

    cheap: list = []
    calm: list = []
    costly: list = []
    ready_kids = [[] for _ in range(n)]  # ready states per fallback

    def on_ready(q):
        is_ready[q] = True
        f = fallback[q]
        if f == NO_FALLBACK:
            heapq.heappush(calm, q)
            return
        heapq.heappush(ready_kids[f], q)
        if frontier.get(forest.tree_id[q]) == f:
            heapq.heappush(cheap, q)
        heapq.heappush(costly, q)

    def move_frontier(t, p):
        frontier[t] = p
        for q in ready_kids[p]:
            if not done[q]:
                heapq.heappush(cheap, q)

    for q in range(n):
        if pending[q] == 0:
            on_ready(q)

    out = []
    while len(out) < n:
        q = None
        while cheap:
            c = heapq.heappop(cheap)
            if not done[c] and frontier.get(forest.tree_id[c]) == fallback[c]:
                q = c
                break
        if q is None:
            while calm:
                c = heapq.heappop(calm)
                if not done[c]:
                    q = c
                    break
        if q is None:
            while costly:
                c = heapq.heappop(costly)
                if not done[c]:
                    q = c
                    break
        if q is None:
            _raise_cycle(a)
        done[q] = True
        out.append(q)
        f = fallback[q]
        if f != NO_FALLBACK:
            kids_left[f] -= 1
        for p in preds[q]:
            pending[p] -= 1
            if pending[p] == 0:
                on_ready(p)
        t = forest.tree_id[q]
        cur = q
        while kids_left[cur] == 0 and fallback[cur] != NO_FALLBACK:
            cur = fallback[cur]
        move_frontier(t, cur)
    return StateOrder(tuple(out), "greedy")


def is_compatible(order, forest: FailureForest) -> bool:
    """True iff each tree's projection of ``order`` is a root-first DFS order."""
    stacks: dict = {}
    seen = set()
    for q in order:
        if q in seen:
            return False
        seen.add(q)
        t = forest.tree_id[q]
        stack = stacks.get(t)
        if stack is None:
            if forest.parent[q] != NO_FALLBACK:
                return False
            stacks[t] = [q]
            continue
        f = forest.parent[q]
        while stack and stack[-1] != f:
            stack.pop()
        if not stack:
            return False
        stack.append(q)
    return True


def is_reverse_topological(order, a: Automaton) -> bool:
    pos = {q: i for i, q in enumerate(order)}
    if len(pos) != a.n_states:
        return False
    return all(pos[d] < pos[q] for q in range(a.n_states) for d in a.successors(q))


def make_order(a: Automaton, strategy, forest: FailureForest | None = None) -> StateOrder:
    """Resolve an order strategy name (or an explicit sequence)."""
    if isinstance(strategy, StateOrder):
        return strategy
    if strategy in (None, "kahn"):
        order = kahn_reverse_topo(a)
    elif strategy == "greedy":
        order = greedy_compatible_order(a, forest)
    elif isinstance(strategy, str):
        raise ValueError(f"unknown order strategy {strategy!r}")
    else:
        order = StateOrder(tuple(strategy), "explicit")
        if not is_reverse_topological(order, a):
            raise ValueError("explicit order is not reverse topological")
    forest = forest or build_failure_forest(a)
    return StateOrder(order.states, order.strategy, is_compatible(order.states, forest))
