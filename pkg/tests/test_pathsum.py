import math
import random

import pytest

from phisum.aggregator import FenwickAggregator
from phisum.automaton import Automaton, build_failure_forest, compute_stats, failure_expand
from phisum.errors import CapabilityError, PathBudgetExceeded
from phisum.generate import backoff_tree, override_example, random_automaton, shoelaces, vocrf_lattice
from phisum.pathsum import (
    ALGORITHMS,
    brute_force_pathsum,
    expand_backward,
    general_backward,
    memoization_backward,
    pathsum,
    ring_backward,
)
from phisum.semiring import BOOLEAN, COUNT, LOG, REAL, SEMIRINGS, TROPICAL_MIN
from phisum.splitting import SplitPolicy
from phisum.toposort import make_order

from conftest import same


def sid(a, name):
    return a.state_names.index(name)


def applicable(sr):
    return [alg for alg in ALGORITHMS if alg != "ring" or sr.is_ring]


# -- brute force -------------------------------------------------------------------------


def test_brute_single_state():
    a = Automaton.build(REAL, 1, init={0: 1.0}, final={0: 1.0})
    assert brute_force_pathsum(a).Z == 1.0


def test_brute_backoff_tree():
    assert brute_force_pathsum(backoff_tree(REAL, 0.5)).Z == 0.5
    a = backoff_tree(REAL, 0.5, init={"1": 1.0})
    assert brute_force_pathsum(a).Z == 0.0


def test_brute_budget():
    # a ladder with two arcs per step doubles the path count each layer
    n = 25
    arcs = [(q, s, q + 1, 1.0) for q in range(n - 1) for s in (0, 1)]
    a = Automaton.build(REAL, n, arcs=arcs, init={0: 1.0}, final={n - 1: 1.0})
    with pytest.raises(PathBudgetExceeded):
        brute_force_pathsum(a, budget=10_000)


def test_empty_automaton_is_zero(semiring):
    a = Automaton.build(semiring, 0)
    for alg in applicable(semiring):
        assert pathsum(a, alg).Z == semiring.zero


# -- the worked example ------------------------------------------------------------------


def test_override_example_all_algorithms():
    a = override_example()
    q, qphi = sid(a, "q"), sid(a, "qphi")
    order = make_order(a, "kahn")
    for rep in (
        expand_backward(a, order),
        memoization_backward(a, order),
        ring_backward(a, order),
        general_backward(a, order),
    ):
        assert math.isclose(rep.beta[q], 1.0, abs_tol=1e-12), rep.algorithm
        assert math.isclose(rep.beta[qphi], 0.9, abs_tol=1e-12)


def test_override_failure_terms():
    a = override_example()
    q, qphi = sid(a, "q"), sid(a, "qphi")
    c = a.symbol_names.index("c")
    order = make_order(a, "kahn")
    memo = memoization_backward(a, order)
    assert memo.extras["memo"][q][c] == 0.4
    assert memo.extras["failure_copies_per_state"][q] == 1
    ring = ring_backward(a, order)
    assert math.isclose(ring.extras["beta_sigma"][qphi], 0.9)
    assert expand_backward(a, order)["expanded_arcs"] == 1


def test_override_aggregator_trace():
    a = override_example()
    seen = {}

    def trace(event, q, g):
        if event == "state":
            seen[a.state_names[q]] = {a.symbol_names[k]: v for k, v in g.items()}

    general_backward(a, make_order(a, "kahn"), aggregator="fenwick", trace=trace)
    assert seen["qphi"] == {"b": 0.5, "c": 0.4}
    assert seen["q"]["b"] == 0.3 and seen["q"]["c"] == 0.4
    assert math.isclose(seen["q"]["a"], 0.3)


def test_chain_expand():
    a = Automaton.build(REAL, 2, arcs=[(0, 0, 1, 0.5)], init={0: 1.0}, final={1: 1.0})
    assert expand_backward(a, make_order(a, "kahn")).Z == 0.5


# -- agreement --------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(SEMIRINGS))
def test_all_algorithms_agree_with_brute(name):
    sr = SEMIRINGS[name]
    for seed in range(40):
        a = random_automaton(1 + seed % 10, 1 + seed % 4, 0.5, (0, 0.3, 0.7)[seed % 3], seed, sr,
                             weighted_phi=seed % 2 == 1, deterministic=seed % 4 != 3)
        ref = brute_force_pathsum(a).Z
        for alg in applicable(sr)[1:]:
            for order in ("kahn", "greedy"):
                assert same(sr, pathsum(a, alg, order).Z, ref), (seed, alg, order)


@pytest.mark.parametrize("kind", ["fenwick", "ring", "division"])
def test_every_aggregator_gives_the_same_z(kind):
    for seed in range(30):
        a = random_automaton(9, 3, 0.5, 0.7, seed, REAL, weighted_phi=seed % 2 == 0)
        ref = brute_force_pathsum(a).Z
        for split in ("none", "dynamic", "static"):
            z = pathsum(a, "general", "kahn", split, aggregator=kind).Z
            assert same(REAL, z, ref)


def test_weighted_fixture_memo_matches_brute():
    a = backoff_tree(REAL, 0.5).replace(phi_weight=[0.5, 0.25, 1.0, 1.0, 1.0, 1.0, 0.75, 1.0])
    assert a.weighted_phi
    ea = failure_expand(a)
    assert same(REAL, pathsum(a, "memo").Z, brute_force_pathsum(ea).Z)
    # 7 backs off to 4 at weight 0.75, then a to 6 at 0.5
    assert pathsum(a, "memo").Z == 0.75 * 0.5


def test_weighted_count_semiring_exact():
    for seed in range(40):
        a = random_automaton(8, 3, 0.5, 0.8, seed, COUNT, weighted_phi=True)
        ref = brute_force_pathsum(a).Z
        for alg in ("expand", "memo", "ring", "general"):
            assert pathsum(a, alg).Z == ref


# -- identities ----------------------------------------------------------------------


def test_decomposition_identity():
    for seed in range(30):
        a = random_automaton(9, 4, 0.4, 0.7, seed, COUNT, weighted_phi=True)
        rep = memoization_backward(a, make_order(a, "kahn"))
        ring = ring_backward(a, make_order(a, "kahn"))
        memo = rep.extras["memo"]
        for q in range(a.n_states):
            own = set(a.sigma(q))
            local = sum(v for s, v in memo[q].items() if s in own)
            fail = sum(v for s, v in memo[q].items() if s not in own)
            assert sum(memo[q].values()) == local + fail
            assert ring.extras["beta_sigma"][q] == local + fail
            assert rep.beta[q] == a.final[q] + local + fail


def test_subtraction_identity():
    for seed in range(30):
        a = random_automaton(9, 4, 0.4, 0.7, seed, COUNT, weighted_phi=True)
        order = make_order(a, "kahn")
        memo = memoization_backward(a, order).extras["memo"]
        ring = ring_backward(a, order)
        bs = ring.extras["beta_sigma"]
        for q in range(a.n_states):
            f = a.fallback[q]
            if f < 0:
                continue
            own = set(a.sigma(q))
            lhs = sum(v for s, v in memo[q].items() if s not in own)
            overridden = sum(memo[f].get(s, 0) for s in own)
            assert lhs == a.phi_weight[q] * (bs[f] - overridden)


def test_visit_leave_round_trip():
    # after Leave, the aggregator represents the fallback again
    for seed in range(20):
        a = random_automaton(10, 4, 0.4, 0.8, seed, REAL, weighted_phi=seed % 2 == 0)
        memo = memoization_backward(a, make_order(a, "kahn")).extras["memo"]
        snapshots = {}
        checks = []

        def trace(event, q, g):
            if event == "state":
                snapshots[q] = dict(g.items())
            elif event == "leave":
                checks.append((a.fallback[q], dict(g.items())))

        general_backward(a, make_order(a, "kahn"), aggregator="fenwick", trace=trace)
        for q, items in snapshots.items():
            for s in range(a.n_symbols):
                assert same(REAL, items.get(s, 0.0), memo[q].get(s, 0.0))
        for f, items in checks:
            for s in range(a.n_symbols):
                assert same(REAL, items.get(s, 0.0), memo[f].get(s, 0.0))


# -- counters ------------------------------------------------------------------------


def test_memo_copy_counts():
    for seed in range(30):
        a = random_automaton(10, 4, 0.3, 0.7, seed)
        st = compute_stats(a)
        rep = memoization_backward(a, make_order(a, "kahn"))
        for q in range(a.n_states):
            assert rep.extras["failure_copies_per_state"][q] == st.sigma_bar_sizes[q] - st.sigma_sizes[q]


def test_expand_arc_count():
    for seed in range(30):
        a = random_automaton(10, 4, 0.3, 0.7, seed, deterministic=False)
        rep = expand_backward(a, make_order(a, "kahn"))
        assert rep["expanded_arcs"] == failure_expand(a).n_arcs - a.n_arcs


def test_ring_beta_qa_bound():
    for seed in range(60):
        a = random_automaton(12, 5, 0.3, 0.7, seed, COUNT, deterministic=seed % 2 == 0)
        rep = ring_backward(a)
        assert rep["beta_qa"] <= a.n_arcs + compute_stats(a).sigma_hat_total


def test_ring_without_phi_matches_expand():
    a = random_automaton(12, 4, 0.5, 0.0, seed=8, semiring=COUNT)
    order = make_order(a, "kahn")
    r = ring_backward(a, order)
    assert r["ominus"] == 0
    assert r.beta == expand_backward(a, order).beta


def test_lattice_visits_once():
    for seed in range(10):
        a = vocrf_lattice(4, 6, 5, 0.3, seed)
        rep = pathsum(a, "general", "greedy")
        assert rep.compatible
        f = build_failure_forest(a)
        in_trees = sum(1 for q in range(a.n_states) if not f.is_singleton(q))
        assert rep["visits"] == in_trees
        assert rep["leaves"] == 0 or rep["leaves"] < in_trees


def test_shoelaces_needs_two_visits_for_state_five():
    a = shoelaces(8)
    per_state = {}
    current = []

    def trace(event, q, g):
        if event == "visit":
            current.append(q)
        elif event == "state":
            per_state[a.state_names[q]] = len(current)
            current.clear()

    rep = general_backward(a, make_order(a, "kahn"), trace=trace)
    assert per_state["5"] == 2
    assert rep["visits"] > a.n_states


def test_singleton_states_skip_the_aggregator():
    a = random_automaton(10, 3, 0.5, 0.0, seed=1)
    rep = pathsum(a, "general")
    assert rep["visits"] == rep["sets"] == 0


def test_weighted_visit_calls_mult():
    a = random_automaton(10, 3, 0.5, 1.0, seed=3, weighted_phi=True)
    rep = pathsum(a, "general")
    assert rep["mults"] > 0
    assert pathsum(a, "general", weighted_phi=True)["mults"] == rep["mults"]
    assert pathsum(backoff_tree(), "general", weighted_phi=True)["mults"] > 0
    assert pathsum(backoff_tree(), "general")["mults"] == 0


# -- dispatcher ----------------------------------------------------------------------


def test_dispatch_errors():
    with pytest.raises(CapabilityError):
        pathsum(backoff_tree(TROPICAL_MIN), "ring")
    with pytest.raises(CapabilityError):
        ring_backward(backoff_tree(LOG))
    with pytest.raises(ValueError):
        pathsum(backoff_tree(), "nope")
    weighted = random_automaton(6, 2, 0.5, 1.0, seed=1, weighted_phi=True)
    with pytest.raises(ValueError):
        pathsum(weighted, "memo", weighted_phi=False)


def test_report_record():
    rep = pathsum(backoff_tree(REAL, 0.5), "general", "greedy")
    rec = rep.as_record(REAL.format)
    assert rec["Z"] == "0.5" and rec["algorithm"] == "general" and rec["order"] == "greedy"
    assert rec["compatible"] is True
    for key in ("oplus", "otimes", "beta_qa", "visits", "leaves", "sets", "copies", "expanded_arcs"):
        assert isinstance(rec[key], int)
    assert rep["visits"] == rec["visits"]


def test_backoff_tree_cross_algorithm(semiring):
    w = semiring.random(random.Random(1))
    a = backoff_tree(semiring, w)
    zs = {alg: pathsum(a, alg).Z for alg in applicable(semiring)}
    assert all(same(semiring, z, zs["brute"]) for z in zs.values())


def test_splits_preserve_z():
    for seed in range(40):
        sr = (REAL, COUNT, TROPICAL_MIN, BOOLEAN)[seed % 4]
        a = random_automaton(10, 4, 0.4, 0.8, seed, sr, weighted_phi=seed % 3 == 0)
        base = pathsum(a, "general").Z
        for mode in ("dynamic", "static"):
            for pess in (False, True):
                z = pathsum(a, "general", "kahn", SplitPolicy(mode), pessimal=pess).Z
                assert same(sr, z, base)


def test_fenwick_on_real_matches_division():
    a = random_automaton(12, 4, 0.4, 0.8, seed=5, weighted_phi=True)
    z1 = pathsum(a, "general", aggregator="fenwick").Z
    z2 = pathsum(a, "general", aggregator="division").Z
    assert same(REAL, z1, z2)
    assert FenwickAggregator.kind == pathsum(a, "general", aggregator="fenwick").extras["aggregator"]
