import os
import subprocess
import sys

import pytest

from phisum import accel
from phisum.errors import CapabilityError
from phisum.generate import backoff_tree, random_automaton
from phisum.pathsum import brute_force_pathsum, pathsum
from phisum.semiring import COUNT, SEMIRINGS

from conftest import same

BACKENDS = ["numpy"] + (["numba"] if accel.USING_NUMBA else [])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("name", sorted(accel.KINDS))
def test_kernels_match_brute(backend, name):
    sr = SEMIRINGS[name]
    for seed in range(40):
        a = random_automaton(1 + seed % 10, 1 + seed % 4, 0.5, 0.6, seed, sr,
                             weighted_phi=seed % 2 == 0, deterministic=seed % 3 != 0)
        ref = brute_force_pathsum(a).Z
        for alg in ("expand", "memo"):
            assert same(sr, accel.fast_pathsum(a, alg, backend=backend), ref), (seed, alg)


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernels_on_larger_instance(backend):
    a = random_automaton(300, 20, 0.1, 0.7, seed=3, weighted_phi=True)
    ref = pathsum(a, "memo").Z
    for alg in ("expand", "memo"):
        assert same(a.semiring, accel.fast_pathsum(a, alg, "greedy", backend=backend), ref)


def test_unsupported_inputs():
    with pytest.raises(CapabilityError):
        accel.fast_pathsum(backoff_tree(COUNT))
    with pytest.raises(ValueError):
        accel.fast_pathsum(backoff_tree(), "ring", backend="numpy")


def test_csr_layout():
    indptr, sym, dst, w = accel.to_csr(backoff_tree())
    assert list(indptr) == [0, 0, 1, 1, 3, 3, 3, 4, 4]
    assert list(sym) == [0, 0, 1, 1]


def test_env_flag_selects_numpy():
    env = dict(os.environ, PHISUM_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import phisum.accel as m; print(m.USING_NUMBA)"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout
    assert out.strip() == "False"


def test_numba_backend_unavailable(monkeypatch):
    monkeypatch.setattr(accel, "USING_NUMBA", False)
    with pytest.raises(RuntimeError):
        accel.fast_pathsum(backoff_tree(), backend="numba")
