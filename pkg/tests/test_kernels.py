"""The compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from crncert import _kernels
from crncert._kernels import _fallback
from crncert.kinetics import LAWS, random_kinetics
from crncert.network import parse_network

core = pytest.importorskip("crncert._kernels._core")

NET = parse_network("R1: 2 A + B -> C\nR2: C -> 2 A + B\nR3: C -> D\nR4: D -> A\n")


@pytest.mark.parametrize("law", LAWS)
def test_rates_and_jacobian_parity(law):
    rng = np.random.default_rng(0)
    for _ in range(20):
        arrs = random_kinetics(NET, rng, law).kernel_arrays(NET)
        x = rng.uniform(0.0, 3.0, size=NET.n)
        assert np.allclose(core.eval_rates(x, *arrs), _fallback.eval_rates(x, *arrs), rtol=1e-13)
        assert np.allclose(core.eval_jacobian(x, *arrs), _fallback.eval_jacobian(x, *arrs), rtol=1e-13)


def _advance(mod, law, q=0):
    rng = np.random.default_rng(1)
    arrs = random_kinetics(NET, rng, law).kernel_arrays(NET)
    G = NET.gamma.astype(float)
    d = NET.nu
    z = np.concatenate([np.zeros(d), np.eye(d)[:, :q].ravel()]) if q else np.zeros(d)
    out_t = np.empty(4096)
    out_z = np.empty((4096, z.size))
    res = mod.rk45_advance(np.array([1.0, 0.5, 0.2, 0.1]), G, np.eye(d), *arrs, q, z, 0.0, 3.0,
                           1e-3, 0.05, 1e-9, 1e-11, 1e-10, out_t, out_z, 10 ** 6)
    n = res[2]
    return res, out_t[:n], out_z[:n]


@pytest.mark.parametrize("law", LAWS)
@pytest.mark.parametrize("q", [0, 2])
def test_rk45_parity(law, q):
    rc, tc, zc = _advance(core, law, q)
    rf, tf, zf = _advance(_fallback, law, q)
    assert rc[2:] == rf[2:]
    # summation order differs and the error estimate cancels, so step sizes
    # drift apart slightly; agreement is at the level of the step tolerance
    assert np.allclose(tc, tf, rtol=1e-5)
    assert np.allclose(zc, zf, rtol=1e-5, atol=1e-8)


def test_simplex_parity():
    rng = np.random.default_rng(2)
    for _ in range(30):
        m, n = 3, 6
        A = rng.integers(-3, 4, size=(m, n)).astype(float)
        b = np.abs(rng.integers(0, 5, size=m)).astype(float)
        c = rng.integers(-3, 4, size=n).astype(float)
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n:n + m] = np.eye(m)
        T[:m, -1] = b
        T[m, :n] = c
        basis = np.arange(n, n + m, dtype=np.int64)
        T1, b1 = T.copy(), basis.copy()
        T2, b2 = T.copy(), basis.copy()
        assert core.bland_simplex(T1, b1, n + m, 1e-10, 1000) == _fallback.bland_simplex(T2, b2, n + m, 1e-10, 1000)
        assert np.allclose(T1, T2) and np.array_equal(b1, b2)


def test_siphon_mask_parity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = 6
        ins = rng.integers(0, 1 << n, size=5).astype(np.uint64)
        outs = rng.integers(0, 1 << n, size=5).astype(np.uint64)
        assert np.array_equal(np.sort(core.siphon_masks(ins, outs, n)),
                              np.sort(_fallback.siphon_masks(ins, outs, n)))


def test_default_backend_is_compiled():
    assert _kernels.BACKEND == "cython"


def test_env_var_forces_fallback():
    env = dict(os.environ, CRNCERT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import crncert; print(crncert.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
