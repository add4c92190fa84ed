import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crncert.contraction import (NotConvex, certify_nonexpansive, empirical_rate, mu_1, mu_inf,
                                 trajectory_pair_test, variational_check)
from crncert.kinetics import KineticsSpec, random_kinetics
from crncert.pwlr import synthesize

matrices = st.integers(1, 4).flatmap(lambda n: st.lists(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n), min_size=n, max_size=n))


def limit_definition(A, norm_ord):
    h = 1e-7
    I = np.eye(len(A))
    return (np.linalg.norm(I + h * A, norm_ord) - 1.0) / h


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_mu_matches_limit_definition(rows):
    A = np.array(rows)
    assert mu_inf(A) == pytest.approx(limit_definition(A, np.inf), abs=1e-5)
    assert mu_1(A) == pytest.approx(limit_definition(A, 1), abs=1e-5)


@settings(max_examples=100, deadline=None)
@given(matrices, st.floats(0, 10))
def test_mu_subadditive_and_homogeneous(rows, c):
    A = np.array(rows)
    B = A[::-1].copy()
    assert mu_inf(A + B) <= mu_inf(A) + mu_inf(B) + 1e-9
    assert mu_inf(c * A) == pytest.approx(c * mu_inf(A), abs=1e-9)
    assert mu_inf(A) <= np.linalg.norm(A, np.inf) + 1e-12


def test_mu_edge_cases():
    assert mu_inf(np.zeros((0, 0))) == 0.0
    with pytest.raises(ValueError):
        mu_inf(np.zeros((2, 3)))


def test_net_rev_nonexpansive(net_rev):
    cert = synthesize(net_rev, convex=True)
    rep = certify_nonexpansive(cert)
    assert rep.passed and rep.mu_per_vertex == (-1.0, -1.0)
    assert rep.to_dict()["max"] == -1.0
    with pytest.raises(NotConvex):
        certify_nonexpansive(synthesize(net_rev))


def test_pair_contraction_rate(net_rev):
    cert = synthesize(net_rev, convex=True)
    kin = KineticsSpec.mass_action([1.0, 1.0])
    res = trajectory_pair_test(net_rev, kin, cert, [2.0, 0.0], [0.5, 1.5], 5.0)
    assert res.passed
    assert empirical_rate(res.t, res.ratio) == pytest.approx(2.0, rel=0.05)


def test_pair_contraction_random_kinetics(enzyme):
    cert = synthesize(enzyme, convex=True)
    rng = np.random.default_rng(5)
    for _ in range(5):
        kin = random_kinetics(enzyme, rng)
        xa = rng.uniform(0.2, 2.0, size=4)
        xb = xa + enzyme.gamma @ rng.uniform(-0.1, 0.1, size=4)
        if (xb <= 0).any():
            continue
        assert trajectory_pair_test(enzyme, kin, cert, xa, xb, 5.0).passed


def test_pair_rejects_bad_inputs(net_rev):
    cert = synthesize(net_rev, convex=True)
    kin = KineticsSpec.mass_action([1.0, 1.0])
    with pytest.raises(ValueError):
        trajectory_pair_test(net_rev, kin, cert, [2.0, 0.0], [1.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        trajectory_pair_test(net_rev, kin, cert, [1.0, 1.0], [1.0, 1.0], 1.0)


def test_variational_check(net_rev, enzyme):
    kin = KineticsSpec.mass_action([1.0, 1.0])
    res = variational_check(net_rev, kin, synthesize(net_rev, convex=True), [2.0, 0.0], [1.0, 0.0], 3.0)
    assert res.passed
    assert res.values[-1] == pytest.approx(np.exp(-2 * 3.0), rel=1e-5)
    rng = np.random.default_rng(6)
    cert = synthesize(enzyme, convex=True)
    res = variational_check(enzyme, random_kinetics(enzyme, rng), cert, [1.0, 1.0, 0.5, 0.5],
                            rng.standard_normal(4), 5.0)
    assert res.passed


def test_empirical_rate_degenerate():
    assert np.isnan(empirical_rate([0.0, 1.0], [1.0, 0.0]))
