import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import NAMED
from crncert.exact import ExactMatrix
from crncert.kinetics import LAWS, KineticsSpec, random_kinetics
from crncert.network import parse_network
from crncert.partition import build_partition
from crncert.pwlr import PWLRCertificate, synthesize
from crncert.simulate import (IntegrationError, find_equilibrium, integrate, integrate_extent,
                              invariant_report, lyapunov_trace, reduced_jacobian, trajectory_csv)

UNIT = KineticsSpec.mass_action([1.0, 1.0])


def closed_form(t):
    e = np.exp(-2.0 * np.asarray(t))
    return np.column_stack([1 + e, 1 - e])


def test_closed_form(net_rev):
    traj = integrate(net_rev, UNIT, [2.0, 0.0], 5.0, tol=1e-10, atol=1e-12)
    assert traj.t[0] == 0.0 and traj.t[-1] == 5.0
    assert len(traj) >= 64
    assert np.max(np.abs(traj.x - closed_form(traj.t))) < 1e-9


def test_t_eval_grid(net_rev):
    grid = np.linspace(0.5, 5.0, 10)
    traj = integrate(net_rev, UNIT, [2.0, 0.0], 5.0, tol=1e-10, t_eval=grid)
    assert np.allclose(traj.t, np.concatenate([[0.0], grid]))
    assert np.max(np.abs(traj.x - closed_form(traj.t))) < 1e-8
    with pytest.raises(ValueError):
        integrate(net_rev, UNIT, [2.0, 0.0], 5.0, t_eval=[2.0, 1.0])


def test_fixed_step_fifth_order(net_rev):
    # with the error test disabled the step is pinned at max_step
    errs = []
    for steps in (64, 128):
        traj = integrate(net_rev, UNIT, [2.0, 0.0], 5.0, tol=1e6, atol=1e6, max_step=5.0 / steps)
        errs.append(np.max(np.abs(traj.final - closed_form([5.0])[0])))
    assert errs[0] / errs[1] > 20.0


def test_equilibria_are_fixed_points(net_rev):
    for x0 in ([1.0, 1.0], [0.0, 0.0]):
        traj = integrate(net_rev, UNIT, x0, 3.0)
        assert np.allclose(traj.x, x0, atol=1e-14)


def test_bad_inputs(net_rev):
    with pytest.raises(ValueError):
        integrate(net_rev, UNIT, [-1.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        integrate(net_rev, UNIT, [1.0], 1.0)
    with pytest.raises(ValueError):
        integrate(net_rev, UNIT, [1.0, 0.0], 0.0)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(NAMED)), st.sampled_from(LAWS), st.integers(0, 2 ** 31))
def test_invariants_hold(name, law, seed):
    net = parse_network(NAMED[name])
    rng = np.random.default_rng(seed)
    kin = random_kinetics(net, rng, law)
    x0 = rng.uniform(0.0, 2.0, size=net.n)
    traj = integrate(net, kin, x0, 5.0, tol=1e-9)
    rep = invariant_report(net, traj)
    assert rep["min_value"] >= -1e-10
    assert rep["conservation_drift"] <= 1e-9


def test_species_and_extent_paths_agree(enzyme):
    rng = np.random.default_rng(2)
    kin = random_kinetics(enzyme, rng)
    x0 = np.array([1.0, 2.0, 0.5, 0.1])
    grid = np.linspace(0.1, 4.0, 40)
    a = integrate(enzyme, kin, x0, 4.0, tol=1e-11, atol=1e-13, t_eval=grid)
    b = integrate_extent(enzyme, kin, x0, np.zeros(enzyme.nu), 4.0, tol=1e-11, atol=1e-13, t_eval=grid)
    assert np.max(np.abs(a.x - b.x)) < 1e-8
    assert np.allclose(b.x, x0 + b.y @ enzyme.gamma.T.astype(float))


def test_lyapunov_decrease_on_certified(enzyme):
    cert = synthesize(enzyme)
    rng = np.random.default_rng(3)
    for law in LAWS:
        kin = random_kinetics(enzyme, rng, law)
        traj = integrate(enzyme, kin, rng.uniform(0.1, 2.0, size=4), 10.0, tol=1e-10, atol=1e-12)
        assert lyapunov_trace(cert, traj, kin).passed


def test_adversarial_siphon_candidate_increases(net_siphon):
    # C = [-1, 1] has the right kernel but fails the multiplier test; some trajectory shows it
    part = build_partition(net_siphon.gamma_exact)
    fake = PWLRCertificate(net_siphon, part, ExactMatrix([[-1, 1]]), False, ())
    rng = np.random.default_rng(4)
    worst = -np.inf
    for _ in range(50):
        kin = random_kinetics(net_siphon, rng)
        traj = integrate(net_siphon, kin, rng.uniform(0.05, 3.0, size=2), 5.0, tol=1e-10)
        tr = lyapunov_trace(fake, traj, kin)
        worst = max(worst, tr.max_increase - tr.tolerance)
    assert worst > 0


def test_find_equilibrium(net_rev, net_siphon):
    eq = find_equilibrium(net_rev, UNIT, [2.0, 0.0])
    assert np.allclose(eq.x, [1.0, 1.0], atol=1e-9)
    assert eq.positive and eq.reduced_jacobian_nonsingular
    assert eq.sigma_min == pytest.approx(2.0)
    eq = find_equilibrium(net_siphon, UNIT, [0.5, 0.3])
    assert np.allclose(eq.x, [0.8, 0.0], atol=1e-8)
    assert not eq.positive


def test_reduced_jacobian_eigenvalue(net_rev):
    J = reduced_jacobian(net_rev, UNIT, [1.0, 1.0])
    assert J.shape == (1, 1) and J[0, 0] == pytest.approx(-2.0)


def test_csv(net_rev):
    traj = integrate(net_rev, UNIT, [2.0, 0.0], 1.0)
    text = trajectory_csv(net_rev, traj, V=np.zeros(len(traj)))
    lines = text.strip().splitlines()
    assert lines[0] == "t,X1,X2,V"
    assert len(lines) == len(traj) + 1
    assert [float(v) for v in lines[1].split(",")] == [0.0, 2.0, 0.0, 0.0]


def test_step_budget(net_rev):
    from crncert import simulate
    with pytest.raises(IntegrationError):
        simulate._solve(np.zeros(2), np.eye(2), net_rev.gamma.astype(float), UNIT.kernel_arrays(net_rev),
                        np.array([2.0, 0.0]), 5.0, 1e-8, 1e-8, max_steps=5)
