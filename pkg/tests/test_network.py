import numpy as np
import pytest

from crncert.network import (NetworkSyntaxError, check_ag, conservation_analysis,
                             network_from_matrices, parse_network, rank_one_decomposition)


def test_parse_net_rev(net_rev):
    assert net_rev.species == ("X1", "X2")
    assert net_rev.reactions == ("R1", "R2")
    assert net_rev.gamma.tolist() == [[-1, 1], [1, -1]]
    assert net_rev.rank == 1 and net_rev.kernel_dim == 1


def test_parse_coefficients_and_empty_side():
    net = parse_network("# a comment\nA: 2 X + Y -> 0\nB: -> X\n")
    assert net.alpha.tolist() == [[2, 0], [1, 0]]
    assert net.beta.tolist() == [[0, 1], [0, 0]]


@pytest.mark.parametrize("text,line", [
    ("R1 X -> Y\n", 1),
    ("R1: X -> Y\nR1: Y -> X\n", 2),
    ("R1: X -> Y -> Z\n", 1),
    ("R1: -> \n", 1),
    ("R1: X + -Y -> Z\n", 1),
    ("\nR1: 3$ -> Y\n", 2),
])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(NetworkSyntaxError) as err:
        parse_network(text)
    assert err.value.line == line


def test_empty_file():
    with pytest.raises(NetworkSyntaxError):
        parse_network("# nothing\n")


def test_round_trip_text(enzyme):
    again = parse_network(enzyme.to_text())
    assert np.array_equal(again.alpha, enzyme.alpha)
    assert np.array_equal(again.beta, enzyme.beta)


def test_reversible_pairs(enzyme, net_siphon):
    assert enzyme.reversible_pairs() == [(0, 1), (2, 3)]
    assert net_siphon.reversible_pairs() == []


def test_rank_one_decomposition_order(net_siphon):
    dec = rank_one_decomposition(net_siphon)
    assert dec.pairs() == [(0, 0), (1, 0), (1, 1)]
    assert [v.index for v in dec.entries] == [1, 2, 3]
    for v in dec.entries:
        expected = np.zeros((2, 2))
        expected[v.reaction] = net_siphon.gamma[v.species]
        assert np.array_equal(v.matrix, expected)


def test_rank_one_combination_is_reaction_jacobian(enzyme):
    # d/dt R = R'(x) Gamma R and R'(x) Gamma = sum_l rho_l Gamma^l with rho = dR_j/dx_i
    dec = rank_one_decomposition(enzyme)
    rng = np.random.default_rng(1)
    rho = rng.uniform(0.1, 2.0, size=dec.s)
    J = np.zeros((enzyme.nu, enzyme.n))
    for r, (i, j) in zip(rho, dec.pairs()):
        J[j, i] = r
    assert np.allclose(dec.combine(rho), J @ enzyme.gamma)


def test_ag_and_conservation(net_rev, net_siphon, inflow, enzyme):
    assert check_ag(net_rev).holds
    w = check_ag(net_rev).witness
    assert np.allclose(net_rev.gamma @ w, 0) and (w >= 1 - 1e-9).all()
    assert not check_ag(network_from_matrices([[1]], [[0]])).holds
    cons = conservation_analysis(enzyme)
    assert cons.conservative and len(cons.kernel_left_basis) == 2
    for v in cons.integer_basis():
        assert not (np.array(v) @ enzyme.gamma).any()
    assert not conservation_analysis(inflow).conservative


def test_subnetwork(enzyme):
    sub = enzyme.subnetwork([0, 1])
    assert sub.nu == 2 and sub.reactions == ("R1", "R2")


def test_invalid_matrices():
    with pytest.raises(ValueError):
        network_from_matrices([[-1]], [[0]])
    with pytest.raises(ValueError):
        network_from_matrices([[0]], [[0]])
