import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy

from corpus import NAMED, random_reversible
from crncert.network import parse_network, rank_one_decomposition
from crncert.simulate import Equilibrium
from crncert.structural import (CERTIFIED_GS, MULTIPLE_IMPOSSIBLE, NO_OBSTRUCTION, NOT_GS,
                                NUMERIC_WITNESS, PERSISTENT, UNIQUE, UNKNOWN, CapabilityBound,
                                enumerate_siphons, gsn_obstruction, is_critical_set, is_siphon,
                                p0_check, persistence_verdict, uniqueness_verdict)

WITNESS = Equilibrium(np.ones(2), 0.0, True, 1.0, True)


def brute_siphons(net):
    out = []
    for size in range(1, net.n + 1):
        for P in itertools.combinations(range(net.n), size):
            P = set(P)
            ok = all(not (P & set(np.nonzero(net.beta[:, j])[0])) or (P & set(np.nonzero(net.alpha[:, j])[0]))
                     for j in range(net.nu))
            if ok:
                out.append(frozenset(P))
    return out


@pytest.mark.parametrize("name", sorted(NAMED))
def test_siphons_match_brute_force(name):
    net = parse_network(NAMED[name])
    found = enumerate_siphons(net)
    assert {s.species for s in found} == set(brute_siphons(net))
    minimal = {s.species for s in enumerate_siphons(net, minimal_only=True)}
    assert minimal == {P for P in minimal if not any(Q < P for Q in brute_siphons(net))}


def test_random_siphons_match_brute_force():
    rng = np.random.default_rng(8)
    for _ in range(25):
        net = random_reversible(rng, n_max=5)
        assert {s.species for s in enumerate_siphons(net)} == set(brute_siphons(net))
        for s in enumerate_siphons(net):
            assert is_siphon(net, s.species)


def test_net_siphon_critical_deadlock(net_siphon):
    found = enumerate_siphons(net_siphon)
    (s,) = [s for s in found if s.species == frozenset({1})]
    assert s.is_deadlock and s.is_critical and s.is_minimal
    assert s.names(net_siphon) == ["X2"]
    v = gsn_obstruction(net_siphon)
    assert v.verdict == NOT_GS and v.rule == "critical-deadlock"


def test_critical_sets(enzyme):
    # {E, ES} carries the enzyme conservation law, so it is not critical
    assert not is_critical_set(enzyme, {0, 2})
    assert is_critical_set(enzyme, {1})


def test_no_obstruction(net_rev, enzyme):
    assert gsn_obstruction(net_rev).verdict == NO_OBSTRUCTION
    assert gsn_obstruction(enzyme).rule == "no-critical-siphon"


def test_critical_siphon_conservative_rules():
    one_d = parse_network("R1: C + D -> A + C\nR2: A + C -> C + D\nR3: B -> C + D\n")
    v = gsn_obstruction(one_d)
    assert v.verdict == NOT_GS and v.rule == "critical-siphon-conservative-1d-kernel"
    two_d = parse_network("R1: A + B -> 2 B\nR2: B -> A\nR3: A -> C\nR4: C -> A\n")
    assert gsn_obstruction(parse_network("R1: A + B -> 2 B\nR2: B -> A\nR3: A -> C\n")).rule \
        == "critical-deadlock"
    v = gsn_obstruction(two_d)
    assert v.verdict == NO_OBSTRUCTION and v.rule == "critical-siphon-undecided"
    w = Equilibrium(np.ones(3), 0.0, True, 1.0, True)
    v = gsn_obstruction(two_d, equilibrium_witness=w)
    assert v.verdict == NOT_GS and v.rigor == NUMERIC_WITNESS
    assert v.rule == "critical-siphon-isolated-equilibrium"


def sympy_p0_coefficients(net):
    """Principal minors of -Gamma dR/dx as polynomials in the vertex variables."""
    verts = rank_one_decomposition(net).entries
    rho = sympy.symbols(f"r0:{len(verts)}", positive=True)
    J = sympy.zeros(net.nu, net.n)
    for r, v in zip(rho, verts):
        J[v.reaction, v.species] += r
    M = -sympy.Matrix(net.gamma.tolist()) * J
    out = {}
    for size in range(1, net.n + 1):
        for I in itertools.combinations(range(net.n), size):
            poly = sympy.Poly(sympy.expand(M.extract(list(I), list(I)).det()), *rho)
            for monom, c in poly.terms():
                mono = tuple(sorted(ell for ell, e in enumerate(monom) for _ in range(e)))
                out[(I, mono)] = Fraction(int(c))
    return out


@pytest.mark.parametrize("name", ["net_rev", "net_siphon", "enzyme", "chain"])
def test_p0_exact_matches_sympy(name):
    net = parse_network(NAMED[name])
    ours = {k: v for k, v in p0_check(net).coefficients.items() if v != 0}
    assert ours == {k: v for k, v in sympy_p0_coefficients(net).items() if v != 0}


def test_p0_net_rev(net_rev):
    rep = p0_check(net_rev)
    assert rep.is_p0
    assert rep.coefficients[((0,), (0,))] == 1
    assert rep.coefficients[((1,), (1,))] == 1
    assert rep.coefficients.get(((0, 1), ()), 0) == 0


def test_p0_net_siphon_witness(net_siphon):
    rep = p0_check(net_siphon)
    assert not rep.is_p0
    assert rep.witness == ((1,), (1,), -1)
    d = rep.to_dict()
    assert d["witness"] == {"I": [2], "monomial": [2], "coefficient": "-1"}


@pytest.mark.parametrize("name", sorted(NAMED))
def test_p0_sampled_agrees_with_exact(name):
    net = parse_network(NAMED[name])
    assert p0_check(net, "sampled", samples=300).is_p0 == p0_check(net).is_p0


def test_p0_bounds():
    big = parse_network("\n".join(f"R{i}: X{i} -> X{i + 1}" for i in range(9)))
    with pytest.raises(CapabilityBound):
        p0_check(big)
    with pytest.raises(ValueError):
        p0_check(big, mode="guess")


def test_persistence_rules(net_rev, net_siphon, inflow, enzyme):
    assert persistence_verdict(net_rev, CERTIFIED_GS).verdict == PERSISTENT
    assert persistence_verdict(net_rev, CERTIFIED_GS).rule == "conservative-gs-1d-kernel"
    assert persistence_verdict(net_siphon, NOT_GS).verdict == NOT_GS
    v = persistence_verdict(inflow, CERTIFIED_GS)
    assert v.verdict == UNKNOWN and v.rule == "not-conservative"
    # dropping either reverse reaction of the enzyme leaves no positive flux
    assert persistence_verdict(enzyme, CERTIFIED_GS).rule == "no-rule-applies"
    assert persistence_verdict(enzyme, CERTIFIED_GS, WITNESS).rule == "isolated-positive-equilibrium"
    cycle = parse_network("R1: A -> B\nR2: B -> C\nR3: C -> A\nR4: B -> A\n")
    v = persistence_verdict(cycle, CERTIFIED_GS)
    assert v.verdict == PERSISTENT and v.rule == "reduced-network-1d-kernel-gs"
    assert v.details["removed"] == ["R4"]
    assert persistence_verdict(net_rev, "maybe").rule == "not-certified"


def test_uniqueness(net_rev, net_siphon):
    assert uniqueness_verdict(net_rev, p0_check(net_rev)).verdict == MULTIPLE_IMPOSSIBLE
    assert uniqueness_verdict(net_rev, p0_check(net_rev), equilibrium_witness=WITNESS).verdict == UNIQUE
    assert uniqueness_verdict(net_siphon, p0_check(net_siphon)).verdict == UNKNOWN
    assert uniqueness_verdict(net_rev, p0_check(net_rev), gsn_status=NOT_GS).rule == "not-certified"
