"""Structural analysis: siphons, obstructions to PWLR certificates, persistence,
P0 expansion of the Jacobian and uniqueness of equilibria."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels, exact
from .lp import LinearProgram, lp_feasible
from .network import ReactionNetwork, check_ag, conservation_analysis, rank_one_decomposition

log = logging.getLogger(__name__)

MAX_SIPHON_SPECIES = 20
MAX_P0_EXACT = 8
MAX_REVERSIBLE_PAIRS = 10
NUMERIC_WITNESS = "numeric-witness"
EXACT = "exact"


class CapabilityBound(ValueError):
    """Input exceeds the size bound of an exhaustive method."""


@dataclass(frozen=True)
class Siphon:
    species: frozenset[int]
    output_reactions: frozenset[int]
    is_deadlock: bool
    is_critical: bool
    is_minimal: bool

    def names(self, net: ReactionNetwork) -> list[str]:
        return [net.species[i] for i in sorted(self.species)]


def _masks(net: ReactionNetwork):
    ins = np.zeros(net.nu, dtype=np.uint64)
    outs = np.zeros(net.nu, dtype=np.uint64)
    for j in range(net.nu):
        for i in net.products(j):
            ins[j] |= np.uint64(1 << i)
        for i in net.reactants(j):
            outs[j] |= np.uint64(1 << i)
    return ins, outs


def is_siphon(net: ReactionNetwork, P) -> bool:
    """Every reaction producing a species of P also consumes one."""
    P = set(P)
    if not P:
        return False
    for j in range(net.nu):
        if P.intersection(net.products(j)) and not P.intersection(net.reactants(j)):
            return False
    return True


def is_critical_set(net: ReactionNetwork, P) -> bool:
    """No nonzero conservation law w >= 0 is supported inside P."""
    P = set(P)
    lp = LinearProgram(net.n, nonneg=True)
    for j in range(net.nu):
        lp.add_eq(net.gamma[:, j].astype(float), 0.0)
    for i in range(net.n):
        if i not in P:
            lp.add_eq({i: 1.0}, 0.0)
    lp.add_ge({i: 1.0 for i in P}, 1.0)
    return not lp_feasible(lp).feasible


def enumerate_siphons(net: ReactionNetwork, minimal_only: bool = False) -> list[Siphon]:
    """Exhaustive sweep over species subsets, ordered by size then bitmask."""
    if net.n > MAX_SIPHON_SPECIES:
        raise CapabilityBound(f"siphon sweep limited to {MAX_SIPHON_SPECIES} species, got {net.n}")
    ins, outs = _masks(net)
    masks = [int(v) for v in _kernels.siphon_masks(ins, outs, net.n)]
    masks.sort(key=lambda m: (bin(m).count("1"), m))
    minimal = []
    for m in masks:
        if not any((s & m) == s for s in minimal):
            minimal.append(m)
    minimal_set = set(minimal)
    chosen = minimal if minimal_only else masks
    out = []
    for m in chosen:
        P = frozenset(i for i in range(net.n) if m >> i & 1)
        outputs = frozenset(j for j in range(net.nu) if int(outs[j]) & m)
        out.append(Siphon(P, outputs, len(outputs) == net.nu, is_critical_set(net, P), m in minimal_set))
    return out


@dataclass(frozen=True)
class Verdict:
    verdict: str
    rule: str
    reason: str
    rigor: str = EXACT
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict, "rule": self.rule, "reason": self.reason, "rigor": self.rigor}
        d.update(self.details)
        return d


NOT_GS = "NotGS"
NO_OBSTRUCTION = "NoObstruction"


def gsn_obstruction(net: ReactionNetwork, siphons: list[Siphon] | None = None,
                    equilibrium_witness=None) -> Verdict:
    """Siphon-based reasons a network cannot admit a PWLR certificate.

    ``equilibrium_witness`` is a numerically found isolated positive equilibrium
    (an object with ``positive`` and ``reduced_jacobian_nonsingular`` flags).
    """
    if siphons is None:
        siphons = enumerate_siphons(net)
    critical = [s for s in siphons if s.is_critical]
    for s in critical:
        if s.is_deadlock:
            return Verdict(NOT_GS, "critical-deadlock",
                           f"critical deadlock {s.names(net)}", details={"siphon": s.names(net)})
    if not critical:
        return Verdict(NO_OBSTRUCTION, "no-critical-siphon", "no critical siphons")
    cons = conservation_analysis(net).conservative
    if cons and net.kernel_dim == 1:
        return Verdict(NOT_GS, "critical-siphon-conservative-1d-kernel",
                       f"conservative, dim ker Gamma = 1 and critical siphon {critical[0].names(net)}",
                       details={"siphon": critical[0].names(net)})
    if cons and equilibrium_witness is not None and equilibrium_witness.positive \
            and equilibrium_witness.reduced_jacobian_nonsingular:
        return Verdict(NOT_GS, "critical-siphon-isolated-equilibrium",
                       f"conservative, critical siphon {critical[0].names(net)} and a numerically "
                       "isolated positive equilibrium", NUMERIC_WITNESS,
                       details={"siphon": critical[0].names(net)})
    return Verdict(NO_OBSTRUCTION, "critical-siphon-undecided",
                   f"critical siphon {critical[0].names(net)} present but no obstruction rule applies")


CERTIFIED_GS = "certified-GS"
PERSISTENT = "Persistent"
UNKNOWN = "Unknown"


def _certifiable(net: ReactionNetwork) -> bool:
    from .partition import PartitionError, build_partition
    from .pwlr import PWLRCertificate, SynthesisTooLarge, synthesize
    if not check_ag(net).holds:
        return False
    try:
        part = build_partition(net.gamma_exact)
        return isinstance(synthesize(net, part), PWLRCertificate)
    except (PartitionError, SynthesisTooLarge):
        return False


def persistence_verdict(net: ReactionNetwork, gsn_status: str, equilibrium_witness=None) -> Verdict:
    """Persistence of a conservative network already certified to admit a PWLR certificate.

    ``gsn_status`` is ``certified-GS``, ``NotGS`` or anything else for unknown.
    """
    if gsn_status == NOT_GS:
        return Verdict(NOT_GS, "pass-through", "network admits no PWLR certificate")
    if not conservation_analysis(net).conservative:
        return Verdict(UNKNOWN, "not-conservative", "persistence rule needs a conservative network")
    if gsn_status != CERTIFIED_GS:
        return Verdict(UNKNOWN, "not-certified", "no PWLR certificate available")
    if net.kernel_dim == 1:
        return Verdict(PERSISTENT, "conservative-gs-1d-kernel",
                       "conservative, certified and dim ker Gamma = 1")
    pairs = net.reversible_pairs()
    if len(pairs) <= MAX_REVERSIBLE_PAIRS:
        for size in range(1, len(pairs) + 1):
            for subset in itertools.combinations(pairs, size):
                drop = {later for _, later in subset}
                keep = [j for j in range(net.nu) if j not in drop]
                sub = net.subnetwork(keep)
                if sub.kernel_dim == 1 and _certifiable(sub):
                    removed = [net.reactions[j] for j in sorted(drop)]
                    return Verdict(PERSISTENT, "reduced-network-1d-kernel-gs",
                                   f"removing reverse reactions {removed} leaves a certified "
                                   "network with dim ker Gamma = 1", details={"removed": removed})
    if equilibrium_witness is not None and equilibrium_witness.positive \
            and equilibrium_witness.reduced_jacobian_nonsingular:
        return Verdict(PERSISTENT, "isolated-positive-equilibrium",
                       "conservative, certified and a numerically isolated positive equilibrium",
                       NUMERIC_WITNESS)
    return Verdict(UNKNOWN, "no-rule-applies", "no persistence rule applies")


@dataclass(frozen=True)
class P0Report:
    is_p0: bool
    mode: str
    coefficients: dict = field(default_factory=dict)  # (I, monomial) -> Fraction
    witness: tuple | None = None  # (I, monomial, coefficient) or (I, rho) when sampled
    samples: int = 0

    def to_dict(self, net: ReactionNetwork | None = None) -> dict:
        def I_str(I):
            return [i + 1 for i in I]

        d = {"is_p0": self.is_p0, "mode": self.mode}
        if self.mode == "exact":
            d["coefficients"] = [
                {"I": I_str(I), "monomial": [l + 1 for l in mono], "coefficient": str(c)}
                for (I, mono), c in self.coefficients.items() if c != 0]
        else:
            d["rigor"] = NUMERIC_WITNESS
            d["samples"] = self.samples
        if self.witness is not None:
            if self.mode == "exact":
                I, mono, c = self.witness
                d["witness"] = {"I": I_str(I), "monomial": [l + 1 for l in mono], "coefficient": str(c)}
            else:
                I, val = self.witness
                d["witness"] = {"I": I_str(I), "minor": val}
        return d


def _neg_jacobian_pattern(net: ReactionNetwork):
    """-Gamma dR/dx = sum_l rho_l (-gamma_{j_l}) e_{i_l}^T; column i collects vertices with that species."""
    verts = rank_one_decomposition(net).entries
    by_species: dict[int, list[tuple[int, int]]] = {}
    for ell, v in enumerate(verts):
        by_species.setdefault(v.species, []).append((ell, v.reaction))
    return by_species


def p0_check(net: ReactionNetwork, mode: str = "exact", samples: int = 1000, seed: int = 0) -> P0Report:
    """Sign of every principal minor of ``-Gamma dR/dx`` over all positive rho.

    Exact mode expands each minor by Cauchy-Binet: column ``i`` of ``dR/dx`` is
    ``sum_l rho_l e_{j_l}`` over vertices with species ``i``, so a minor over
    species set I is a sum, over one vertex per species with distinct
    reactions J, of ``det(-Gamma[I, J]) * sign * prod rho``.
    """
    if mode == "exact":
        if net.n > MAX_P0_EXACT or net.nu > MAX_P0_EXACT:
            raise CapabilityBound(f"exact P0 expansion limited to n, nu <= {MAX_P0_EXACT}")
        return _p0_exact(net)
    if mode == "sampled":
        return _p0_sampled(net, samples, seed)
    raise ValueError(f"unknown P0 mode {mode!r}")


def _p0_exact(net: ReactionNetwork) -> P0Report:
    negG = exact.ExactMatrix((-net.gamma).tolist(), ncols=net.nu)
    by_species = _neg_jacobian_pattern(net)
    coeffs: dict = {}
    witness = None
    for size in range(1, net.n + 1):
        for I in itertools.combinations(range(net.n), size):
            terms: dict[tuple[int, ...], Fraction] = {}
            if all(i in by_species for i in I):
                for choice in itertools.product(*(by_species[i] for i in I)):
                    J = [j for _, j in choice]
                    if len(set(J)) != len(J):
                        continue
                    # column order follows I; det(-Gamma[I, J]) with J in that order
                    c = exact.exact_minor(negG, list(I), J)
                    mono = tuple(sorted(ell for ell, _ in choice))
                    terms[mono] = terms.get(mono, Fraction(0)) + c
            if not terms:
                coeffs[(I, ())] = Fraction(0)
            for mono, c in sorted(terms.items()):
                coeffs[(I, mono)] = c
                if c < 0 and witness is None:
                    witness = (I, mono, c)
    return P0Report(witness is None, "exact", coeffs, witness)


def _p0_sampled(net: ReactionNetwork, samples: int, seed: int) -> P0Report:
    rng = np.random.default_rng(seed)
    verts = rank_one_decomposition(net).entries
    G = net.gamma.astype(float)
    for _ in range(samples):
        rho = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), size=len(verts)))
        J = np.zeros((net.nu, net.n))
        for r, v in zip(rho, verts):
            J[v.reaction, v.species] += r
        M = -G @ J
        scale = max(1.0, float(np.abs(M).max()))
        for size in range(1, net.n + 1):
            for I in itertools.combinations(range(net.n), size):
                val = float(np.linalg.det(M[np.ix_(I, I)]))
                if val < -1e-12 * scale ** size:
                    return P0Report(False, "sampled", witness=(I, val), samples=samples)
    return P0Report(True, "sampled", samples=samples)


UNIQUE = "UniqueInClass"
MULTIPLE_IMPOSSIBLE = "MultipleImpossible"


def uniqueness_verdict(net: ReactionNetwork, p0: P0Report, gsn_status: str = CERTIFIED_GS,
                       equilibrium_witness=None) -> Verdict:
    if gsn_status != CERTIFIED_GS:
        return Verdict(UNKNOWN, "not-certified", "uniqueness rule needs a certified network")
    if not p0.is_p0:
        return Verdict(UNKNOWN, "not-p0", "Jacobian is not robustly P0")
    rigor = EXACT if p0.mode == "exact" else NUMERIC_WITNESS
    if equilibrium_witness is not None and equilibrium_witness.positive \
            and equilibrium_witness.reduced_jacobian_nonsingular:
        return Verdict(UNIQUE, "p0-gs-nonsingular-witness",
                       "P0, certified and an equilibrium with nonsingular reduced Jacobian",
                       NUMERIC_WITNESS)
    return Verdict(MULTIPLE_IMPOSSIBLE, "p0-gs",
                   "P0 and certified: no multiple nondegenerate positive equilibria in a class", rigor)
