"""Reaction network structure: stoichiometry, rank-one vertices, AG and conservation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .lp import LinearProgram, lp_feasible


class NetworkSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ReactionNetwork:
    """Species, reactions and integer reactant/product coefficient matrices.

    ``alpha[i, j]`` and ``beta[i, j]`` are the coefficients of species ``i`` on
    the reactant and product side of reaction ``j``.
    """

    species: tuple[str, ...]
    reactions: tuple[str, ...]
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray = field(init=False)

    def __post_init__(self):
        alpha = _frozen(self.alpha)
        beta = _frozen(self.beta)
        n, nu = len(self.species), len(self.reactions)
        if n < 1 or nu < 1:
            raise ValueError("a network needs at least one species and one reaction")
        if alpha.shape != (n, nu) or beta.shape != (n, nu):
            raise ValueError(f"coefficient matrices must be {n}x{nu}")
        if (alpha < 0).any() or (beta < 0).any():
            raise ValueError("stoichiometric coefficients must be nonnegative")
        empty = ~(alpha.any(axis=0) | beta.any(axis=0))
        if empty.any():
            bad = [self.reactions[j] for j in np.nonzero(empty)[0]]
            raise ValueError(f"reactions with both sides empty: {bad}")
        if len(set(self.species)) != n or len(set(self.reactions)) != nu:
            raise ValueError("duplicate species or reaction names")
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", _frozen(beta - alpha))

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def nu(self) -> int:
        return len(self.reactions)

    @property
    def gamma_exact(self) -> exact.ExactMatrix:
        return exact.ExactMatrix(self.gamma.tolist(), ncols=self.nu)

    @property
    def rank(self) -> int:
        return exact.rank(self.gamma_exact)

    @property
    def kernel_dim(self) -> int:
        return self.nu - self.rank

    def reactants(self, j: int) -> list[int]:
        return [int(i) for i in np.nonzero(self.alpha[:, j])[0]]

    def products(self, j: int) -> list[int]:
        return [int(i) for i in np.nonzero(self.beta[:, j])[0]]

    def subnetwork(self, keep: list[int]) -> "ReactionNetwork":
        """Network restricted to the reactions at the given indices."""
        return ReactionNetwork(
            self.species,
            tuple(self.reactions[j] for j in keep),
            self.alpha[:, keep],
            self.beta[:, keep],
        )

    def reversible_pairs(self) -> list[tuple[int, int]]:
        """Pairs (j, j') with j < j' where j' is the reverse of j."""
        pairs = []
        for j in range(self.nu):
            for k in range(j + 1, self.nu):
                if (self.alpha[:, j] == self.beta[:, k]).all() and \
                        (self.beta[:, j] == self.alpha[:, k]).all():
                    pairs.append((j, k))
        return pairs

    def format_reaction(self, j: int) -> str:
        def side(col):
            terms = []
            for i in np.nonzero(col)[0]:
                c = int(col[i])
                terms.append(self.species[i] if c == 1 else f"{c} {self.species[i]}")
            return " + ".join(terms)

        left, right = side(self.alpha[:, j]), side(self.beta[:, j])
        return f"{self.reactions[j]}: {left} -> {right}".replace(":  ->", ": ->").rstrip()

    def to_text(self) -> str:
        return "\n".join(self.format_reaction(j) for j in range(self.nu)) + "\n"


_TERM = re.compile(r"^(?:(\d+)\s*\*?\s*)?([A-Za-z_][A-Za-z0-9_]*)$")


def _parse_side(text: str, lineno: int) -> list[tuple[str, int]]:
    text = text.strip()
    if not text or text in ("0", "∅"):
        return []
    out = []
    for raw in text.split("+"):
        term = raw.strip()
        if term.startswith("-"):
            raise NetworkSyntaxError(f"negative coefficient in {term!r}", lineno)
        m = _TERM.match(term)
        if not m:
            raise NetworkSyntaxError(f"cannot parse term {term!r}", lineno)
        coef = int(m.group(1)) if m.group(1) else 1
        if coef == 0:
            raise NetworkSyntaxError(f"zero coefficient in {term!r}", lineno)
        out.append((m.group(2), coef))
    return out


def parse_network(text: str) -> ReactionNetwork:
    """Parse ``NAME: [c] S + ... -> [c] S + ...`` lines; ``#`` starts a comment line."""
    species: list[str] = []
    names: list[str] = []
    sides: list[tuple[list, list]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise NetworkSyntaxError("missing 'NAME:' prefix", lineno)
        name, body = stripped.split(":", 1)
        name = name.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.\-]*", name):
            raise NetworkSyntaxError(f"invalid reaction name {name!r}", lineno)
        if name in names:
            raise NetworkSyntaxError(f"duplicate reaction name {name!r}", lineno)
        if body.count("->") != 1:
            raise NetworkSyntaxError("expected exactly one '->'", lineno)
        left, right = body.split("->")
        lhs, rhs = _parse_side(left, lineno), _parse_side(right, lineno)
        if not lhs and not rhs:
            raise NetworkSyntaxError("both sides of the reaction are empty", lineno)
        for s, _ in lhs + rhs:
            if s not in species:
                species.append(s)
        names.append(name)
        sides.append((lhs, rhs))
    if not names:
        raise NetworkSyntaxError("no reactions found")
    if not species:
        raise NetworkSyntaxError("no species found")
    idx = {s: i for i, s in enumerate(species)}
    alpha = np.zeros((len(species), len(names)), dtype=np.int64)
    beta = np.zeros_like(alpha)
    for j, (lhs, rhs) in enumerate(sides):
        for s, c in lhs:
            alpha[idx[s], j] += c
        for s, c in rhs:
            beta[idx[s], j] += c
    return ReactionNetwork(tuple(species), tuple(names), alpha, beta)


def network_from_matrices(alpha, beta, species=None, reactions=None) -> ReactionNetwork:
    alpha = np.asarray(alpha, dtype=np.int64)
    beta = np.asarray(beta, dtype=np.int64)
    n, nu = alpha.shape
    species = tuple(species) if species else tuple(f"X{i + 1}" for i in range(n))
    reactions = tuple(reactions) if reactions else tuple(f"R{j + 1}" for j in range(nu))
    return ReactionNetwork(species, reactions, alpha, beta)


@dataclass(frozen=True)
class Vertex:
    """One rank-one vertex ``e_j gamma_i^T`` of the reaction-coordinate inclusion."""

    index: int  # 1-based label
    species: int
    reaction: int
    matrix: np.ndarray


@dataclass(frozen=True)
class RankOneDecomposition:
    entries: tuple[Vertex, ...]

    @property
    def s(self) -> int:
        return len(self.entries)

    def pairs(self) -> list[tuple[int, int]]:
        return [(v.species, v.reaction) for v in self.entries]

    def combine(self, rho) -> np.ndarray:
        """Sum of rho_l * Gamma^l."""
        nu = self.entries[0].matrix.shape[0] if self.entries else 0
        out = np.zeros((nu, nu))
        for r, v in zip(rho, self.entries):
            out += r * v.matrix
        return out


def rank_one_decomposition(net: ReactionNetwork) -> RankOneDecomposition:
    """Enumerate (i, j) with alpha_ij > 0, reaction-major then species order."""
    entries = []
    for j in range(net.nu):
        for i in range(net.n):
            if net.alpha[i, j] > 0:
                M = np.zeros((net.nu, net.nu), dtype=np.int64)
                M[j, :] = net.gamma[i, :]
                M.setflags(write=False)
                entries.append(Vertex(len(entries) + 1, i, j, M))
    return RankOneDecomposition(tuple(entries))


@dataclass(frozen=True)
class AGResult:
    holds: bool
    witness: np.ndarray | None = None


def check_ag(net: ReactionNetwork) -> AGResult:
    """Is there v >> 0 in ker Gamma? Strict positivity is encoded as v >= 1."""
    lp = LinearProgram(net.nu)
    for i in range(net.n):
        lp.add_eq(net.gamma[i].astype(float), 0.0)
    for j in range(net.nu):
        lp.add_ge({j: 1.0}, 1.0)
    res = lp_feasible(lp)
    return AGResult(res.feasible, res.point if res.feasible else None)


@dataclass(frozen=True)
class ConservationResult:
    kernel_left_basis: tuple[tuple[Fraction, ...], ...]
    conservative: bool
    witness: np.ndarray | None = None

    def integer_basis(self) -> list[tuple[int, ...]]:
        return [exact.primitive_integer(v) for v in self.kernel_left_basis]


def conservation_analysis(net: ReactionNetwork) -> ConservationResult:
    basis = exact.left_kernel_basis(net.gamma_exact)
    lp = LinearProgram(net.n)
    for j in range(net.nu):
        lp.add_eq(net.gamma[:, j].astype(float), 0.0)
    for i in range(net.n):
        lp.add_ge({i: 1.0}, 1.0)
    res = lp_feasible(lp) if basis else None
    conservative = bool(res is not None and res.feasible)
    return ConservationResult(tuple(basis), conservative, res.point if conservative else None)
