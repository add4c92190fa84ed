"""Monotone rate laws: mass-action, Michaelis-Menten and Hill.

Every law has the product form ``R_j(x) = v_j * prod_i f(x_i) ** alpha_ij`` over
the reactants of reaction ``j``, with ``f`` increasing, ``f(0) = 0``:

* mass-action:       f(x) = x                      (v_j = k_j)
* Michaelis-Menten:  f(x) = x / (Km + x)           (v_j = Vmax)
* Hill:              f(x) = x^h / (Km^h + x^h)     (v_j = Vmax)

so each law vanishes when a reactant is absent and is strictly increasing in
each reactant on the open orthant.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .network import ReactionNetwork

MASS_ACTION = "mass-action"
MICHAELIS_MENTEN = "michaelis-menten"
HILL = "hill"
LAWS = (MASS_ACTION, MICHAELIS_MENTEN, HILL)
_LAW_CODE = {MASS_ACTION: 0, MICHAELIS_MENTEN: 1, HILL: 2}
_ALIASES = {"ma": MASS_ACTION, "mm": MICHAELIS_MENTEN, "mass_action": MASS_ACTION,
            "michaelis_menten": MICHAELIS_MENTEN}


class BoundaryJacobianWarning(UserWarning):
    """Rate Jacobian evaluated where some concentration is zero."""


@dataclass(frozen=True)
class RateLaw:
    law: str
    rate: float  # k for mass-action, Vmax otherwise
    km: float = 1.0
    hill: float = 1.0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown rate law {self.law!r}")
        if not (self.rate > 0 and self.km > 0 and self.hill > 0):
            raise ValueError("rate-law parameters must be positive")

    def params(self) -> dict:
        if self.law == MASS_ACTION:
            return {"k": self.rate}
        if self.law == MICHAELIS_MENTEN:
            return {"vmax": self.rate, "km": self.km}
        return {"vmax": self.rate, "km": self.km, "n": self.hill}

    @classmethod
    def from_params(cls, law: str, params: Mapping) -> "RateLaw":
        law = _ALIASES.get(law, law)
        p = {k.lower(): float(v) for k, v in params.items()}
        if law == MASS_ACTION:
            return cls(law, p["k"])
        if law == MICHAELIS_MENTEN:
            return cls(law, p["vmax"], p["km"])
        if law == HILL:
            return cls(law, p["vmax"], p["km"], p.get("n", p.get("h", 1.0)))
        raise ValueError(f"unknown rate law {law!r}")

    def factor(self, x: np.ndarray) -> np.ndarray:
        x = np.maximum(x, 0.0)
        if self.law == MASS_ACTION:
            return x
        if self.law == MICHAELIS_MENTEN:
            return x / (self.km + x)
        u = x ** self.hill
        return u / (self.km ** self.hill + u)

    def dfactor(self, x: np.ndarray) -> np.ndarray:
        x = np.maximum(x, 0.0)
        if self.law == MASS_ACTION:
            return np.ones_like(x)
        if self.law == MICHAELIS_MENTEN:
            return self.km / (self.km + x) ** 2
        kh = self.km ** self.hill
        with np.errstate(divide="ignore"):
            return self.hill * x ** (self.hill - 1.0) * kh / (kh + x ** self.hill) ** 2


@dataclass(frozen=True)
class KineticsSpec:
    """One rate law per reaction, in the network's reaction order."""

    laws: tuple[RateLaw, ...]

    def __len__(self):
        return len(self.laws)

    @classmethod
    def mass_action(cls, k: Sequence[float]) -> "KineticsSpec":
        return cls(tuple(RateLaw(MASS_ACTION, float(v)) for v in k))

    @classmethod
    def from_mapping(cls, net: ReactionNetwork, data: Mapping) -> "KineticsSpec":
        """Build from the sidecar form ``{reaction: {"law": ..., "params": {...}}}``."""
        missing = [r for r in net.reactions if r not in data]
        if missing:
            raise ValueError(f"no kinetics given for reactions {missing}")
        extra = [r for r in data if r not in net.reactions]
        if extra:
            raise ValueError(f"kinetics given for unknown reactions {extra}")
        return cls(tuple(RateLaw.from_params(data[r]["law"], data[r].get("params", {}))
                         for r in net.reactions))

    @classmethod
    def from_json(cls, net: ReactionNetwork, text: str) -> "KineticsSpec":
        return cls.from_mapping(net, json.loads(text))

    def to_mapping(self, net: ReactionNetwork) -> dict:
        return {r: {"law": law.law, "params": law.params()}
                for r, law in zip(net.reactions, self.laws)}

    def kernel_arrays(self, net: ReactionNetwork):
        """Sparse reactant lists and per-reaction parameters for the compiled kernels."""
        rptr = [0]
        ridx: list[int] = []
        rcoef: list[float] = []
        for j in range(net.nu):
            for i in net.reactants(j):
                ridx.append(i)
                rcoef.append(float(net.alpha[i, j]))
            rptr.append(len(ridx))
        law = np.array([_LAW_CODE[l.law] for l in self.laws], dtype=np.int64)
        return (
            np.array(rptr, dtype=np.int64),
            np.array(ridx, dtype=np.int64),
            np.array(rcoef, dtype=float),
            law,
            np.array([l.rate for l in self.laws], dtype=float),
            np.array([l.km for l in self.laws], dtype=float),
            np.array([l.hill for l in self.laws], dtype=float),
        )


def _check(net: ReactionNetwork, kin: KineticsSpec, x) -> np.ndarray:
    if len(kin) != net.nu:
        raise ValueError(f"kinetics has {len(kin)} laws for {net.nu} reactions")
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise ValueError(f"state must have {net.n} entries")
    return x


def rate_vector(net: ReactionNetwork, kin: KineticsSpec, x) -> np.ndarray:
    x = _check(net, kin, x)
    if (x < 0).any():
        raise ValueError("negative concentration")
    R = np.empty(net.nu)
    for j, law in enumerate(kin.laws):
        a = net.alpha[:, j]
        sup = a > 0
        R[j] = law.rate * np.prod(law.factor(x[sup]) ** a[sup])
    return R


def rate_jacobian(net: ReactionNetwork, kin: KineticsSpec, x) -> np.ndarray:
    """The nu x n matrix dR/dx; warns when evaluated on the orthant boundary."""
    x = _check(net, kin, x)
    if (x < 0).any():
        raise ValueError("negative concentration")
    if (x <= 0).any():
        warnings.warn("rate Jacobian evaluated on the boundary; support may degenerate",
                      BoundaryJacobianWarning, stacklevel=2)
    J = np.zeros((net.nu, net.n))
    for j, law in enumerate(kin.laws):
        a = net.alpha[:, j].astype(float)
        sup = np.nonzero(a > 0)[0]
        f = law.factor(x[sup]) ** a[sup]
        for pos, i in enumerate(sup):
            others = np.prod(np.delete(f, pos))
            fi = law.factor(x[i:i + 1])[0]
            df = law.dfactor(x[i:i + 1])[0]
            lead = df if a[i] == 1 else a[i] * fi ** (a[i] - 1) * df
            J[j, i] = law.rate * lead * others
    return J


def random_kinetics(net: ReactionNetwork, rng: np.random.Generator, law: str = MASS_ACTION,
                    k_range=(0.1, 10.0), p_range=(0.5, 5.0), hill_range=(1.0, 5.0)) -> KineticsSpec:
    """Random positive parameters: rate constants log-uniform, saturation parameters uniform."""
    lo, hi = np.log(k_range[0]), np.log(k_range[1])
    laws = []
    for _ in range(net.nu):
        if law == MASS_ACTION:
            laws.append(RateLaw(law, float(np.exp(rng.uniform(lo, hi)))))
        elif law == MICHAELIS_MENTEN:
            laws.append(RateLaw(law, float(rng.uniform(*p_range)), float(rng.uniform(*p_range))))
        else:
            laws.append(RateLaw(law, float(rng.uniform(*p_range)), float(rng.uniform(*p_range)),
                                float(rng.uniform(*hill_range))))
    return KineticsSpec(tuple(laws))


def parse_kinetics_option(net: ReactionNetwork, text: str) -> KineticsSpec:
    """Inline form: ``ma:k=1,2``, ``mm:vmax=2,2;km=1,1`` or ``hill:vmax=..;km=..;n=..``.

    A single value is broadcast to every reaction.
    """
    if ":" not in text:
        raise ValueError(f"cannot parse kinetics {text!r}")
    tag, body = text.split(":", 1)
    law = _ALIASES.get(tag.strip().lower(), tag.strip().lower())
    if law not in LAWS:
        raise ValueError(f"unknown rate law {tag!r}")
    params: dict[str, list[float]] = {}
    for part in body.split(";"):
        if not part.strip():
            continue
        key, _, vals = part.partition("=")
        values = [float(v) for v in vals.split(",") if v.strip()]
        if len(values) == 1:
            values = values * net.nu
        if len(values) != net.nu:
            raise ValueError(f"parameter {key!r} needs {net.nu} values")
        params[key.strip().lower()] = values
    return KineticsSpec(tuple(
        RateLaw.from_params(law, {k: v[j] for k, v in params.items()}) for j in range(net.nu)))
