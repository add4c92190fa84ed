"""Networks shared by the test modules."""

import numpy as np

from crncert.network import network_from_matrices, parse_network
from crncert.partition import build_partition
from crncert.pwlr import PWLRCertificate, synthesize

NET_REV = "R1: X1 -> X2\nR2: X2 -> X1\n"
NET_SIPHON = "R1: X1 + X2 -> 2 X2\nR2: X2 -> X1\n"
ENZYME = "R1: E + S -> ES\nR2: ES -> E + S\nR3: ES -> E + P\nR4: E + P -> ES\n"
CHAIN = "R1: A -> B\nR2: B -> A\nR3: B -> C\nR4: C -> B\n"
INFLOW = "R1: -> X1\nR2: X1 ->\n"

NAMED = {"net_rev": NET_REV, "net_siphon": NET_SIPHON, "enzyme": ENZYME, "chain": CHAIN,
         "inflow": INFLOW}


def net(name):
    return parse_network(NAMED[name])


def random_reversible(rng, n_max=4, pairs_max=3):
    """Random network of reversible pairs between distinct complexes (n, nu <= 6)."""
    n = int(rng.integers(2, n_max + 1))
    pairs = int(rng.integers(1, pairs_max + 1))
    alpha, beta = [], []
    seen = set()
    while len(alpha) < 2 * pairs:
        a = rng.integers(0, 2, size=n)
        b = rng.integers(0, 2, size=n)
        if not a.any() or not b.any() or (a == b).all():
            continue
        key = tuple(sorted([tuple(a), tuple(b)]))
        if key in seen:
            continue
        seen.add(key)
        alpha += [a, b]
        beta += [b, a]
    A = np.array(alpha).T
    B = np.array(beta).T
    used = (A + B).any(axis=1)
    return network_from_matrices(A[used], B[used])


def random_certified_networks(count, seed=2024, convex=False):
    """The first ``count`` random reversible networks that synthesize a certificate."""
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 500:
            raise RuntimeError("could not find enough certifiable random networks")
        candidate = random_reversible(rng)
        if candidate.rank == 0:
            continue
        part = build_partition(candidate.gamma_exact)
        cert = synthesize(candidate, part, convex=convex)
        if isinstance(cert, PWLRCertificate):
            out.append((candidate, cert))
    return out
