"""Command-line front end: ``crncert analyze | certify | simulate``.

Exit codes: 0 success or certificate found, 1 certified infeasible, 2 input
error, 3 capability bound or partition precondition, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .contraction import certify_nonexpansive, empirical_rate, trajectory_pair_test
from .dual import factor_through_gamma, verify_dual_direct
from .kinetics import LAWS, KineticsSpec, parse_kinetics_option, random_kinetics
from .lp import LPError
from .network import NetworkSyntaxError, ReactionNetwork, check_ag, conservation_analysis, parse_network
from .partition import KernelMismatch, PartitionError, PartitionTooLarge, build_partition, read_partition_file
from .pwlr import (InvalidCertificate, PWLRCertificate, SynthesisTooLarge, certificate_from_json,
                   synthesize, verify_l1)
from .simulate import IntegrationError, integrate, lyapunov_trace, trajectory_csv
from .structural import (CERTIFIED_GS, NOT_GS, CapabilityBound, enumerate_siphons, gsn_obstruction,
                         p0_check, persistence_verdict, uniqueness_verdict)

log = logging.getLogger("crncert")

SCHEMA = 1
EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_BOUND, EXIT_NUMERIC = 0, 1, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from exc


def _load_network(path: str) -> ReactionNetwork:
    try:
        return parse_network(_read(path))
    except NetworkSyntaxError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_INPUT) from exc
    except ValueError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_INPUT) from exc


def _fmt(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def network_section(net: ReactionNetwork) -> dict:
    ag = check_ag(net)
    cons = conservation_analysis(net)
    return {
        "species": list(net.species),
        "reactions": list(net.reactions),
        "n": net.n,
        "nu": net.nu,
        "rank": net.rank,
        "kernel_dim": net.kernel_dim,
        "ag": {"holds": ag.holds, "witness": _fmt(ag.witness), "rule": "positive-kernel-vector"},
        "conservative": cons.conservative,
        "conservation_laws": [list(w) for w in cons.integer_basis()],
    }


def structural_section(net: ReactionNetwork, gs_status: str | None) -> dict:
    siphons = enumerate_siphons(net)
    gsn = gsn_obstruction(net, siphons)
    if gsn.verdict == NOT_GS:
        status = NOT_GS
    else:
        status = gs_status or "unknown"
    p0 = p0_check(net, "exact") if max(net.n, net.nu) <= 8 else p0_check(net, "sampled")
    return {
        "siphons": [{"species": s.names(net),
                     "output_reactions": [net.reactions[j] for j in sorted(s.output_reactions)],
                     "deadlock": s.is_deadlock, "critical": s.is_critical, "minimal": s.is_minimal}
                    for s in siphons],
        "gsn": gsn.to_dict(),
        "p0": p0.to_dict(net),
        "persistence": persistence_verdict(net, status).to_dict(),
        "uniqueness": uniqueness_verdict(net, p0, status).to_dict(),
    }


def _partition(net: ReactionNetwork, spec: str):
    if spec == "gamma":
        H = None
    elif spec.startswith("file:"):
        try:
            H = read_partition_file(_read(spec[5:]))
        except (PartitionError, ValueError) as exc:
            if isinstance(exc, CLIError):
                raise
            raise CLIError(f"bad partition file: {exc}", EXIT_INPUT) from exc
    else:
        raise CLIError(f"--partition must be 'gamma' or 'file:<path>', got {spec!r}", EXIT_INPUT)
    try:
        return build_partition(net.gamma_exact, H)
    except KernelMismatch as exc:
        raise CLIError(f"partition rejected: {exc}", EXIT_BOUND) from exc
    except PartitionTooLarge as exc:
        raise CLIError(str(exc), EXIT_BOUND) from exc
    except PartitionError as exc:
        raise CLIError(f"bad partition: {exc}", EXIT_INPUT) from exc


def _pair_start(net: ReactionNetwork, rng: np.random.Generator):
    """Two positive states in one stoichiometric class."""
    G = net.gamma.astype(float)
    xa = np.ones(net.n)
    u = rng.normal(size=net.nu)
    step = G @ u
    scale = 0.5 / max(float(np.abs(step).max()), 1e-12)
    return xa, xa + scale * step


def certificate_section(cert: PWLRCertificate) -> dict:
    d = cert.to_dict()
    d["status"] = "found"
    d["rule"] = "pwlr-lp"
    d["lasalle"] = "asymptotic-stability claims are conditional on the LaSalle condition, not checked"
    return d


def validation_section(net, cert, draws: int, rng) -> dict:
    out = []
    for law in LAWS:
        for _ in range(draws):
            kin = random_kinetics(net, rng, law)
            x0 = rng.uniform(0.2, 2.0, size=net.n)
            traj = integrate(net, kin, x0, 10.0, tol=1e-10, atol=1e-12)
            tr = lyapunov_trace(cert, traj, kin)
            out.append({"law": law, "x0": x0.tolist(), "max_increase": tr.max_increase,
                        "pass": tr.passed})
    return {"runs": out, "pass": all(r["pass"] for r in out), "rigor": "numeric-witness"}


def cmd_analyze(args) -> tuple[dict, int]:
    net = _load_network(args.network)
    return {"schema": SCHEMA, "command": "analyze", "network": network_section(net),
            "structural": structural_section(net, None)}, EXIT_OK


def cmd_certify(args) -> tuple[dict, int]:
    net = _load_network(args.network)
    t0 = time.perf_counter()
    report = {"schema": SCHEMA, "command": "certify", "network": network_section(net)}
    part = _partition(net, args.partition)
    if not report["network"]["ag"]["holds"]:
        report["certificate"] = {"status": "infeasible", "rule": "ag-fails",
                                 "reason": "no strictly positive vector in ker Gamma"}
        report["structural"] = structural_section(net, None)
        return report, EXIT_INFEASIBLE
    try:
        cert = synthesize(net, part, convex=args.convex, seed=args.seed)
    except SynthesisTooLarge as exc:
        raise CLIError(str(exc), EXIT_BOUND) from exc
    if not isinstance(cert, PWLRCertificate):
        report["certificate"] = {"status": "infeasible", "rule": "pwlr-lp", "kind": cert.kind,
                                 "reason": cert.reason}
        report["structural"] = structural_section(net, None)
        return report, EXIT_NUMERIC if cert.kind == "numeric" else EXIT_INFEASIBLE
    report["certificate"] = certificate_section(cert)
    if args.l1:
        l1 = verify_l1(net, cert.C)
        report["certificate"]["l1"] = {"valid": l1.valid, "mu_per_vertex": list(l1.mu)}
    dc = factor_through_gamma(cert)
    report["dual"] = dc.to_dict()
    report["dual"]["direct_check"] = verify_dual_direct(net, dc).valid
    rng = np.random.default_rng(args.seed)
    if cert.convex:
        ln = certify_nonexpansive(cert)
        section = ln.to_dict()
        if ln.passed and net.rank > 0:
            xa, xb = _pair_start(net, rng)
            kin = KineticsSpec.mass_action(np.ones(net.nu))
            pair = trajectory_pair_test(net, kin, dc, xa, xb, 10.0)
            section["empirical_rate"] = empirical_rate(pair.t, pair.ratio)
            section["empirical_rate_rigor"] = "numeric-witness"
        report["contraction"] = section
    report["structural"] = structural_section(net, CERTIFIED_GS)
    if args.validate:
        report["validation"] = validation_section(net, cert, args.validate, rng)
    report["elapsed_seconds"] = time.perf_counter() - t0
    if args.cert_out:
        with open(args.cert_out, "w", encoding="utf-8") as fh:
            fh.write(cert.to_json())
    return report, EXIT_OK


def _parse_vector(text: str, n: int, what: str) -> np.ndarray:
    try:
        v = np.array([float(s) for s in text.split(",")])
    except ValueError as exc:
        raise CLIError(f"{what}: cannot parse {text!r}", EXIT_INPUT) from exc
    if v.shape != (n,):
        raise CLIError(f"{what} needs {n} comma-separated values", EXIT_INPUT)
    return v


def _kinetics(net: ReactionNetwork, spec: str | None, seed: int) -> KineticsSpec:
    try:
        if spec is None:
            return random_kinetics(net, np.random.default_rng(seed))
        if os.path.exists(spec):
            return KineticsSpec.from_json(net, _read(spec))
        return parse_kinetics_option(net, spec)
    except (ValueError, KeyError) as exc:
        raise CLIError(f"bad kinetics: {exc}", EXIT_INPUT) from exc


def cmd_simulate(args) -> tuple[dict, int]:
    net = _load_network(args.network)
    kin = _kinetics(net, args.kinetics, args.seed)
    x0 = _parse_vector(args.x0, net.n, "--x0")
    if (x0 < 0).any():
        raise CLIError("--x0 must be nonnegative", EXIT_INPUT)
    if not args.T > 0:
        raise CLIError("--T must be positive", EXIT_INPUT)
    cert = None
    if args.validate_cert:
        try:
            cert = certificate_from_json(net, _read(args.validate_cert))
        except (InvalidCertificate, PartitionError, ValueError, KeyError) as exc:
            if isinstance(exc, CLIError):
                raise
            raise CLIError(f"bad certificate: {exc}", EXIT_INPUT) from exc
    try:
        traj = integrate(net, kin, x0, args.T, tol=args.tol)
    except IntegrationError as exc:
        raise CLIError(f"integration failed: {exc}", EXIT_NUMERIC) from exc
    V = None
    summary = {"schema": SCHEMA, "command": "simulate", "samples": len(traj),
               "final_state": traj.final.tolist(), "kinetics": kin.to_mapping(net)}
    if cert is not None:
        tr = lyapunov_trace(cert, traj, kin)
        V = tr.values
        summary["validation"] = {"max_increase": tr.max_increase, "tolerance": tr.tolerance,
                                 "pass": tr.passed, "rigor": "numeric-witness"}
    csv = trajectory_csv(net, traj, V)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    return summary, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crncert", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="structural analysis only")
    a.add_argument("network")
    a.add_argument("--out", help="write the JSON report here instead of stdout")

    c = sub.add_parser("certify", help="synthesize and verify a PWLR certificate")
    c.add_argument("network")
    c.add_argument("--partition", default="gamma", help="'gamma' (default) or 'file:<path>' with rows of H")
    c.add_argument("--convex", action="store_true", help="require the convex (max-norm) form")
    c.add_argument("--l1", action="store_true", help="also run the column-sum (l1) check")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--validate", type=int, default=0, metavar="N",
                   help="simulate N random kinetics per rate law and check the decrease")
    c.add_argument("--cert-out", help="write the certificate JSON here")
    c.add_argument("--out", help="write the JSON report here instead of stdout")

    s = sub.add_parser("simulate", help="integrate x' = Gamma R(x) and emit CSV")
    s.add_argument("network")
    s.add_argument("--kinetics", help="JSON sidecar path or inline 'ma:k=1,1' / 'mm:vmax=..;km=..' / "
                                      "'hill:vmax=..;km=..;n=..'; random mass-action if omitted")
    s.add_argument("--x0", required=True, help="comma-separated initial concentrations")
    s.add_argument("--T", type=float, default=10.0)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--validate-cert", help="certificate JSON whose V is added as a CSV column")
    s.add_argument("--out", help="CSV path (stdout if omitted); the summary goes to stderr")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"analyze": cmd_analyze, "certify": cmd_certify, "simulate": cmd_simulate}[args.command]
    try:
        report, code = handler(args)
    except CLIError as exc:
        print(f"crncert: {exc}", file=sys.stderr)
        return exc.code
    except (CapabilityBound, PartitionTooLarge, SynthesisTooLarge) as exc:
        print(f"crncert: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (IntegrationError, LPError) as exc:
        print(f"crncert: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = json.dumps(report, indent=2, default=_fmt)
    if args.command == "simulate":
        print(text, file=sys.stderr)
    elif getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
