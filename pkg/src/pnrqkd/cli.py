"""Command-line entry point.

Subcommands: ``simulate``, ``threshold``, ``fig2``, ``solver``. Every file
written is accompanied by a ``key = value`` manifest holding the full
parameter set, so a run can be repeated exactly.

Exit codes: 0 success/secure, 2 usage error, 3 eavesdropper detected,
4 inconclusive.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .adversary import Attack, ChannelConfig, SubstituteModel, solve_blocking_distribution
from .detector import DetectorConfig, check_dark_count_budget
from .exceptions import DegenerateChannelError, DomainError
from .io import csv_text, fmt, manifest_text, write_text
from .protocol import SessionConfig, Verdict, extract_raw_key, run_session, sift, verify
from .security import THRESHOLD_TOL, info_ab, info_ae, qber_grid, security_threshold, summarize
from .source import SourceConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DETECTED = 3
EXIT_INCONCLUSIVE = 4


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _transmittance(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {text}")
    return value


def _mu_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list of intensities")
    values = [float(t) for t in items]
    if any(not 0.0 < v < 1.0 for v in values):
        raise argparse.ArgumentTypeError(f"intensities must lie in (0, 1), got {text}")
    return values


def _power_of_two(text: str) -> int:
    value = int(text)
    if value < 1 or value & (value - 1):
        raise argparse.ArgumentTypeError(f"must be a power of two, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnrqkd", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a seeded BB84 session and verify it", allow_abbrev=False)
    sim.add_argument("--mu", type=_positive, default=0.1)
    sim.add_argument("--mu-prime", type=_positive, default=0.5)
    sim.add_argument("--eta", type=_transmittance, default=0.1)
    sim.add_argument("--pulses", type=int, default=1_000_000)
    sim.add_argument("--ports", type=_power_of_two, default=16)
    sim.add_argument("--e-dark", type=_unit, default=0.0)
    sim.add_argument("--attack", choices=[a.value for a in Attack], default="none")
    sim.add_argument("--substitute", choices=[m.value for m in SubstituteModel], default="intercept_resend")
    sim.add_argument("--attack-qber", type=float, default=0.0, help="flip probability for si/cmp attacks")
    sim.add_argument("--error-rate", type=float, default=0.0, help="intrinsic channel bit-flip probability")
    sim.add_argument("--signal-fraction", type=float, default=0.5)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", type=Path, default=Path("run"))

    thr = sub.add_parser("threshold", help="QBER thresholds for a list of intensities", allow_abbrev=False)
    thr.add_argument("--mu", type=_mu_list, required=True)
    thr.add_argument("--tol", type=_positive, default=THRESHOLD_TOL)
    thr.add_argument("--out", type=Path)

    fig = sub.add_parser("fig2", help="information curves versus QBER", allow_abbrev=False)
    fig.add_argument("--mu", type=_mu_list, default=[0.1, 0.2, 0.3])
    fig.add_argument("--out", type=Path)

    sol = sub.add_parser("solver", help="Eve's photon-number redistribution solution", allow_abbrev=False)
    sol.add_argument("--mu", type=_positive, default=0.1)
    sol.add_argument("--mu-prime", type=_positive, default=0.5)
    sol.add_argument("--eta", type=float, default=0.1)
    sol.add_argument("--n-max", type=int, default=10)
    sol.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out: Path | None, manifest: dict) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    write_text(out, text)
    manifest = {**manifest, "version": __version__, "output": str(out)}
    write_text(out.with_name(out.name + ".manifest"), manifest_text(manifest))


def cmd_simulate(args: argparse.Namespace) -> int:
    params = {"substitute": args.substitute, "qber": args.attack_qber}
    config = SessionConfig(
        source=SourceConfig(args.mu, args.mu_prime, signal_fraction=args.signal_fraction),
        channel=ChannelConfig(args.eta, Attack(args.attack), params, error_rate=args.error_rate),
        detector=DetectorConfig(args.ports, args.e_dark),
        n_pulses=args.pulses,
        master_seed=args.seed,
    )
    log = run_session(config)
    sifted = sift(log)
    report = verify(sifted, log)
    out: Path = args.out
    files = {
        "log": out / "session_log.csv",
        "detections": out / "detections.csv",
        "report_csv": out / "report.csv",
        "report": out / "report.txt",
        "manifest": out / "manifest.txt",
    }
    write_text(files["log"], log.to_csv())
    write_text(files["detections"], log.detections_csv())
    write_text(files["report_csv"], report.to_csv())

    summary = report.summary()
    if report.overall_verdict is Verdict.SECURE:
        alice, bob = extract_raw_key(sifted, report)
        qber = float((alice != bob).mean()) if alice.size else 0.0
        sec = summarize(min(qber, 0.5), args.mu, args.eta, args.mu_prime)
        summary += (
            f"raw key bits: {alice.size}\nqber: {fmt(qber)}\n"
            f"i_ab: {fmt(sec.i_ab)}\ni_ae: {fmt(sec.i_ae)}\ngllp rate: {fmt(sec.gllp_rate)}\n"
            f"threshold qber: {fmt(sec.threshold_qber)}\n"
        )
    budget = check_dark_count_budget(config.detector, args.mu, args.eta)
    summary += f"dark-count budget: {fmt(budget.background)} < {fmt(budget.allowance)} {'pass' if budget.passed else 'FAIL'}\n"
    write_text(files["report"], summary)

    manifest = {
        "command": "simulate",
        "mu": args.mu,
        "mu_prime": args.mu_prime,
        "eta": args.eta,
        "pulses": args.pulses,
        "ports": args.ports,
        "e_dark": args.e_dark,
        "attack": args.attack,
        "substitute": args.substitute,
        "attack_qber": args.attack_qber,
        "error_rate": args.error_rate,
        "signal_fraction": args.signal_fraction,
        "seed": args.seed,
        "chunk_size": config.chunk_size,
        "version": __version__,
        **{f"output_{k}": str(v) for k, v in files.items()},
    }
    write_text(files["manifest"], manifest_text(manifest))
    sys.stdout.write(summary)
    return {
        Verdict.SECURE: EXIT_OK,
        Verdict.EAVESDROPPER_DETECTED: EXIT_DETECTED,
        Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    }[report.overall_verdict]


def cmd_threshold(args: argparse.Namespace) -> int:
    rows = [(mu, security_threshold(mu, args.tol).qber) for mu in args.mu]
    text = csv_text(["mu", "threshold_qber"], rows)
    _emit(text, args.out, {"command": "threshold", "mu": ",".join(fmt(m) for m in args.mu), "tol": args.tol})
    return EXIT_OK


def cmd_fig2(args: argparse.Namespace) -> int:
    header = ["e", "i_ab", *(f"i_ae_mu={fmt(mu)}" for mu in args.mu)]
    rows = []
    for e in qber_grid():
        e = float(e)
        rows.append([e, info_ab(e), *(info_ae(e, mu) for mu in args.mu)])
    text = csv_text(header, rows)
    _emit(text, args.out, {"command": "fig2", "mu": ",".join(fmt(m) for m in args.mu)})
    return EXIT_OK


def cmd_solver(args: argparse.Namespace) -> int:
    sol = solve_blocking_distribution(args.mu, args.mu_prime, args.eta, args.n_max)
    inf = sol.infeasibility
    notes = (
        f"# P_Eve(1) exact = {fmt(sol.p_eve_1)}, first order = {fmt(sol.p_eve_1_first_order)}\n"
        f"# P_Eve(2) = {fmt(sol.p_eve_2)}, first order = {fmt(sol.p_eve_2_first_order)}\n"
        f"# two-photon excess under naive blocking: {fmt(inf.left)} > {fmt(inf.right)} is {inf.holds}\n"
        f"# pulse-level blocking consistent for both intensities: {sol.cascade_consistent}\n"
        f"# per-photon capture solution feasible: {sol.feasible}\n"
    )
    text = sol.to_csv()
    _emit(text, args.out, {"command": "solver", "mu": args.mu, "mu_prime": args.mu_prime, "eta": args.eta, "n_max": args.n_max})
    sys.stderr.write(notes) if args.out is None else sys.stdout.write(notes)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "threshold": cmd_threshold, "fig2": cmd_fig2, "solver": cmd_solver}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, DegenerateChannelError, ValueError) as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
