"""Command-line interface: generate, solve, verify, and sweep subcommands."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, io
from .decouple import build_channel
from .errors import (
    DivergedError,
    InadmissibleError,
    InvalidParamsError,
    NotConvergedError,
    TwoChanError,
)
from .model import gap_report, generate_instance
from .riccati import SolverConfig, conjugate_solution, solve
from .verify import ToleranceProfile, full_report

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2
EXIT_NOT_CONVERGED = 3
EXIT_DIVERGED = 4
EXIT_INADMISSIBLE = 5

_EPILOG = """exit codes:
  0  success (for verify: every check passed)
  1  invalid parameters, unreadable or malformed files
  2  verify: at least one check failed
  3  solve: iteration budget exhausted before convergence
  4  solve: iterate escaped the divergence guard
  5  solve: coupling bound violated and --allow-inadmissible not given
"""

_SUMMARY_COLUMNS = [
    "n1",
    "n2",
    "gap",
    "coupling_scale",
    "seed",
    "iterations",
    "max_defect",
    "verdict",
]


class _Parser(argparse.ArgumentParser):
    # argparse's default usage-error code would collide with the verify
    # verdict code, so usage errors are remapped to the generic error code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _err(message) -> None:
    print(f"twochan: error: {message}", file=sys.stderr)


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", "-o", default=None, help="output path (file or directory, command dependent)")
    parser.add_argument("--quiet", "-q", action="store_true", help="suppress progress output")
    parser.add_argument(
        "--tol-profile",
        default=None,
        metavar="FILE",
        help="JSON object with tolerance overrides for verification checks",
    )
    parser.add_argument(
        "--summary",
        action="store_true",
        help="render the aligned text summary even when --quiet is set",
    )


def _solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta", type=float, default=1.0, help="ball radius for the contraction bound (default 1)")
    parser.add_argument("--tol", type=float, default=None, help="residual tolerance (default 1e-12 * max(1, |B|))")
    parser.add_argument("--max-iter", type=int, default=500, help="iteration budget (default 500)")
    parser.add_argument(
        "--divergence-guard",
        type=float,
        default=1e3,
        help="abort when the iterate operator norm exceeds this (default 1e3)",
    )
    parser.add_argument(
        "--allow-inadmissible",
        action="store_true",
        help="attempt the iteration even when the coupling bound fails (result is not guaranteed)",
    )


def _config_from(args) -> SolverConfig:
    return SolverConfig(
        delta=args.delta,
        max_iterations=args.max_iter,
        residual_tol=args.tol,
        divergence_guard=args.divergence_guard,
    )


def _tolerances_from(args, base: dict | None = None) -> ToleranceProfile:
    overrides = dict(base or {})
    if args.tol_profile:
        try:
            text = Path(args.tol_profile).read_text(encoding="utf-8")
            loaded = json.loads(text)
        except OSError as exc:
            raise InvalidParamsError(f"{args.tol_profile}: cannot read tolerance profile: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidParamsError(
                f"{args.tol_profile}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
            ) from None
        if not isinstance(loaded, dict):
            raise InvalidParamsError(f"{args.tol_profile}: expected a JSON object of tolerance overrides")
        overrides.update(loaded)
    return ToleranceProfile.from_dict(overrides)


def cmd_generate(args) -> int:
    h = generate_instance(args.n1, args.n2, args.gap, args.coupling_scale, args.seed)
    metadata = {
        "seed": args.seed,
        "gap": args.gap,
        "coupling_scale": args.coupling_scale,
    }
    out = Path(args.output or "instance.json")
    io.write_instance(h, out, metadata)
    rep = gap_report(h)
    _say(
        args,
        f"wrote {out} ({args.n1}+{args.n2} dimensional, gap {rep.d0:.6g}, "
        f"|B| = {rep.b_hs_norm:.6g}, contraction margin {rep.contraction_margin:.6g})",
    )
    return EXIT_OK


def _write_channel_files(h, sol, out_dir: Path) -> list[Path]:
    ch = build_channel(h, sol)
    alpha = sol.alpha
    diagnostics = {
        "iterations": sol.iterations_used,
        "fixed_point_residual": sol.fixed_point_residual,
        "riccati_residual": sol.riccati_residual,
        "q_operator_norm": sol.q_operator_norm,
        "admissible": sol.admissible,
    }
    paths = []
    q_path = out_dir / f"q_ch{alpha}.json"
    io.write_matrix_document(q_path, alpha, "q", sol.q, extra=diagnostics)
    paths.append(q_path)
    h_path = out_dir / f"h_ch{alpha}.json"
    io.write_matrix_document(h_path, alpha, "h", ch.h_alpha)
    paths.append(h_path)
    w_path = out_dir / f"w_ch{alpha}.json"
    io.write_matrix_document(w_path, alpha, "w", ch.w_alpha)
    paths.append(w_path)
    e_path = out_dir / f"eigenvalues_ch{alpha}.json"
    io.write_eigenvalues_document(e_path, alpha, ch.eigenvalues)
    paths.append(e_path)
    return paths


def cmd_solve(args) -> int:
    h, _ = io.read_instance(args.instance)
    cfg = _config_from(args)
    sol1 = solve(h, 1, cfg, allow_inadmissible=args.allow_inadmissible)
    sol = sol1 if args.channel == 1 else conjugate_solution(h, sol1)
    out_dir = Path(args.output or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = _write_channel_files(h, sol, out_dir)
    origin = "converged" if args.channel == 1 else "conjugated from channel 1, which converged"
    _say(
        args,
        f"channel {sol.alpha}: {origin} in {sol.iterations_used} iterations, "
        f"fixed-point residual {sol.fixed_point_residual:.3e}, "
        f"Riccati residual {sol.riccati_residual:.3e}",
    )
    _say(args, "wrote " + " ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_verify(args) -> int:
    h, _ = io.read_instance(args.instance)
    cfg = _config_from(args)
    tol = _tolerances_from(args)
    q_override = None
    if args.q_file:
        q_override, _ = io.read_matrix_document(args.q_file)
    report = full_report(
        h,
        cfg,
        tol,
        allow_inadmissible=args.allow_inadmissible,
        independent_solve=args.independent_solve,
        q_override=q_override,
    )
    instance_path = Path(args.instance)
    out = Path(args.output) if args.output else instance_path.with_name(instance_path.stem + ".report.json")
    out.write_bytes(report.to_json_bytes())
    if not args.quiet or args.summary:
        print(report.render())
    if not args.quiet:
        print(f"wrote {out}")
    return EXIT_OK if report.verdict else EXIT_VERIFY_FAILED


def cmd_sweep(args) -> int:
    spec = io.read_sweep_spec(args.spec)
    try:
        cfg = SolverConfig(**spec.solver)
    except TypeError as exc:
        raise InvalidParamsError(f"{args.spec}: field solver: {exc}") from None
    tol = _tolerances_from(args, base=spec.tolerances)
    out_dir = Path(args.output or spec.output_dir or "sweep")
    out_dir.mkdir(parents=True, exist_ok=True)
    points = spec.points()

    def run_point(point):
        n1, n2, gap, coupling_scale, seed = point
        row = {
            "n1": n1,
            "n2": n2,
            "gap": gap,
            "coupling_scale": coupling_scale,
            "seed": seed,
            "iterations": "",
            "max_defect": "",
            "verdict": "error",
        }
        try:
            inst = generate_instance(n1, n2, gap, coupling_scale, seed)
            report = full_report(
                inst,
                cfg,
                tol,
                allow_inadmissible=spec.allow_inadmissible,
                independent_solve=spec.independent_solve,
            )
            name = f"report_n1-{n1}_n2-{n2}_gap-{gap:g}_cs-{coupling_scale:g}_seed-{seed}.json"
            (out_dir / name).write_bytes(report.to_json_bytes())
            channel1 = report.riccati.get("channel1")
            if channel1:
                row["iterations"] = channel1["iterations"]
            defect = report.max_defect()
            if defect is not None:
                row["max_defect"] = repr(defect)
            verdict = "pass" if report.verdict else "fail"
            if not report.guaranteed:
                verdict += "-nonguaranteed"
            row["verdict"] = verdict
        except TwoChanError as exc:
            row["verdict"] = "error"
            if not args.quiet:
                print(f"point {point}: {exc}", file=sys.stderr)
        return row

    jobs = args.jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        rows = list(pool.map(run_point, points))

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=_SUMMARY_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    if not args.quiet or args.summary:
        print(_render_sweep_table(rows))
    passed = sum(1 for row in rows if row["verdict"].startswith("pass"))
    _say(args, f"swept {len(rows)} points: {passed} pass, {len(rows) - passed} not pass")
    _say(args, f"wrote {summary_path}")
    return EXIT_OK


def _render_sweep_table(rows) -> str:
    header = {name: name for name in _SUMMARY_COLUMNS}
    table = [header] + rows
    widths = {
        name: max(len(str(row[name])) for row in table) for name in _SUMMARY_COLUMNS
    }
    lines = [
        "  ".join(f"{str(row[name]):>{widths[name]}}" for name in _SUMMARY_COLUMNS)
        for row in table
    ]
    defects = [float(row["max_defect"]) for row in rows if row["max_defect"] != ""]
    if defects:
        lines.append(
            f"defects: min {min(defects):.3e}, max {max(defects):.3e}, "
            f"mean {sum(defects) / len(defects):.3e}"
        )
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="twochan",
        description=(
            "Decouple two-channel block Hamiltonians: solve the coupling-block "
            "Riccati equation, build energy-independent channel Hamiltonians, "
            "and verify the spectral claims."
        ),
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser(
        "generate",
        help="write a random admissible instance file",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_gen.add_argument("--n1", type=int, default=4, help="channel-1 dimension (default 4)")
    p_gen.add_argument("--n2", type=int, default=4, help="channel-2 dimension (default 4)")
    p_gen.add_argument("--gap", type=float, default=1.0, help="distance between channel spectra (default 1)")
    p_gen.add_argument(
        "--coupling-scale",
        type=float,
        default=0.5,
        help="coupling norm as a fraction of the admissible bound, in (0, 1) (default 0.5)",
    )
    p_gen.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    _common_flags(p_gen)
    p_gen.set_defaults(func=cmd_generate)

    p_solve = sub.add_parser(
        "solve",
        help="solve one instance and write the channel blocks",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_solve.add_argument("instance", help="instance file to solve")
    p_solve.add_argument(
        "--channel",
        type=int,
        choices=(1, 2),
        default=1,
        help="channel to emit; channel 2 is derived from the channel-1 solution (default 1)",
    )
    _solver_flags(p_solve)
    _common_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser(
        "verify",
        help="run every check on one instance and write a report",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_verify.add_argument("instance", help="instance file to verify")
    p_verify.add_argument(
        "--independent-solve",
        action="store_true",
        help="also solve channel 2 directly and compare with the conjugate solution",
    )
    p_verify.add_argument(
        "--q-file",
        default=None,
        metavar="FILE",
        help="audit this stored channel-1 coupling block instead of solving",
    )
    _solver_flags(p_verify)
    _common_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser(
        "sweep",
        help="verify a grid of generated instances and write a summary table",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_sweep.add_argument("spec", help="sweep specification file")
    p_sweep.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="worker threads (default: available parallelism)",
    )
    _common_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InadmissibleError as exc:
        _err(exc)
        return EXIT_INADMISSIBLE
    except NotConvergedError as exc:
        _err(exc)
        return EXIT_NOT_CONVERGED
    except DivergedError as exc:
        _err(exc)
        return EXIT_DIVERGED
    except TwoChanError as exc:
        _err(exc)
        return EXIT_ERROR
    except OSError as exc:
        _err(exc)
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())
