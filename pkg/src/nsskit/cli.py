"""Command-line front end.

Subcommands: ``scatter``, ``jost``, ``perturb``, ``sweep``, ``figure1``,
``threshold``, ``validate``.  All numeric output is CSV with
round-trippable floats (``repr``); commands that write files also drop
a JSON run manifest next to them.  Exit codes: 0 success, 1 usage or
configuration trouble, 2 a resonance was hit (diverging amplitudes),
3 validation failure.  Set ``NSSKIT_LOG=DEBUG`` (or INFO/WARNING) for
logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, validation
from .integrator import IntegrationError, integrate, write_trajectory
from .model import (
    ConfigError,
    Kerr,
    Power,
    ProblemConfig,
    WaveState,
    load_config,
)
from .nss import CONVERGED, FAILED, GAP, SweepResult, nonlinearity_threshold, sweep_k
from .perturbation import perturbative_nss
from .scattering import DivergentAmplitude, jost_left, jost_right, rt_amplitudes

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESONANCE = 2
EXIT_VALIDATION = 3

FIGURE1_POSITIONS = ((2, 0.5), (3, 1.0 / 3.0), (4, 0.25), (5, 0.2))
FIGURE1_STRENGTH_RE = 1e-4

logger = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; keep 2 reserved for resonances
    def error(self, message):
        raise _UsageError(message)


@dataclass
class RunManifest:
    command: str
    config_path: str
    parameters: dict
    output_paths: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    tool_version: str = __version__


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path_or_none, header: str, rows: list[str], default=sys.stdout) -> None:
    text = header + "\n" + "".join(r + "\n" for r in rows)
    if path_or_none is None:
        default.write(text)
    else:
        Path(path_or_none).write_text(text, encoding="utf-8")


def _sweep_rows(result: SweepResult) -> list[str]:
    rows = []
    for e in result.entries:
        if e.status == CONVERGED:
            p = e.point
            cells = [p.k / math.pi, p.gamma_f, p.strength_im, p.amplitude, p.residual, True]
        elif e.status in (GAP, FAILED):
            cells = [e.k_over_pi, e.gamma_f_seed, e.strength_im_seed, None, None, False]
        else:  # guard band or out of the first-order regime
            cells = [e.k_over_pi, None, None, None, None, False]
        rows.append(",".join(_fmt(c) for c in cells))
    return rows


SWEEP_HEADER = "k_over_pi,gamma_f,s,amplitude,residual,converged"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="problem configuration file (key = value)")
    parser.add_argument("--ode-tol", type=float, help="override the integrator tolerance")
    parser.add_argument("--out", help="directory for output files (default: stdout)")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument(
        "--seed-mode",
        choices=("perturbative", "continuation"),
        default="perturbative",
        help="Newton seeding strategy for sweeps",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="nsskit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nsskit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="reflection/transmission amplitudes at one k")
    _add_common(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--amp-left", type=complex, default=1 + 0j,
                   help="left Jost boundary value at x=0 (python complex syntax)")
    p.add_argument("--amp-right", type=complex, default=1 + 0j,
                   help="right Jost boundary value at x=1")

    p = sub.add_parser("jost", help="one Jost continuation across the interval")
    _add_common(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--amp", type=complex, default=1 + 0j)
    p.add_argument("--trajectory", help="write the accepted-step trajectory CSV here")

    p = sub.add_parser("perturb", help="first-order resonance prediction at (k, a, r)")
    _add_common(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--r", type=float, required=True)

    p = sub.add_parser("sweep", help="chart resonances over a wavenumber grid")
    _add_common(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--profile", choices=("kerr", "power"), default="kerr")
    p.add_argument("--profile-param", type=float, help="exponent for the power profile")
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--kpi-min", type=float, default=1.0 / 400.0, help="grid start in k/pi")
    p.add_argument("--kpi-max", type=float, default=10.0, help="grid end in k/pi")
    p.add_argument("--kpi-step", type=float, default=1.0 / 400.0, help="grid step in k/pi")

    p = sub.add_parser("figure1", help="resonance charts for a = 1/2, 1/3, 1/4, 1/5")
    _add_common(p)
    p.add_argument("--kpi-max", type=float, default=10.0)
    p.add_argument("--kpi-step", type=float, default=1.0 / 400.0)

    p = sub.add_parser("threshold", help="minimum |gamma_f| supporting a resonance")
    _add_common(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k-min", type=float, help="raise the scan start above the critical k")

    p = sub.add_parser("validate", help="run the cross-oracle validation suites")
    _add_common(p)

    return parser


def _load(args) -> ProblemConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = load_config(args.config)
    if args.ode_tol is not None:
        config = ProblemConfig(
            potential=config.potential,
            gamma=config.gamma,
            profile=config.profile,
            ode_tol=args.ode_tol,
            max_steps=config.max_steps,
        )
    return config


def _manifest(args, rows_written: list[str], t0: float) -> None:
    if args.out is None:
        return
    manifest = RunManifest(
        command=args.command,
        config_path=args.config or "",
        parameters={
            k: v for k, v in vars(args).items() if k != "command" and not callable(v)
        },
        output_paths=rows_written,
        wall_time=time.time() - t0,
    )
    path = Path(args.out) / "run_manifest.json"
    path.write_text(json.dumps(asdict(manifest), default=str, indent=2), encoding="utf-8")


def _out_path(args, name: str):
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def cmd_scatter(args) -> int:
    t0 = time.time()
    config = _load(args)
    left = jost_left(config, args.k, args.amp_left)
    right = jost_right(config, args.k, args.amp_right)
    amps = rt_amplitudes(left, right)
    header = "k,re_Rl,im_Rl,re_Tl,im_Tl,re_Rr,im_Rr,re_Tr,im_Tr"
    cells = [args.k]
    for z in (amps.r_left, amps.t_left, amps.r_right, amps.t_right):
        cells.extend((z.real, z.imag))
    path = _out_path(args, "scatter.csv")
    _write_rows(path, header, [",".join(_fmt(c) for c in cells)])
    _manifest(args, [str(path)] if path else [], t0)
    return EXIT_OK


def cmd_jost(args) -> int:
    t0 = time.time()
    config = _load(args)
    outputs = []
    if args.side == "left":
        jost = jost_left(config, args.k, args.amp)
        values = (jost.psi_end, jost.dpsi_end, jost.f_plus, jost.f_minus)
        header = "k,side,re_psi1,im_psi1,re_dpsi1,im_dpsi1,re_F_plus,im_F_plus,re_F_minus,im_F_minus"
    else:
        jost = jost_right(config, args.k, args.amp)
        values = (jost.psi_start, jost.dpsi_start, jost.g_plus, jost.g_minus)
        header = "k,side,re_psi0,im_psi0,re_dpsi0,im_dpsi0,re_G_plus,im_G_plus,re_G_minus,im_G_minus"
    cells = [args.k, args.side]
    for z in values:
        cells.extend((z.real, z.imag))
    path = _out_path(args, "jost.csv")
    _write_rows(path, header, [",".join(_fmt(c) for c in cells)])
    if path:
        outputs.append(str(path))
    if args.trajectory:
        start = 0.0 if args.side == "left" else 1.0
        initial = WaveState(start, args.amp, (-1j if args.side == "left" else 1j) * args.k * args.amp)
        result = integrate(config, args.k, start, 1.0 - start, initial, want_trajectory=True)
        with open(args.trajectory, "w", encoding="utf-8") as fh:
            write_trajectory(result, fh)
        outputs.append(args.trajectory)
    _manifest(args, outputs, t0)
    return EXIT_OK


def cmd_perturb(args) -> int:
    record = perturbative_nss(args.k, args.a, args.r)
    header = "k,a,r,gamma_f,s,valid,violation"
    cells = [
        record.k,
        record.position,
        record.strength_re,
        None if math.isnan(record.gamma_f) else record.gamma_f,
        None if math.isnan(record.strength_im) else record.strength_im,
        record.valid,
        record.violation or "",
    ]
    path = _out_path(args, "perturb.csv")
    _write_rows(path, header, [",".join(_fmt(c) for c in cells)])
    _manifest(args, [str(path)] if path else [], time.time())
    return EXIT_OK


def _grid(kpi_min: float, kpi_max: float, kpi_step: float) -> np.ndarray:
    n = int(round((kpi_max - kpi_min) / kpi_step))
    return (kpi_min + kpi_step * np.arange(n + 1)) * math.pi


def cmd_sweep(args) -> int:
    t0 = time.time()
    profile = Kerr() if args.profile == "kerr" else Power(args.profile_param)
    result = sweep_k(
        args.a,
        args.r,
        args.gamma,
        profile,
        _grid(args.kpi_min, args.kpi_max, args.kpi_step),
        side=args.side,
        seed_mode=args.seed_mode,
        jobs=args.jobs,
        ode_tol=args.ode_tol if args.ode_tol is not None else 1e-10,
    )
    path = _out_path(args, "sweep.csv")
    _write_rows(path, SWEEP_HEADER, _sweep_rows(result))
    _manifest(args, [str(path)] if path else [], t0)
    return EXIT_OK


def _merge_branches(plus: SweepResult, minus: SweepResult) -> list:
    """One row per grid point: whichever coupling sign owns the point."""
    merged = []
    for ep, em in zip(plus.entries, minus.entries):
        merged.append(em if ep.status == GAP else ep)
    return merged


def cmd_figure1(args) -> int:
    t0 = time.time()
    if args.out is None:
        raise ConfigError("figure1 requires --out")
    grid = _grid(args.kpi_step, args.kpi_max, args.kpi_step)
    ode_tol = args.ode_tol if args.ode_tol is not None else 1e-10
    outputs = []
    asym_rows = []
    attempted = 0
    converged = 0
    for label, a in FIGURE1_POSITIONS:
        plus = sweep_k(a, FIGURE1_STRENGTH_RE, 1.0, Kerr(), grid,
                       seed_mode=args.seed_mode, jobs=args.jobs, ode_tol=ode_tol)
        minus = sweep_k(a, FIGURE1_STRENGTH_RE, -1.0, Kerr(), grid,
                        seed_mode=args.seed_mode, jobs=args.jobs, ode_tol=ode_tol)
        entries = _merge_branches(plus, minus)
        rows = _sweep_rows(SweepResult(points=(), asymptotes=(), gaps=(), entries=tuple(entries)))
        path = _out_path(args, f"figure1_a{label}.csv")
        _write_rows(path, SWEEP_HEADER, rows)
        outputs.append(str(path))
        for k in plus.asymptotes:
            asym_rows.append(",".join(_fmt(c) for c in (a, k / math.pi)))
        attempted += sum(1 for e in entries if e.status in (CONVERGED, FAILED))
        converged += sum(1 for e in entries if e.status == CONVERGED)
        logger.info("figure1 a=%s done: %d/%d converged", a, converged, attempted)
    asym_path = _out_path(args, "asymptotes.csv")
    _write_rows(asym_path, "a,k_over_pi", asym_rows)
    outputs.append(str(asym_path))
    _manifest(args, outputs, t0)
    rate = converged / attempted if attempted else 1.0
    if rate < 0.95:
        print(f"figure1: only {rate:.1%} of attempted grid points converged", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_threshold(args) -> int:
    result = nonlinearity_threshold(args.a, args.r, args.k_min)
    header = "a,r,k_min,nt,k_at_min"
    from .nss import critical_k

    k_min = max(critical_k(args.a), args.k_min or 0.0)
    cells = [args.a, args.r, k_min, result.value, result.k_at_min]
    path = _out_path(args, "threshold.csv")
    _write_rows(path, header, [",".join(_fmt(c) for c in cells)])
    _manifest(args, [str(path)] if path else [], time.time())
    return EXIT_OK


def cmd_validate(args) -> int:
    ode_tol = args.ode_tol if args.ode_tol is not None else 1e-10
    reports = validation.run_all(ode_tol)
    payload = {
        "ode_tol": ode_tol,
        "suites": {r.name: {"passed": r.passed, "detail": r.detail} for r in reports},
        "passed": all(r.passed for r in reports),
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK if payload["passed"] else EXIT_VALIDATION


_COMMANDS = {
    "scatter": cmd_scatter,
    "jost": cmd_jost,
    "perturb": cmd_perturb,
    "sweep": cmd_sweep,
    "figure1": cmd_figure1,
    "threshold": cmd_threshold,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    level = os.environ.get("NSSKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"nsskit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except DivergentAmplitude as exc:
        print(f"nsskit: resonance: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    except (ConfigError, OSError, ValueError, IntegrationError) as exc:
        print(f"nsskit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
