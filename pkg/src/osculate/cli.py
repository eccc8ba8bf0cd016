"""Command-line interface: ``osculate {propagate,elements,brackets,varconst,verify}``.

Exit codes: 0 success, 1 runtime or check failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import brackets as br
from . import verify
from .config import ScenarioConfig, load_config
from .dynsys import flow_trajectory
from .errors import ConfigError, OsculateError
from .kepler import (
    ELEMENT_NAMES,
    OrbitalElements,
    PhaseState,
    elements_from_state,
    kepler_field,
    kepler_hamiltonian,
    orbital_period,
    state_from_elements,
)
from .motions import kepler_chart
from .varconst import (
    DisturbingFunction,
    direct_perturbed,
    integrate_varconst,
    inverse_square,
    reconstruct_trajectory,
    rotating_dipole,
    third_body,
    zero_disturbance,
)

FMT = "%.17g"
PHASE_COLUMNS = ["t", "x", "y", "z", "px", "py", "pz"]


def disturbing_function(cfg: ScenarioConfig) -> DisturbingFunction:
    pert = cfg.perturbation
    if pert.kind == "none":
        return zero_disturbance()
    if pert.kind == "inverse_square":
        return inverse_square(pert.epsilon)
    if pert.kind == "rotating_dipole":
        return rotating_dipole(pert.epsilon, pert.omega)
    tb = pert.third_body
    return third_body(pert.epsilon, tb.mu, tb.radius, tb.phase, cfg.mu)


def write_table(path: Optional[str], title: str, cfg: ScenarioConfig, columns, rows) -> str:
    """CSV with '#' header lines naming the columns and the config digest."""
    buf = io.StringIO()
    buf.write(f"# osculate {title}\n")
    buf.write(f"# config_sha256_16: {cfg.digest()}\n")
    buf.write("# columns: " + ",".join(columns) + "\n")
    np.savetxt(buf, np.asarray(rows, dtype=float), fmt=FMT, delimiter=",")
    text = buf.getvalue()
    _emit(path, text)
    return text


def _emit(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _derived_path(base: Optional[str], explicit: Optional[str], suffix: str) -> Optional[str]:
    if explicit is not None:
        return explicit
    if base is None:
        return None
    p = Path(base)
    return str(p.with_name(f"{p.stem}_{suffix}{p.suffix or '.csv'}"))


# -- subcommands ---------------------------------------------------------------


def cmd_propagate(cfg: ScenarioConfig, args) -> int:
    x0 = cfg.initial_state().vector
    t0, t1 = cfg.span.t0, cfg.end_time()
    dist = disturbing_function(cfg)
    if cfg.perturbation.kind == "none":
        traj = flow_trajectory(kepler_field(cfg.model), t0, x0, t1, cfg.integrator_config, cfg.span.samples)
    else:
        traj = direct_perturbed(cfg.model, dist, x0, t0, t1, cfg.integrator_config, cfg.span.samples)
    rows = []
    for t, x in zip(traj.times, traj.states):
        energy = kepler_hamiltonian(x, cfg.model) - dist(t, x[:3])
        rows.append([t, *x, np.linalg.norm(x[:3]), energy])
    write_table(cfg.output.path, f"propagate {dist.name}", cfg, PHASE_COLUMNS + ["r", "energy"], rows)
    return 0


def cmd_elements(cfg: ScenarioConfig, args) -> int:
    model = cfg.model
    out = []
    if cfg.state is not None:
        st = cfg.initial_state()
        el = elements_from_state(st, model)
        out += [f"{n}={FMT % getattr(el, n)}" for n in ELEMENT_NAMES]
        out += [f"epoch={FMT % el.epoch}", f"degenerate={el.degenerate}"]
        out.append(f"period={FMT % orbital_period(el, model)}")
        if args.round_trip:
            back = state_from_elements(el, model, st.t).vector
            out.append(f"round_trip_residual={FMT % float(np.max(np.abs(back - st.vector)))}")
    else:
        cfg.require_initial()
        e = cfg.elements
        el = OrbitalElements(e.sma, e.ecc, e.inc, e.raan, e.argp, e.m0, e.epoch)
        t = args.t if args.t is not None else el.epoch
        st = state_from_elements(el, model, t)
        out += [f"t={FMT % st.t}"]
        out += [f"{n}={FMT % v}" for n, v in zip(PHASE_COLUMNS[1:], st.vector)]
        if args.round_trip:
            back = elements_from_state(st, model, epoch=el.epoch).as_array()
            d = back - el.as_array()
            d[3:] = (d[3:] + np.pi) % (2 * np.pi) - np.pi
            out.append(f"round_trip_residual={FMT % float(np.max(np.abs(d)))}")
    print("\n".join(out))
    return 0


def cmd_brackets(cfg: ScenarioConfig, args) -> int:
    el = cfg.initial_elements()
    chart = kepler_chart(cfg.model, epoch=el.epoch, fd_step=cfg.fd.chart_step)
    t = cfg.brackets.t
    bm = br.bracket_matrices(chart, el, t)
    lines = [
        "# osculate brackets",
        f"# config_sha256_16: {cfg.digest()}",
        "# element order: " + ",".join(ELEMENT_NAMES),
        f"# t: {FMT % t}",
        "# lagrange",
    ]
    lines += [",".join(FMT % v for v in row) for row in bm.lagrange]
    lines.append("# poisson")
    lines += [",".join(FMT % v for v in row) for row in bm.poisson]
    lines.append(f"# inverse_residual: {FMT % bm.inverse_residual}")
    lines.append(f"# darboux_residual: {FMT % br.darboux_pullback_residual(chart, el, t)}")
    t_other = cfg.brackets.t_other
    if t_other is None:
        t_other = t + orbital_period(el, cfg.model)
    lines.append(f"# t_other: {FMT % t_other}")
    lines.append(
        f"# time_independence_residual: {FMT % br.time_independence_residual(chart, el, t, t_other)}"
    )
    _emit(cfg.output.path, "\n".join(lines) + "\n")
    return 0


def cmd_varconst(cfg: ScenarioConfig, args) -> int:
    el = cfg.initial_elements()
    t0, t1 = cfg.span.t0, cfg.end_time()
    chart = kepler_chart(cfg.model, epoch=t0, fd_step=cfg.fd.chart_step)
    dist = disturbing_function(cfg)
    icfg = cfg.integrator_config
    n = cfg.span.samples
    etraj = integrate_varconst(chart, dist, el, t0, t1, icfg, n)
    rec = reconstruct_trajectory(chart, etraj)
    direct = direct_perturbed(cfg.model, dist, chart.to_phase(el.as_array(), t0), t0, t1, icfg, n)
    base = cfg.output.path
    out = cfg.output
    write_table(
        _derived_path(base, out.elements_path, "elements"),
        f"varconst elements {dist.name}",
        cfg,
        ["t", *ELEMENT_NAMES],
        np.column_stack([etraj.times, etraj.elements]),
    )
    write_table(
        _derived_path(base, out.reconstructed_path, "reconstructed"),
        f"varconst reconstructed {dist.name}",
        cfg,
        PHASE_COLUMNS,
        np.column_stack([rec.times, rec.states]),
    )
    write_table(
        _derived_path(base, out.direct_path, "direct"),
        f"varconst direct {dist.name}",
        cfg,
        PHASE_COLUMNS,
        np.column_stack([direct.times, direct.states]),
    )
    dev = float(np.max(np.abs(rec.states[:, :3] - direct.states[:, :3])))
    print(f"max_position_deviation={FMT % dev}")
    return 0


def cmd_verify(args) -> int:
    checks = verify.select(args.filter)
    if not checks:
        print(f"no checks match filter {args.filter!r}", file=sys.stderr)
        return 2
    opts = verify.VerifyOptions(seed=args.seed, corrupt_sign=args.corrupt_sign)
    results = verify.run_checks(checks, opts, jobs=args.jobs)
    print(verify.format_table(results))
    return 0 if all(r.passed for r in results) else 1


# -- argument parsing ----------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="JSON scenario file")
    p.add_argument("--mu", type=float)
    p.add_argument("--elements", type=_floats, metavar="SMA,ECC,INC,RAAN,ARGP,M0")
    p.add_argument("--epoch", type=float, help="epoch of --elements")
    p.add_argument("--state", type=_floats, metavar="X,Y,Z,PX,PY,PZ")
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--periods", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--kind", choices=["none", "inverse_square", "rotating_dipole", "third_body"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--chart-step", type=float)
    p.add_argument("-o", "--out", help="output path")


_OVERRIDES = {
    "mu": "mu",
    "t0": "span.t0",
    "t1": "span.t1",
    "periods": "span.periods",
    "samples": "span.samples",
    "kind": "perturbation.kind",
    "epsilon": "perturbation.epsilon",
    "omega": "perturbation.omega",
    "rel_tol": "integrator.rel_tol",
    "abs_tol": "integrator.abs_tol",
    "chart_step": "fd.chart_step",
    "out": "output.path",
}


def _overrides(args) -> dict:
    ov = {dotted: getattr(args, k) for k, dotted in _OVERRIDES.items() if getattr(args, k, None) is not None}
    if args.elements is not None:
        if len(args.elements) != 6:
            raise ConfigError("--elements needs 6 values")
        for name, v in zip(ELEMENT_NAMES, args.elements):
            ov[f"elements.{name}"] = v
        if args.epoch is not None:
            ov["elements.epoch"] = args.epoch
    if args.state is not None:
        if len(args.state) != 6:
            raise ConfigError("--state needs 6 values")
        ov["state.q"] = args.state[:3]
        ov["state.p"] = args.state[3:]
        ov["state.t"] = args.t0 if args.t0 is not None else 0.0
    if getattr(args, "bracket_t", None) is not None:
        ov["brackets.t"] = args.bracket_t
    if getattr(args, "t_other", None) is not None:
        ov["brackets.t_other"] = args.t_other
    return ov


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osculate",
        description="Variation of constants for perturbed Kepler motion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="integrate a Kepler or perturbed trajectory to CSV")
    _scenario_args(p)

    p = sub.add_parser("elements", help="convert between elements and phase state")
    _scenario_args(p)
    p.add_argument("--t", type=float, help="time at which to evaluate the state")
    p.add_argument("--round-trip", action="store_true", help="print the round-trip residual")

    p = sub.add_parser("brackets", help="Lagrange and Poisson matrices with residuals")
    _scenario_args(p)
    p.add_argument("--at", dest="bracket_t", type=float, help="evaluation time")
    p.add_argument("--t-other", type=float, help="second time for the time-independence residual")

    p = sub.add_parser("varconst", help="integrate the element rates and compare with direct integration")
    _scenario_args(p)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--filter", help="group (kepler, dynsys, motions, brackets, varconst) or name substring")
    p.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--corrupt-sign", action="store_true", help=argparse.SUPPRESS)
    return parser


_COMMANDS = {
    "propagate": cmd_propagate,
    "elements": cmd_elements,
    "brackets": cmd_brackets,
    "varconst": cmd_varconst,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    try:
        cfg = load_config(args.config, _overrides(args))
        if args.command in ("propagate", "varconst"):
            cfg.require_initial()
            cfg.end_time()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OsculateError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
