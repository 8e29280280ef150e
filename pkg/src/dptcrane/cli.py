"""``crane`` command-line front end.

Exit codes: 0 ok, 2 config error, 3 uncontrollable, 4 placement failed,
5 singular configuration, 6 no valid region-of-attraction radius (this
includes a closed loop that is not Hurwitz).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .config import ScenarioConfig, figure_preset
from .errors import (
    InvalidParameters,
    NotHurwitz,
    NoValidRadius,
    PlacementFailed,
    SingularConfiguration,
    Uncontrollable,
)
from .pipeline import compare_scenarios, design, linearize, raise_if_failed, run_scenario, write_outputs
from .sim import IntegratorOptions, energy_audit, integrate_open_loop, read_trajectory_csv
from .synthesis import PoleSet, closed_loop_eigs

EXIT_OK, EXIT_CONFIG, EXIT_UNCONTROLLABLE, EXIT_PLACEMENT, EXIT_SINGULAR, EXIT_NO_RADIUS = 0, 2, 3, 4, 5, 6

_EXIT_FOR = [
    (InvalidParameters, EXIT_CONFIG),
    (Uncontrollable, EXIT_UNCONTROLLABLE),
    (PlacementFailed, EXIT_PLACEMENT),
    (NotHurwitz, EXIT_NO_RADIUS),
    (SingularConfiguration, EXIT_SINGULAR),
    (NoValidRadius, EXIT_NO_RADIUS),
]


def _floats(text):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _poles(text):
    try:
        return PoleSet(np.array([complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip()]))
    except (ValueError, InvalidParameters) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_scenario_args(p, multi=False):
    action = "append" if multi else "store"
    p.add_argument("--config", action=action, help="scenario JSON file")
    p.add_argument("--figure", action=action, type=int, help="reference figure preset (3, 5, 6 or 8)")
    p.add_argument("--variant", choices=["underactuated", "fully_actuated"])
    p.add_argument("--poles", type=_poles, help="comma-separated closed-loop poles, e.g. -1,-2,-1+2j,-1-2j")
    p.add_argument("--x0", type=_floats, help="comma-separated initial state (8 values)")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--gains", choices=["place", "reference"], help="place poles or use the printed reference gains")
    p.add_argument("--samples", type=int, help="sample count for the remainder bound")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".", help="output directory")


def _resolve(args, idx=0) -> ScenarioConfig:
    configs = args.config if isinstance(args.config, list) else ([args.config] if args.config else [])
    figures = args.figure if isinstance(args.figure, list) else ([args.figure] if args.figure else [])
    sources = [("config", c) for c in configs] + [("figure", f) for f in figures]
    if idx < len(sources):
        kind, val = sources[idx]
        cfg = ScenarioConfig.load(val) if kind == "config" else figure_preset(val)
    else:
        cfg = figure_preset(3) if not sources else None
        if cfg is None:
            raise InvalidParameters("compare needs two scenarios (--config/--figure twice)")
    return cfg.with_overrides(
        variant=args.variant,
        poles=args.poles,
        x0=tuple(args.x0) if args.x0 else None,
        t_end=args.t_end,
        gains=args.gains,
        n_samples=args.samples,
        seed=args.seed,
    )


def _fmt_matrix(M, fmt="{:>12.5g}"):
    return "\n".join("  " + " ".join(fmt.format(v) for v in row) for row in np.atleast_2d(M))


def _fmt_eigs(eigs):
    return ", ".join(f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}j" for z in eigs)


def cmd_linearize(args):
    cfg = _resolve(args)
    m, dev = linearize(cfg)
    print(f"variant: {cfg.variant.value}")
    print("A =\n" + _fmt_matrix(m.A))
    print("B =\n" + _fmt_matrix(m.B))
    print(f"max |analytic - finite difference| = {dev:.3e}")
    _dump(args.out, "linearization.json", {"variant": cfg.variant.value, "A": m.A.tolist(),
                                           "B": m.B.tolist(), "fd_max_deviation": dev})
    return EXIT_OK


def cmd_check(args):
    cfg = _resolve(args)
    from .linmodel import analytic_linearization
    from .synthesis import controllability_rank

    m = analytic_linearization(cfg.params, cfg.variant)
    rank = controllability_rank(m)
    print(f"variant: {cfg.variant.value}  controllability rank: {rank} / {m.n_states}")
    return EXIT_OK if rank == m.n_states else EXIT_UNCONTROLLABLE


def cmd_place(args):
    cfg = _resolve(args)
    m, rank, gain = design(cfg)
    eigs = closed_loop_eigs(m, gain.K)
    print(f"variant: {cfg.variant.value}  rank: {rank}  gain source: {cfg.gains}")
    print("K =\n" + _fmt_matrix(gain.K))
    print("closed-loop eigenvalues: " + _fmt_eigs(eigs))
    _dump(args.out, "gain.json", {"variant": cfg.variant.value, "K": gain.K.tolist(),
                                  "closed_loop_eigs": [[z.real, z.imag] for z in eigs]})
    return EXIT_OK


def cmd_certify(args):
    cfg = _resolve(args)
    res = run_scenario(cfg, certify=True, simulate=False)
    cert = res.certificate
    for k, v in cert.to_dict().items():
        print(f"{k:>18}: {v}")
    _dump(args.out, "certificate.json", cert.to_dict())
    return EXIT_OK


def _print_summary(s):
    sim = s["simulation"] or {}
    cert = s["certificate"] or {}
    rows = [
        ("scenario", s["config"]["name"]),
        ("variant", s["config"]["variant"]),
        ("controllability rank", s["controllability_rank"]),
        ("max eigenvalue error", f"{s['max_eig_error']:.3e}"),
        ("ROA radius gamma_hat", f"{cert.get('gamma_hat', float('nan')):.4g}"),
        ("certificate margin", f"{cert.get('margin', float('nan')):.4g}"),
        ("simulation", "completed" if sim.get("success") else sim.get("message")),
        ("settling time (2%)", sim.get("settling_time")),
        ("final |x|", f"{sim.get('final_state_norm', float('nan')):.3e}"),
        ("energy audit", f"{sim.get('energy_audit') or float('nan'):.3e}"),
    ]
    for name, F in (sim.get("terminal_forces") or {}).items():
        rows.append((f"terminal {name}", f"{F:.6g}"))
    for name, F in (sim.get("peak_abs_forces") or {}).items():
        rows.append((f"peak |{name}|", f"{F:.6g}"))
    width = max(len(r[0]) for r in rows)
    for name, val in rows:
        print(f"{name:<{width}}  {val}")


def cmd_run(args):
    cfg = _resolve(args)
    res = run_scenario(cfg)
    summary = write_outputs(res, args.out)
    _print_summary(summary)
    raise_if_failed(res.trajectory)
    return EXIT_OK


def cmd_compare(args):
    a, b = _resolve(args, 0), _resolve(args, 1)
    ra = run_scenario(a, certify=False)
    rb = run_scenario(b, certify=False)
    report = compare_scenarios(ra, rb)
    print(f"{'':<16}{a.name:>16}{b.name:>16}")
    print(f"{'variant':<16}{a.variant.value:>16}{b.variant.value:>16}")
    print(f"{'settling time':<16}{str(report['a']['settling_time']):>16}{str(report['b']['settling_time']):>16}")
    red = report["reduction_percent"]
    print(f"reduction: {'n/a' if red is None else f'{red:.1f}%'}")
    div = report["divergence"]
    print(f"max state divergence: {'n/a' if div is None else f'{div:.6g}'}")
    _dump(args.out, "compare.json", report)
    return EXIT_OK


def cmd_energy_audit(args):
    cfg = _resolve(args)
    if args.csv:
        tr = read_trajectory_csv(args.csv, cfg.params)
        label = args.csv
    elif args.open_loop:
        t_end = args.t_end if args.t_end is not None else 10.0
        opts = IntegratorOptions(rel_tol=1e-10, abs_tol=1e-12, t_end=t_end)
        tr = integrate_open_loop(cfg.params, np.zeros(4), cfg.x0, opts)
        label = "open loop, zero forces"
    else:
        res = run_scenario(cfg, certify=False)
        tr = res.trajectory
        label = cfg.name
    audit = energy_audit(tr)
    print(f"{label}: max normalized work-energy imbalance = {audit:.3e}")
    _dump(args.out, "energy_audit.json", {"source": label, "energy_audit": audit})
    return EXIT_OK


def cmd_plot_script(args):
    cfg = _resolve(args)
    csv_path = args.csv or os.path.join(args.out, cfg.csv)
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set multiplot layout 2,1",
        "set xlabel 't'",
        f"plot for [i=2:9] '{csv_path}' using 1:i with lines",
        f"plot for [i=10:13] '{csv_path}' using 1:i with lines",
        "unset multiplot",
    ]
    text = "\n".join(lines) + "\n"
    if args.script:
        with open(args.script, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _dump(out_dir, name, data):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crane", description="Double-pendulum crane controller design and simulation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in [
        ("linearize", cmd_linearize, "print the origin linearization and its finite-difference check"),
        ("check", cmd_check, "Kalman controllability rank test"),
        ("place", cmd_place, "pole placement"),
        ("certify", cmd_certify, "sample-certified region of attraction"),
        ("run", cmd_run, "full pipeline; writes trajectory CSV and summary JSON"),
    ]:
        p = sub.add_parser(name, help=helptext)
        _add_scenario_args(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("compare", help="compare two scenarios (give --config/--figure twice)")
    _add_scenario_args(p, multi=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("energy-audit", help="work-energy balance of a run")
    _add_scenario_args(p)
    p.add_argument("--open-loop", action="store_true", help="audit an unforced open-loop run from x0")
    p.add_argument("--csv", help="audit an existing trajectory CSV instead of simulating")
    p.set_defaults(func=cmd_energy_audit)

    p = sub.add_parser("plot-script", help="emit a gnuplot script for a trajectory CSV")
    _add_scenario_args(p)
    p.add_argument("--csv", help="CSV to plot (default: <out>/<scenario csv>)")
    p.add_argument("--script", help="write the script here instead of stdout")
    p.set_defaults(func=cmd_plot_script)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except tuple(e for e, _ in _EXIT_FOR) as exc:
        code = next(c for e, c in _EXIT_FOR if isinstance(exc, e))
        print(f"crane: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
