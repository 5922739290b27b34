"""Command-line front end.

Every option can also be given in a ``key = value`` config file (``--config``);
explicit flags override the file.  Model parameters default to
``a=10, b=0.25, c=2, d=1, alpha=0.92``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import serialize
from .bifurcation import (
    Axis,
    EquilibriumLostError,
    NoSignChangeError,
    SweepSpec,
    critical_bracket,
    fate_map,
    sweep,
)
from .integrate import (
    IntegratorConfig,
    Method,
    NonFiniteDerivativeError,
    StepUnderflowError,
    classify_fate,
    simulate,
)
from .model import ModelParams, ParameterError
from .plotting import PhasePortraitSpec, diagram_svg, fate_map_svg, fmt, phase_portrait_svg
from .stability import boundary_stability_closed_form, classify_all

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "a": 10.0, "b": 0.25, "c": 2.0, "d": 1.0, "alpha": 0.92,
    "u0": 0.5, "v0": 0.5, "workers": 1,
}

METHOD_ALIASES = {"rk4": Method.RK4_FIXED, "adaptive": Method.ADAPTIVE_RK45,
                  "rk4fixed": Method.RK4_FIXED, "adaptiverk45": Method.ADAPTIVE_RK45}


class ConfigError(ValueError):
    pass


class OutputError(OSError):
    pass


def _method(text: str) -> Method:
    try:
        return METHOD_ALIASES[text.strip().lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown method {text!r}; use rk4 or adaptive") from None


def _seeds(text: str) -> tuple[tuple[float, float], ...]:
    try:
        pairs = [p.split(",") for p in text.split(";") if p.strip()]
        return tuple((float(u), float(v)) for u, v in pairs)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must look like 'u,v;u,v', got {text!r}") from None


def _add_model(p: argparse.ArgumentParser):
    g = p.add_argument_group("model parameters")
    for name, help_ in (("a", "prey growth rate"), ("b", "Allee threshold in (-1, 1)"),
                        ("c", "conversion efficiency"), ("d", "predator death rate"),
                        ("alpha", "hunting cooperation")):
        g.add_argument(f"--{name}", type=float, help=help_)


def _add_integrator(p: argparse.ArgumentParser):
    g = p.add_argument_group("integrator")
    g.add_argument("--method", type=_method, help="rk4 or adaptive (default adaptive)")
    g.add_argument("--dt", type=float, help="fixed / initial step")
    g.add_argument("--rel-tol", dest="rel_tol", type=float)
    g.add_argument("--abs-tol", dest="abs_tol", type=float)
    g.add_argument("--t-end", dest="t_end", type=float, help="horizon (default 500)")
    g.add_argument("--max-steps", dest="max_steps", type=int)
    g.add_argument("--extinction-threshold", dest="extinction_threshold", type=float)
    g.add_argument("--convergence-tol", dest="convergence_tol", type=float)


def _add_init(p):
    p.add_argument("--u0", type=float, help="initial prey (default 0.5)")
    p.add_argument("--v0", type=float, help="initial predator (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coophunt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False, argument_default=None)
    common.add_argument("--config", type=Path, help="key = value config file")
    _add_model(common)

    p = sub.add_parser("equilibria", parents=[common], help="list and classify equilibria")
    p.add_argument("--json", type=Path)
    p.add_argument("--no-origin-probe", dest="origin_probe", action="store_false", default=None,
                   help="skip the simulation-based verdict at the origin")

    p = sub.add_parser("stability", parents=[common], help="closed-form and numeric stability report")
    p.add_argument("--json", type=Path)

    p = sub.add_parser("simulate", parents=[common], help="integrate one trajectory")
    _add_integrator(p)
    _add_init(p)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.add_argument("--svg", type=Path, help="phase portrait with this trajectory")

    p = sub.add_parser("sweep", parents=[common], help="one-parameter bifurcation sweep")
    p.add_argument("--target", choices=("a", "b", "c", "d", "alpha"))
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-refine", dest="refine", action="store_false", default=None)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.add_argument("--svg", type=Path)

    p = sub.add_parser("critical", parents=[common], help="locate a stability switch by bisection")
    p.add_argument("--target", choices=("a", "b", "c", "d", "alpha"))
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--json", type=Path)

    p = sub.add_parser("fate-map", parents=[common], help="grid of simulated long-run fates")
    _add_integrator(p)
    _add_init(p)
    for ax in ("x", "y"):
        p.add_argument(f"--{ax}-target", dest=f"{ax}_target",
                       choices=("a", "b", "c", "d", "alpha", "u0", "v0"))
        p.add_argument(f"--{ax}-lo", dest=f"{ax}_lo", type=float)
        p.add_argument(f"--{ax}-hi", dest=f"{ax}_hi", type=float)
        p.add_argument(f"--{ax}-steps", dest=f"{ax}_steps", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.add_argument("--svg", type=Path)

    p = sub.add_parser("phase", parents=[common], help="SVG phase portrait")
    _add_integrator(p)
    p.add_argument("--svg", type=Path, required=False)
    p.add_argument("--u-min", dest="u_min", type=float)
    p.add_argument("--u-max", dest="u_max", type=float)
    p.add_argument("--v-min", dest="v_min", type=float)
    p.add_argument("--v-max", dest="v_max", type=float)
    p.add_argument("--arrows", type=int)
    p.add_argument("--nullcline-samples", dest="nullcline_samples", type=int)
    p.add_argument("--seeds", type=_seeds, help="'u,v;u,v;...'")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--traj-t-end", dest="traj_t_end", type=float)
    return parser


COMMAND_DEFAULTS = {
    "equilibria": {"origin_probe": True},
    "sweep": {"target": "alpha", "lo": 0.8, "hi": 1.0, "steps": 41, "refine": True},
    "critical": {"target": "alpha", "lo": 0.8, "hi": 1.0, "tol": 1e-4},
    "fate-map": {"x_target": "alpha", "x_lo": 0.8, "x_hi": 1.2, "x_steps": 21,
                 "y_target": "b", "y_lo": 0.1, "y_hi": 0.4, "y_steps": 21},
    "phase": {"svg": None},
}


def read_config_file(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _converters(parser: argparse.ArgumentParser, command: str) -> dict:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    conv = {}
    for action in sub.choices[command]._actions:
        if action.dest in ("help", "config"):
            continue
        if isinstance(action, argparse._StoreFalseAction):
            conv[action.dest] = lambda s: s.strip().lower() in ("1", "true", "yes", "on")
        else:
            conv[action.dest] = action.type or str
    return conv


def resolve_settings(parser, args) -> dict:
    settings = dict(DEFAULTS)
    settings.update(COMMAND_DEFAULTS.get(args.command, {}))
    if getattr(args, "config", None) is not None:
        conv = _converters(parser, args.command)
        for key, raw in read_config_file(args.config).items():
            if key not in conv:
                raise ConfigError(f"unknown config key {key!r} for command {args.command!r}")
            try:
                settings[key] = conv[key](raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config", "verbose"):
            settings[key] = value
    return settings


def _params(s) -> ModelParams:
    return ModelParams(a=s["a"], b=s["b"], c=s["c"], d=s["d"], alpha=s["alpha"])


def _integrator(s) -> IntegratorConfig:
    keys = ("method", "dt", "rel_tol", "abs_tol", "t_end", "max_steps",
            "extinction_threshold", "convergence_tol")
    return IntegratorConfig(**{k: s[k] for k in keys if s.get(k) is not None})


def _check_writable(*paths):
    for path in paths:
        if path is None:
            continue
        parent = Path(path).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise OutputError(f"cannot write to {path}: directory {parent} is not writable")
        if Path(path).exists() and not os.access(path, os.W_OK):
            raise OutputError(f"cannot write to {path}: file is not writable")


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _table(rows, header):
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def _notes(ce, report) -> str:
    e = ce.equilibrium
    notes = []
    if e.out_of_quadrant:
        notes.append("outside quadrant")
    if e.coincident:
        notes.append("coincides with (b,0)")
    if e.tangency:
        notes.append("tangency")
    if ce.empirical:
        notes.append(f"{ce.empirical} (empirical)")
    if e.kind.value == "PreyOnlyCarrying":
        notes.append("closed form: " + ("stable" if report.carrying.closed_form_stable else "unstable"))
    if e.kind.value == "PreyOnlyAllee":
        notes.append("closed form: " + ("stable" if report.allee.closed_form_stable else "unstable"))
    if ce.prey_slope is not None:
        verdict = "implies stable" if ce.prey_slope < -1e-9 else "inconclusive"
        notes.append(f"dg1/du={fmt(ce.prey_slope)} ({verdict})")
    return "; ".join(notes)


def cmd_equilibria(s) -> int:
    _check_writable(s.get("json"))
    params = _params(s)
    classified = classify_all(params, empirical_origin=s["origin_probe"])
    report = boundary_stability_closed_form(params)
    rows = [
        (ce.equilibrium.kind.value, fmt(ce.equilibrium.u), fmt(ce.equilibrium.v),
         fmt(ce.equilibrium.residual), ce.stability.label.value,
         "-" if ce.eigen is None else fmt(ce.eigen.max_real_part), _notes(ce, report))
        for ce in classified
    ]
    print(_table(rows, ("kind", "u", "v", "residual", "class", "max_re_lambda", "notes")))
    if s.get("json"):
        serialize.dump_json({
            "params": params.as_dict(),
            "equilibria": [serialize.classified_to_dict(ce) for ce in classified],
            "boundary": serialize.boundary_to_dict(report),
        }, s["json"])
    return EXIT_OK


def cmd_stability(s) -> int:
    _check_writable(s.get("json"))
    params = _params(s)
    report = boundary_stability_closed_form(params)
    rows = []
    for name, bv in (("(1,0)", report.carrying), ("(b,0)", report.allee)):
        rows.append((name, fmt(bv.u), fmt(bv.trace), fmt(bv.det),
                     "stable" if bv.closed_form_stable else "unstable",
                     bv.closed_form.label.value,
                     "-" if bv.numeric is None else bv.numeric.label.value,
                     {True: "yes", False: "NO", None: "n/a"}[bv.agree],
                     "outside quadrant" if bv.out_of_quadrant else ""))
    print(_table(rows, ("point", "u", "trace", "det", "closed form", "class", "numeric", "agree", "")))
    interior = [ce for ce in classify_all(params) if ce.prey_slope is not None]
    if interior:
        print()
        rows = [(fmt(ce.equilibrium.u), fmt(ce.equilibrium.v), ce.stability.label.value,
                 fmt(ce.prey_slope), "holds" if ce.prey_slope < -1e-9 else "fails")
                for ce in interior]
        print(_table(rows, ("u", "v", "class", "dg1/du", "sufficient condition")))
    else:
        print("\nno interior equilibria")
    if s.get("json"):
        serialize.dump_json({
            "params": params.as_dict(),
            "boundary": serialize.boundary_to_dict(report),
            "interior": [serialize.classified_to_dict(ce) for ce in interior],
        }, s["json"])
    return EXIT_OK


def _write_trajectory(traj, params, cfg, s):
    if s.get("csv"):
        serialize.write_trajectory_csv(traj, s["csv"])
    if s.get("json"):
        serialize.write_trajectory_json(traj, params, cfg, s["json"])


def cmd_simulate(s) -> int:
    _check_writable(s.get("csv"), s.get("json"), s.get("svg"))
    params, cfg = _params(s), _integrator(s)
    init = (s["u0"], s["v0"])
    try:
        traj = simulate(init, params, cfg)
    except StepUnderflowError as exc:
        _write_trajectory(exc.trajectory, params, cfg, s)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_trajectory(traj, params, cfg, s)
    if s.get("svg"):
        spec = PhasePortraitSpec(seeds=(init,), trajectory_t_end=min(cfg.t_end, 200.0))
        _write_text(s["svg"], phase_portrait_svg(params, spec))
    ev = traj.terminal_event
    u, v = traj.states[-1]
    print(f"terminal event: {ev.kind.value} at t={fmt(ev.time)}")
    print(f"final state: u={fmt(u)} v={fmt(v)}")
    print(f"fate: {classify_fate(traj, cfg).value}")
    print(f"steps: accepted={traj.accepted_steps} rejected={traj.rejected_steps} clamped={traj.clamped_steps}")
    return EXIT_OK


def cmd_sweep(s) -> int:
    _check_writable(s.get("csv"), s.get("json"), s.get("svg"))
    spec = SweepSpec(s["target"], s["lo"], s["hi"], s["steps"], _params(s))
    diag = sweep(spec, workers=s["workers"], refine=s["refine"])
    if s.get("csv"):
        serialize.write_diagram_csv(diag, s["csv"])
    if s.get("json"):
        serialize.write_diagram_json(diag, s["json"])
    if s.get("svg"):
        _write_text(s["svg"], diagram_svg(diag))
    counts = diag.counts()
    print(f"{spec.target} in [{fmt(spec.lo)}, {fmt(spec.hi)}], {spec.steps} points; "
          f"interior counts seen: {sorted(set(counts))}")
    if not diag.critical_points:
        print("no critical points")
    for c in diag.critical_points:
        print(f"{c.kind.value}: {spec.target}={fmt(c.value)} (between {fmt(c.lo)} and {fmt(c.hi)})")
    return EXIT_OK


def cmd_critical(s) -> int:
    _check_writable(s.get("json"))
    base = _params(s)
    try:
        br = critical_bracket(base, s["lo"], s["hi"], s["tol"], target=s["target"])
    except NoSignChangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EquilibriumLostError as exc:
        print(f"error: {exc}; fold near {s['target']}={fmt(exc.fold_estimate)}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"critical {s['target']} = {fmt(br.midpoint)} (bracket [{fmt(br.lo)}, {fmt(br.hi)}], "
          f"{br.iterations} bisections)")
    print(f"equilibrium near switch: u={fmt(br.state[0])} v={fmt(br.state[1])}")
    if s.get("json"):
        serialize.dump_json({"params": base.as_dict(), "target": s["target"], "value": br.midpoint,
                             "lo": br.lo, "hi": br.hi, "iterations": br.iterations,
                             "state": list(br.state)}, s["json"])
    return EXIT_OK


def cmd_fate_map(s) -> int:
    _check_writable(s.get("csv"), s.get("json"), s.get("svg"))
    xa = Axis(s["x_target"], s["x_lo"], s["x_hi"], s["x_steps"])
    ya = Axis(s["y_target"], s["y_lo"], s["y_hi"], s["y_steps"])
    fm = fate_map(xa, ya, (s["u0"], s["v0"]), _params(s), _integrator(s), workers=s["workers"])
    if s.get("csv"):
        serialize.write_fate_map_csv(fm, s["csv"])
    if s.get("json"):
        serialize.write_fate_map_json(fm, s["json"])
    if s.get("svg"):
        _write_text(s["svg"], fate_map_svg(fm))
    tally = {}
    for row in fm.fates:
        for f in row:
            tally[f.value] = tally.get(f.value, 0) + 1
    print(f"{xa.steps} x {ya.steps} cells over {xa.target} x {ya.target}")
    for k in sorted(tally):
        print(f"{k}: {tally[k]}")
    return EXIT_OK


def cmd_phase(s) -> int:
    if not s.get("svg"):
        raise ConfigError("phase needs --svg PATH")
    _check_writable(s["svg"])
    base = PhasePortraitSpec()

    def pick(key, default):
        return default if s.get(key) is None else s[key]

    kw = {
        "u_range": (pick("u_min", base.u_range[0]), pick("u_max", base.u_range[1])),
        "v_range": (pick("v_min", base.v_range[0]), pick("v_max", base.v_range[1])),
    }
    for key, attr in (("arrows", "arrows"), ("nullcline_samples", "nullcline_samples"),
                      ("seeds", "seeds"), ("width", "width"), ("height", "height"),
                      ("traj_t_end", "trajectory_t_end")):
        if s.get(key) is not None:
            kw[attr] = s[key]
    spec = PhasePortraitSpec(**kw)
    params = _params(s)
    cfg = _integrator({**s, "t_end": spec.trajectory_t_end})
    _write_text(s["svg"], phase_portrait_svg(params, spec, cfg))
    print(f"wrote {s['svg']}")
    return EXIT_OK


COMMANDS = {
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "critical": cmd_critical,
    "fate-map": cmd_fate_map,
    "phase": cmd_phase,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = resolve_settings(parser, args)
        return COMMANDS[args.command](settings)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # invalid integrator or plot settings
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, NonFiniteDerivativeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
