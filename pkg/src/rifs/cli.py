"""``rifs`` command line.

Every subcommand prints a JSON report on stdout and, with ``--out``, also
writes it (plus any CSV plot data) into that directory.  Exit codes: 0 ok,
2 invalid input, 3 budget exceeded, 4 not supercritical, 5 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .branching import assemble_certificate, estimate_growth, simulate_batch
from .core import (
    DEFAULT_BUDGET,
    FLOAT,
    RATIONAL,
    as_homogeneous,
    require_valid,
    similarity_dimension,
    spec_from_json,
    spec_to_json,
    supporting_interval,
    to_float_spec,
)
from .errors import RIFSError
from .intervals import IntervalUnion
from .pipeline import (
    DIFFERENCE,
    INTERIOR,
    STAGES,
    ExperimentConfig,
    StageFailed,
    dumps,
    preset_spec,
    run_pipeline,
    write_csv,
    write_json,
)
from .presets import larsson_system
from .spectral import build_operator, growth_constants, harris_check, spectral_report
from .transforms import difference_system, homogenize, positivize
from .typespace import build_pretype, build_strips, epsilon_main, saturation_depth, type_space, typespace_report


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    p.add_argument("--eps", default="auto", help="type-space collar, a number or 'auto' (eps_MAIN/2)")
    p.add_argument("--grid", type=int, default=256, help="quadrature points per type-space component")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum number of simulated nodes")
    p.add_argument("--out", help="directory for JSON reports and CSV data")
    p.add_argument("--mode", choices=(RATIONAL, FLOAT), default=None, help="arithmetic for the system")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--spec", help="system as a JSON file or inline JSON")
    src.add_argument("--preset", help="system_a, system_b or larsson:a,b")
    return p


def _load_spec(args):
    mode = args.mode or RATIONAL
    if args.preset:
        d = preset_spec(args.preset, mode)
    elif args.spec:
        text = args.spec
        path = Path(text)
        d = json.loads(path.read_text(encoding="utf-8") if not text.lstrip().startswith("{") else text)
        if args.mode:
            d["mode"] = args.mode
    else:
        raise ValueError("give --spec or --preset")
    spec = spec_from_json(d)
    if args.mode == FLOAT and spec.mode != FLOAT:
        spec = to_float_spec(spec)
    return spec


def _emit(args, report, name: str) -> None:
    sys.stdout.write(dumps(report))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / f"{name}.json", report)


def _save_system(args, spec) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "system.json", spec_to_json(spec))


def _typespace(h, args):
    strips = build_strips(h)
    pretype = build_pretype(strips)
    em = epsilon_main(strips, pretype)
    if args.eps == "auto":
        eps = em.eps_main / 2
    else:
        eps = Fraction(args.eps) if strips.exact else float(args.eps)
    return strips, pretype, type_space(strips, pretype, eps, em)


def _loss(args, default: float) -> float:
    return default if args.eps == "auto" else float(args.eps)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_dim(args) -> dict:
    spec = _load_spec(args)
    require_valid(spec)
    alpha, beta = supporting_interval(spec)
    return {"L": spec.L, "s": similarity_dimension(spec), "homogeneous": spec.is_homogeneous,
            "supporting_interval": [alpha, beta]}


def cmd_positivize(args) -> dict:
    res = positivize(_load_spec(args), _loss(args, 0.05))
    _save_system(args, res.spec)
    return res.to_json()


def cmd_homogenize(args) -> dict:
    res = homogenize(_load_spec(args), _loss(args, 0.05), args.cap)
    _save_system(args, res.system)
    return res.to_json()


def cmd_difference(args) -> dict:
    h = difference_system(as_homogeneous(_load_spec(args)))
    _save_system(args, h)
    return {"L": h.L, "s": similarity_dimension(h), "supporting_interval": list(supporting_interval(h))}


def cmd_typespace(args) -> dict:
    h = as_homogeneous(_load_spec(args))
    strips, pretype, ts = _typespace(h, args)
    sat = saturation_depth(strips, ts) if args.saturation else None
    return typespace_report(strips, pretype, ts, sat)


def cmd_spectral(args) -> dict:
    h = as_homogeneous(_load_spec(args))
    _, _, ts = _typespace(h, args)
    grid, spec = build_operator(h, ts, args.grid)
    growth = growth_constants(h, grid, spec, ts) if spec.rho > 1 else None
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_csv(Path(args.out) / "eigenfunctions.csv", ["x", "f", "g"], zip(grid.nodes, spec.f, spec.g))
    return spectral_report(grid, spec, growth, harris_check(grid, spec))


def _parse_set(text: str | None):
    if text is None:
        return None
    pairs = []
    for part in text.split(";"):
        lo, hi = part.split(",")
        pairs.append((float(lo), float(hi)))
    return IntervalUnion.from_pairs(pairs)


def cmd_simulate(args) -> dict:
    h = as_homogeneous(_load_spec(args))
    _, _, ts = _typespace(h, args)
    if args.x is None:
        comp = max(ts.T, key=lambda p: p.hi - p.lo)
        x = float(comp.lo + comp.hi) / 2
    else:
        x = float(args.x)
    A = _parse_set(args.target)
    run = simulate_batch(h, ts, x, args.n, A, args.seed, args.trials, args.budget)
    growth = estimate_growth(h, ts, x, args.n, args.trials, args.seed, budget=args.budget) if args.n >= 1 else None
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_csv(Path(args.out) / "simulation.csv", ["trial", "level", "count"], run.rows())
    means = run.counts.mean(axis=0)
    return {
        "start": x,
        "n": args.n,
        "trials": run.trials,
        "means": means,
        "stderrs": [run.stderr(k) for k in range(args.n + 1)],
        "absorbed_mean": float(np.mean(run.absorbed)),
        "growth": None if growth is None else growth.to_json(),
    }


def cmd_certify(args) -> dict:
    h = as_homogeneous(_load_spec(args))
    _, _, ts = _typespace(h, args)
    grid, spec = build_operator(h, ts, args.grid)
    growth = growth_constants(h, grid, spec, ts)
    cert = assemble_certificate(h, ts, growth, spec, args.xi)
    return {"certificate": cert.to_json(), "growth": growth.to_json(), "rho": spec.rho}


_PIPELINE_DEFAULTS = {"eps": "auto", "seed": 0, "budget": DEFAULT_BUDGET, "grid": 256, "xi": 0.01,
                      "start": STAGES[0], "stop": STAGES[-1]}


def _config_from_args(args) -> ExperimentConfig:
    """Config file values win over flags left at their defaults."""
    if args.config:
        path = Path(args.config)
        cfg = ExperimentConfig.from_json(json.loads(path.read_text(encoding="utf-8")), path.parent)
        overrides = {k: getattr(args, k) for k, v in _PIPELINE_DEFAULTS.items() if getattr(args, k) != v}
    else:
        cfg = ExperimentConfig(spec=spec_to_json(_load_spec(args)))
        overrides = {k: getattr(args, k) for k in _PIPELINE_DEFAULTS}
        overrides["experiment"] = args.experiment
    if args.out:
        overrides["out"] = args.out
    for k, v in overrides.items():
        setattr(cfg, k, v)
    cfg.__post_init__()
    return cfg


def cmd_pipeline(args) -> dict:
    return run_pipeline(_config_from_args(args))


def cmd_larsson(args) -> dict:
    mode = args.mode or FLOAT
    h = larsson_system(args.a, args.b, mode)
    s = similarity_dimension(h)
    report = {"system": spec_to_json(h), "s": s, "difference_s": 2 * s}
    if args.run:
        cfg = ExperimentConfig(spec=spec_to_json(h), experiment=DIFFERENCE, eps=args.eps, seed=args.seed,
                               budget=args.budget, grid=args.grid, out=args.out)
        report["pipeline"] = run_pipeline(cfg)
    return report


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="rifs", description="Randomly perturbed self-similar systems on the line.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("dim", parents=[common], help="similarity dimension and supporting interval").set_defaults(
        func=cmd_dim)
    sub.add_parser("positivize", parents=[common], help="subsystem with positive ratios (--eps is the loss)"
                   ).set_defaults(func=cmd_positivize)
    q = sub.add_parser("homogenize", parents=[common], help="homogeneous subsystem (--eps is the loss)")
    q.add_argument("--cap", type=int, default=4096, help="maximum number of maps")
    q.set_defaults(func=cmd_homogenize)
    sub.add_parser("difference", parents=[common], help="system generating the difference of two copies"
                   ).set_defaults(func=cmd_difference)
    q = sub.add_parser("typespace", parents=[common], help="pre-type space, eps_MAIN and T(eps)")
    q.add_argument("--saturation", action="store_true", help="also compute the reachability depth")
    q.set_defaults(func=cmd_typespace)
    sub.add_parser("spectral", parents=[common], help="Perron-Frobenius data of the kernel").set_defaults(
        func=cmd_spectral)
    q = sub.add_parser("simulate", parents=[common], help="Monte-Carlo branching counts")
    q.add_argument("--x", help="start type (default: middle of the longest component)")
    q.add_argument("--n", type=int, default=5, help="depth")
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--target", help="target set A as 'lo,hi;lo,hi' (default: the type space)")
    q.set_defaults(func=cmd_simulate)
    q = sub.add_parser("certify", parents=[common], help="the interval certificate")
    q.add_argument("--xi", type=float, default=0.01)
    q.set_defaults(func=cmd_certify)
    q = sub.add_parser("pipeline", parents=[common], help="run an end-to-end experiment")
    q.add_argument("--config", help="experiment config JSON")
    q.add_argument("--experiment", choices=(INTERIOR, DIFFERENCE), default=INTERIOR)
    q.add_argument("--xi", type=float, default=0.01)
    q.add_argument("--start", choices=STAGES, default=STAGES[0], help="first stage (later ones read system.json)")
    q.add_argument("--stop", choices=STAGES, default=STAGES[-1])
    q.set_defaults(func=cmd_pipeline)
    q = sub.add_parser("larsson", parents=[common], help="Larsson two-map system")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--run", action="store_true", help="run the difference experiment")
    q.set_defaults(func=cmd_larsson)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except StageFailed as err:
        sys.stdout.write(dumps(err.to_json()))
        sys.stderr.write(f"rifs: {err}\n")
        return err.exit_code
    except RIFSError as err:
        sys.stdout.write(dumps({"error": err.code, "message": str(err)}))
        sys.stderr.write(f"rifs: {err.code}: {err}\n")
        return err.exit_code
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as err:
        sys.stdout.write(dumps({"error": type(err).__name__, "message": str(err)}))
        sys.stderr.write(f"rifs: {err}\n")
        return 2
    if args.command == "pipeline":
        sys.stdout.write(dumps({"stages": list(report), "reports": report}))
    else:
        _emit(args, report, args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
