"""End-to-end experiments: from a system description to coverage statistics.

Each stage writes one JSON report into the output directory.  The transformed
system is persisted as ``system.json`` so later stages can be re-run on
their own with ``start=<stage>``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import rng
from .branching import assemble_certificate, estimate_growth
from .core import (
    DEFAULT_BUDGET,
    RATIONAL,
    RIFSSpec,
    as_homogeneous,
    coverage_statistics,
    require_valid,
    sample_levels,
    similarity_dimension,
    spec_from_json,
    spec_to_json,
    supporting_interval,
)
from .errors import NotSupercritical, RIFSError
from .intervals import fmt_number
from .spectral import build_operator, growth_constants, harris_check, spectral_report
from .transforms import difference_system, homogenize, positivize
from .typespace import (
    build_pretype,
    build_strips,
    default_reach_grid,
    epsilon_main,
    saturation_depth,
    type_space,
    typespace_report,
)

INTERIOR = "interior"
DIFFERENCE = "difference"
STAGES = ("validate", "dimension", "positivize", "homogenize", "difference", "typespace", "spectral",
          "growth", "certificate", "coverage")
SYSTEM_STAGE = "difference"  # last stage that changes the system


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return fmt_number(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, no non-finite literals."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj), encoding="utf-8")


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    spec: dict
    experiment: str = INTERIOR
    eps: str | float = "auto"
    loss: float = 0.05  # dimension allowed to be lost by positivize/homogenize
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    grid: int = 256
    out: str | None = None
    xi: float = 0.01
    trials: int = 2000
    growth_levels: int = 10
    coverage_levels: int = 10
    coverage_seeds: int = 20
    start: str = "validate"
    stop: str = "coverage"

    def __post_init__(self):
        if self.experiment not in (INTERIOR, DIFFERENCE):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for name in ("budget", "grid", "trials", "growth_levels", "coverage_levels", "coverage_seeds"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.start not in STAGES or self.stop not in STAGES:
            raise ValueError(f"stages must be among {', '.join(STAGES)}")
        if STAGES.index(self.start) > STAGES.index(self.stop):
            raise ValueError("start stage comes after stop stage")

    @classmethod
    def from_json(cls, d: dict, base: Path | None = None) -> "ExperimentConfig":
        d = dict(d)
        spec = d.pop("spec")
        if isinstance(spec, str):
            path = Path(spec) if base is None else base / spec
            if not path.exists():
                raise FileNotFoundError(f"spec file {path} does not exist")
            spec = json.loads(path.read_text(encoding="utf-8"))
        elif "preset" in spec:
            spec = preset_spec(spec["preset"], spec.get("mode", RATIONAL))
        if base is not None and d.get("out") and not Path(d["out"]).is_absolute():
            d["out"] = str(base / d["out"])
        return cls(spec=spec, **d)


class StageFailed(RuntimeError):
    def __init__(self, stage: str, error: Exception):
        super().__init__(f"stage {stage} failed: {error}")
        self.stage = stage
        self.error = error

    @property
    def exit_code(self) -> int:
        return getattr(self.error, "exit_code", 2)

    def to_json(self) -> dict:
        return {"stage": self.stage, "error": getattr(self.error, "code", type(self.error).__name__),
                "message": str(self.error)}


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


@dataclass
class _State:
    cfg: ExperimentConfig
    system: RIFSSpec
    s_input: float = float("nan")
    typespace: tuple | None = None
    operator: tuple | None = None
    growth: object = None
    reports: dict = field(default_factory=dict)


def _resolve_eps(cfg: ExperimentConfig, em):
    if cfg.eps == "auto":
        return em.eps_main / 2
    eps = Fraction(str(cfg.eps))
    return eps if isinstance(em.eps_main, Fraction) else float(eps)


def _stage_validate(st: _State) -> dict:
    require_valid(st.system)
    return {"valid": True, "L": st.system.L, "mode": st.system.mode}


def _stage_dimension(st: _State) -> dict:
    s = similarity_dimension(st.system)
    st.s_input = s
    alpha, beta = supporting_interval(st.system)
    target = 2 * s if st.cfg.experiment == DIFFERENCE else s
    out = {"s": s, "supporting_interval": [alpha, beta], "homogeneous": st.system.is_homogeneous,
           "target_dimension": target}
    if not target > 1:
        what = "difference dimension" if st.cfg.experiment == DIFFERENCE else "dimension"
        raise NotSupercritical(f"{what} {target:.6g} <= 1, interval impossible")
    return out


def _stage_positivize(st: _State) -> dict:
    if all(r > 0 for r in st.system.ratios):
        return {"skipped": "all ratios positive"}
    res = positivize(st.system, st.cfg.loss / 2)
    st.system = res.spec
    return res.to_json()


def _stage_homogenize(st: _State) -> dict:
    if st.system.is_homogeneous:
        return {"skipped": "already homogeneous", "ratio": st.system.ratios[0]}
    used = st.s_input - similarity_dimension(st.system) if not math.isnan(st.s_input) else 0.0
    res = homogenize(st.system, st.cfg.loss - used)
    st.system = res.system
    return res.to_json()


def _stage_difference(st: _State) -> dict:
    if st.cfg.experiment != DIFFERENCE:
        return {"skipped": "interior experiment"}
    h = difference_system(as_homogeneous(st.system))
    st.system = h
    s = similarity_dimension(h)
    if not s > 1:
        raise NotSupercritical(f"difference dimension {s:.6g} <= 1, interval impossible")
    return {"L": h.L, "s": s, "supporting_interval": list(supporting_interval(h))}


def _typespace(st: _State):
    if st.typespace is None:
        h = as_homogeneous(st.system)
        strips = build_strips(h)
        pretype = build_pretype(strips)
        em = epsilon_main(strips, pretype)
        ts = type_space(strips, pretype, _resolve_eps(st.cfg, em), em)
        st.typespace = (strips, pretype, ts)
    return st.typespace


SATURATION_POINTS = 5000


def _stage_typespace(st: _State) -> dict:
    strips, pretype, ts = _typespace(st)
    grid = default_reach_grid(ts)
    if len(grid) > SATURATION_POINTS:
        report = typespace_report(strips, pretype, ts)
        report["saturation"] = {"skipped": f"{len(grid)} grid points exceed {SATURATION_POINTS}"}
        return report
    return typespace_report(strips, pretype, ts, saturation_depth(strips, ts, grid))


def _operator(st: _State):
    if st.operator is None:
        _, _, ts = _typespace(st)
        st.operator = build_operator(as_homogeneous(st.system), ts, st.cfg.grid)
    return st.operator


def _stage_spectral(st: _State) -> dict:
    grid, spec = _operator(st)
    if st.cfg.out:
        out = Path(st.cfg.out)
        write_csv(out / "eigenfunctions.csv", ["x", "f", "g"], zip(grid.nodes, spec.f, spec.g))
    return spectral_report(grid, spec, harris=harris_check(grid, spec))


def _growth(st: _State):
    if st.growth is None:
        grid, spec = _operator(st)
        _, _, ts = _typespace(st)
        st.growth = growth_constants(as_homogeneous(st.system), grid, spec, ts)
    return st.growth


def _stage_growth(st: _State) -> dict:
    return _growth(st).to_json()


def _stage_certificate(st: _State) -> dict:
    grid, spec = _operator(st)
    _, _, ts = _typespace(st)
    h = as_homogeneous(st.system)
    cert = assemble_certificate(h, ts, _growth(st), spec, st.cfg.xi)
    return cert.to_json()


def _coverage_depth(L: int, levels: int, budget: int) -> int:
    cap = min(budget, 1 << 20)
    return max(1, min(levels, int(math.log(cap) / math.log(L))))


def _stage_coverage(st: _State) -> dict:
    cfg = st.cfg
    h = as_homogeneous(st.system)
    n = _coverage_depth(h.L, cfg.coverage_levels, cfg.budget)
    seeds = [int(k) for k in rng.trial_keys(cfg.seed, np.arange(cfg.coverage_seeds))]
    per_seed = []
    curves = []
    first = None
    for i, seed in enumerate(seeds):
        levels = sample_levels(h, rng.RealizationTree(seed), n, cfg.budget)
        if first is None:
            first = levels
        cov = coverage_statistics(levels)
        per_seed.append(cov)
        curves.extend((i, k + 1, m) for k, m in enumerate(cov.measures))
    covered = sum(c.covered is not None for c in per_seed)
    _, _, ts = _typespace(st)
    comp = max(ts.T, key=lambda p: p.hi - p.lo)
    x = float(comp.lo + comp.hi) / 2
    growth = estimate_growth(h, ts, x, cfg.growth_levels, cfg.trials, cfg.seed, budget=cfg.budget)
    if cfg.out:
        out = Path(cfg.out)
        write_csv(out / "coverage.csv", ["seed_index", "level", "measure"], curves)
        write_csv(out / "cylinders.csv", ["level", "index", "left", "right"],
                  ((lv.n, j, l, r) for lv in first for j, (l, r) in enumerate(zip(lv.left, lv.right))))
        write_csv(out / "growth.csv", ["level", "mean", "stderr"], zip(growth.levels, growth.means, growth.stderrs))
    return {
        "depth": n,
        "seeds": len(seeds),
        "covered_fraction": covered / len(seeds),
        "min_final_measure": min(c.measures[-1] for c in per_seed),
        "mean_measures": [float(np.mean([c.measures[k] for c in per_seed])) for k in range(n)],
        "growth": growth.to_json(),
        "start_type": x,
    }


_RUNNERS = {
    "validate": _stage_validate,
    "dimension": _stage_dimension,
    "positivize": _stage_positivize,
    "homogenize": _stage_homogenize,
    "difference": _stage_difference,
    "typespace": _stage_typespace,
    "spectral": _stage_spectral,
    "growth": _stage_growth,
    "certificate": _stage_certificate,
    "coverage": _stage_coverage,
}


def run_pipeline(cfg: ExperimentConfig) -> dict:
    """Run stages ``cfg.start..cfg.stop``; returns ``{stage: report}``.

    Starting after the system stages reads ``system.json`` from the output
    directory.  A failing stage raises :class:`StageFailed` after writing
    ``error.json``.
    """
    out = Path(cfg.out) if cfg.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    i0, i1 = STAGES.index(cfg.start), STAGES.index(cfg.stop)
    if i0 > STAGES.index(SYSTEM_STAGE):
        if out is None or not (out / "system.json").exists():
            raise FileNotFoundError("resuming needs system.json in the output directory")
        system = spec_from_json(json.loads((out / "system.json").read_text(encoding="utf-8")))
    else:
        system = spec_from_json(cfg.spec)
    st = _State(cfg, system)
    if i0 > STAGES.index("dimension"):
        st.s_input = similarity_dimension(spec_from_json(cfg.spec))
    for stage in STAGES[i0:i1 + 1]:
        try:
            report = _RUNNERS[stage](st)
        except (RIFSError, ValueError, ArithmeticError) as err:
            failure = StageFailed(stage, err)
            if out is not None:
                write_json(out / "error.json", failure.to_json())
            raise failure from err
        st.reports[stage] = report
        if out is not None:
            write_json(out / f"{stage}.json", report)
            if stage == SYSTEM_STAGE or (stage == STAGES[i1] and i1 < STAGES.index(SYSTEM_STAGE)):
                write_json(out / "system.json", spec_to_json(st.system))
    return st.reports


def preset_spec(name: str, mode: str = RATIONAL) -> dict:
    """JSON description of a named preset; ``larsson:a,b`` builds a Larsson system."""
    from .presets import PRESETS, larsson_system

    if name.startswith("larsson:"):
        a, b = name.split(":", 1)[1].split(",")
        return spec_to_json(larsson_system(a.strip(), b.strip(), mode))
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))} or larsson:a,b")
    return spec_to_json(PRESETS[name](mode))
