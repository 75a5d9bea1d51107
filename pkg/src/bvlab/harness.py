"""Experiment configuration, reproducible runs and the claim suite.

A run is described by an :class:`ExperimentConfig` (TOML or JSON text) and
writes a CSV of rows, a JSON summary and optionally a gnuplot script. The
claim suite evaluates every acceptance check and returns one
:class:`ReportRow` per claim.
"""

from dataclasses import asdict, dataclass, field
import json
import math
import os
import sys
import time

import numpy as np

from .bvcalc import catalog
from .bvcalc.function import BV1D
from .bvcalc.measures import variation_decomposition
from .errors import BVLabError
from .evaluator1d import f_eval, f_eval_mc, lambda_sweep, sweep_csv
from .kernel import nu_gamma_cell
from . import recovery, slicer

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODES = ("sweep", "recover", "slice2d", "verify", "oracle")
DEFAULT_SEED = 20240607
MC_SAMPLES_2D = 10_000_000
CONSTANTS = {"C1": 2.0, "C2": 4.0}


class ConfigError(BVLabError, ValueError):
    """Invalid experiment configuration; `problems` lists field diagnostics."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# ------------------------------------------------------------ functions

_KINDS_2D = {"disk_indicator", "indicator", "ridge", "cantor_sheet", "radial", "sum2d",
             "constant2d", "linear_ridge"}


def region_from_descriptor(d):
    if d is None:
        return None
    if isinstance(d, dict):
        return slicer.region_from_dict(d)
    raise ConfigError([f"domain: expected a region table, got {d!r}"])


def function_from_descriptor(desc, domain=None):
    """BV1D or BV2D from a descriptor dict.

    Planar kinds: disk_indicator, indicator, ridge, linear_ridge,
    cantor_sheet, radial, sum2d, constant2d. Anything else is a
    one-dimensional catalog block.
    """
    kind = desc.get("kind")
    if kind not in _KINDS_2D:
        d = dict(desc)
        if domain is not None:
            d["domain"] = [list(iv) for iv in domain]
        return catalog.from_dict(d)
    region = region_from_descriptor(domain) or slicer.ConvexPolygon.rectangle(-1, 1, -1, 1)
    if kind == "disk_indicator":
        return slicer.disk_indicator(desc.get("radius", 0.3), desc.get("center", (0.0, 0.0)),
                                     desc.get("height", 1.0), region)
    if kind == "indicator":
        return slicer.Indicator(slicer.region_from_dict(desc["region"]),
                                desc.get("height", 1.0), region)
    if kind == "ridge":
        return slicer.Ridge(catalog.from_dict(desc["profile"]), desc.get("direction", (1, 0)),
                            region)
    if kind == "linear_ridge":
        return slicer.linear_ridge(desc.get("slope", 1.0), desc.get("direction", (1, 0)), region)
    if kind == "cantor_sheet":
        return slicer.cantor_sheet(desc.get("mass", 1.0), desc.get("axis", (1, 0)), region,
                                   tuple(desc.get("support", (0.0, 1.0))))
    if kind == "radial":
        return slicer.Radial(catalog.from_dict(desc["profile"]), desc.get("center", (0, 0)),
                             region)
    if kind == "constant2d":
        return slicer.Constant2D(desc.get("value", 0.0), region)
    return slicer.SumBV2D([function_from_descriptor(t, domain) for t in desc["terms"]])


# --------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    function: dict
    mode: str = "sweep"
    domain: object = None
    gamma: float = 1.0
    lambda_grid: dict = field(default_factory=lambda: {"start": 1e2, "stop": 1e6, "points": 9,
                                                       "scale": "geometric"})
    tol: float = 1e-4
    seed: int = DEFAULT_SEED
    output: dict = field(default_factory=dict)
    stages: list = field(default_factory=lambda: list(recovery.DEFAULT_STAGES))
    method: str = "split"
    samples: int = 1_000_000
    n_directions: int = 64
    threads: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        bad = []
        if not isinstance(self.function, dict) or "kind" not in self.function:
            bad.append("function: a table with a 'kind' key is required")
        if self.mode not in MODES:
            bad.append(f"mode: must be one of {', '.join(MODES)}, got {self.mode!r}")
        if not (isinstance(self.gamma, (int, float)) and self.gamma > 0):
            bad.append(f"gamma: must be positive, got {self.gamma!r}")
        g = self.lambda_grid or {}
        try:
            if not float(g["start"]) > 0:
                bad.append("lambda_grid.start: must be positive")
            if not float(g["start"]) < float(g["stop"]):
                bad.append("lambda_grid: start must be below stop")
            if int(g["points"]) < 2:
                bad.append("lambda_grid.points: at least 2 points are required")
            if g.get("scale", "geometric") not in ("geometric", "linear"):
                bad.append("lambda_grid.scale: geometric or linear")
        except (KeyError, TypeError, ValueError):
            bad.append("lambda_grid: needs numeric start, stop and points")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            bad.append(f"tol: must be positive, got {self.tol!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            bad.append(f"seed: must be a non-negative integer, got {self.seed!r}")
        if self.method not in ("split", "full"):
            bad.append("method: split or full")
        if not self.stages or any(int(k) < 1 for k in self.stages):
            bad.append("stages: positive integers required")
        if int(self.samples) < 1:
            bad.append("samples: must be positive")
        if bad:
            raise ConfigError(bad)

    @property
    def grid(self):
        g = self.lambda_grid
        if g.get("scale", "geometric") == "geometric":
            return np.geomspace(float(g["start"]), float(g["stop"]), int(g["points"]))
        return np.linspace(float(g["start"]), float(g["stop"]), int(g["points"]))

    @property
    def out_dir(self):
        return self.output.get("dir", ".")

    @property
    def name(self):
        return self.output.get("name", self.mode)

    @property
    def timing(self):
        return bool(self.output.get("timing", True))

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError([f"{k}: unknown field" for k in extra])
        if "function" not in d:
            raise ConfigError(["function: a table with a 'kind' key is required"])
        return cls(**d)

    @classmethod
    def from_text(cls, text, fmt=None):
        fmt = fmt or ("json" if text.lstrip().startswith("{") else "toml")
        try:
            d = json.loads(text) if fmt == "json" else tomllib.loads(text)
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError([f"syntax: {exc}"]) from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            text = fh.read()
        return cls.from_text(text, "json" if path.endswith(".json") else None)

    def to_dict(self):
        return asdict(self)

    def build_function(self):
        try:
            return function_from_descriptor(self.function, self.domain)
        except BVLabError as exc:
            raise ConfigError([f"function: {exc}"]) from exc
        except (KeyError, TypeError) as exc:
            raise ConfigError([f"function: missing or invalid entry {exc}"]) from exc


# ---------------------------------------------------------------- rows

@dataclass(frozen=True)
class ReportRow:
    """One checked claim. relation: 'eq' |c - t| <= tol, 'le' c <= t + tol, 'ge' c >= t - tol."""

    claim: str
    computed: float
    target: float
    tolerance: float
    relation: str = "eq"
    anchor: str = ""
    criterion: int = 0
    runtime_s: float = 0.0

    @property
    def passed(self):
        c, t, tol = self.computed, self.target, self.tolerance
        if not (math.isfinite(c) and math.isfinite(t)):
            return False
        if self.relation == "eq":
            return abs(c - t) <= tol
        if self.relation == "le":
            return c <= t + tol
        if self.relation == "ge":
            return c >= t - tol
        raise ValueError(f"unknown relation {self.relation!r}")

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def line(self):
        sym = {"eq": "~", "le": "<=", "ge": ">="}[self.relation]
        return (f"{'PASS' if self.passed else 'FAIL'} [{self.criterion}] {self.claim}: "
                f"{self.computed:.6g} {sym} {self.target:.6g} (tol {self.tolerance:.3g})")


# ----------------------------------------------------------------- runs

@dataclass
class RunResult:
    status: int
    summary: dict
    artifacts: dict


def _gnuplot(csv_name, title, xcol=1, ycol=2, ecol=3, logx=True):
    return "\n".join([
        "set datafile separator ','",
        "set key off",
        "set logscale x" if logx else "unset logscale x",
        f"set title '{title}'",
        "set xlabel 'lambda'",
        "set ylabel 'F'",
        f"plot '{csv_name}' every ::1 using {xcol}:{ycol}:{ecol} with yerrorlines",
        ""])


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _sweep_rows(rows):
    return [{"lambda": r.lam, "value": r.estimate.value, "error_bound": r.estimate.error_bound}
            for r in rows]


def run(config):
    """Execute one configured experiment; returns exit status and artifact paths."""
    u = config.build_function()
    os.makedirs(config.out_dir, exist_ok=True)
    base = os.path.join(config.out_dir, config.name)
    artifacts = {}
    summary = {"config": config.to_dict(), "rows": [], "tail": {}, "certificates": {}}
    status = 0
    two_d = not isinstance(u, BV1D)
    if config.mode == "sweep" and two_d:
        config.mode = "slice2d"
    if config.mode == "sweep":
        res = lambda_sweep(u, None, config.gamma, config.grid, rtol=config.tol, warn=False)
        artifacts["csv"] = base + ".csv"
        sweep_csv(res.rows, artifacts["csv"], timing=config.timing)
        summary["rows"] = _sweep_rows(res.rows)
        summary["tail"] = {"min": res.tail_min, "max": res.tail_max, "last": res.tail_last}
        summary["certificates"] = {"tail_error": res.tail_error}
    elif config.mode == "slice2d":
        if not two_d:
            raise ConfigError(["function: slice2d needs a planar function"])
        quad = slicer.SliceQuadrature(config.n_directions, slice_rtol=config.tol)
        rows = slicer.sweep_2d(u, config.gamma, config.grid, quad)
        artifacts["csv"] = base + ".csv"
        slicer.sweep_2d_csv(rows, artifacts["csv"], timing=config.timing)
        vals = [e.value for _, e, _ in rows]
        k = max(1, int(math.ceil(0.25 * len(vals))))
        summary["rows"] = [{"lambda": lam, "value": e.value, "error_bound": e.error_bound}
                           for lam, e, _ in rows]
        summary["tail"] = {"min": min(vals[-k:]), "max": max(vals[-k:]), "last": vals[-1]}
        summary["certificates"] = {"tail_error": max(e.error_bound for _, e, _ in rows[-k:])}
    elif config.mode == "recover":
        quad = slicer.SliceQuadrature(config.n_directions, tol=1e-2) if two_d else None
        fam = recovery.build_recovery_family(u, config.gamma, tuple(config.stages),
                                             config.method, rtol=max(config.tol, 1e-3),
                                             quad=quad)
        artifacts["json_family"] = base + "_family.json"
        fam.to_json(artifacts["json_family"])
        lines = ["k,lambda,target,f_value,f_error,f_tail,area_gap,l1_gap,verified"]
        for s in fam.stages:
            lines.append(",".join(repr(v) for v in (s.k, s.lam, s.target, s.f_value, s.f_error,
                                                    s.f_tail, s.area_gap, s.l1_gap))
                         + f",{int(s.verified)}")
        artifacts["csv"] = base + ".csv"
        _write(artifacts["csv"], "\n".join(lines) + "\n")
        summary["rows"] = [{k: v for k, v in s.to_dict().items() if k != "function"}
                           for s in fam.stages]
        summary["tail"] = {"min": min(s.f_value for s in fam.stages),
                           "max": max(s.f_value for s in fam.stages),
                           "last": fam.stages[-1].f_value}
        summary["certificates"] = {"limit": fam.limit,
                                   "stages": [s.f_limit_certificate for s in fam.stages],
                                   "unverified": [s.k for s in fam.stages if not s.verified]}
        if summary["certificates"]["unverified"]:
            status = 1
    elif config.mode in ("verify", "oracle"):
        rows = verify_rows(u, config) if config.mode == "verify" else oracle_rows(u, config)
        summary["rows"] = [r.to_dict() for r in rows]
        artifacts["csv"] = base + ".csv"
        _write(artifacts["csv"], _report_csv(rows))
        status = 0 if all(r.passed for r in rows) else 1
    if config.output.get("gnuplot", True) and config.mode in ("sweep", "slice2d"):
        artifacts["gnuplot"] = base + ".gp"
        _write(artifacts["gnuplot"], _gnuplot(os.path.basename(artifacts["csv"]),
                                              f"{config.function['kind']} gamma={config.gamma}"))
    summary["threads"] = config.threads
    summary["status"] = status
    artifacts["json"] = base + ".json"
    _write(artifacts["json"], json.dumps(summary, indent=1, default=float))
    return RunResult(status, summary, artifacts)


def _report_csv(rows):
    lines = ["claim,computed,target,tolerance,relation,passed"]
    for r in rows:
        lines.append(f"{r.claim},{r.computed!r},{r.target!r},{r.tolerance!r},{r.relation},"
                     f"{int(r.passed)}")
    return "\n".join(lines) + "\n"


def verify_rows(u, config, constants=None):
    """Lower bound, boundedness and recovery rows for one 1D function."""
    C1 = (constants or CONSTANTS)["C1"]
    g = config.gamma
    dec = variation_decomposition(u)
    lower = C1 / g * dec.abs + C1 / (g + 1) * dec.singular
    res = lambda_sweep(u, None, g, config.grid, rtol=config.tol, warn=False)
    err = max(r.estimate.error_bound for r in res.rows)
    rows = [ReportRow("lower-bound", res.tail_min, lower, err + 0.01 * lower, "ge",
                      ANCHORS["cantor-lower-bound"]),
            ReportRow("sup-bound", res.tail_max, 5 * dec.total, err, "le",
                      ANCHORS["cantor-bounded"])]
    fam = recovery.build_recovery_family(u, g, tuple(config.stages), "split",
                                         rtol=max(config.tol, 1e-3))
    worst = max(s.f_value - 1.0 / s.k - s.f_error for s in fam.stages)
    rows.append(ReportRow("recovery-limsup", worst, lower, 1e-12, "le",
                          ANCHORS["recovery-certificates"]))
    return rows


def oracle_rows(u, config):
    """Deterministic evaluator against Monte Carlo at the first grid point."""
    lam = float(config.grid[0])
    if isinstance(u, BV1D):
        est = f_eval(u, None, config.gamma, lam, rtol=config.tol, warn=False)
        mc, se = f_eval_mc(u, None, config.gamma, lam, int(config.samples), config.seed,
                           method="importance")
    else:
        est = slicer.f_eval_2d(u, config.gamma, lam,
                               slicer.SliceQuadrature(config.n_directions))
        mc, se = slicer.f_eval_mc_2d(u, config.gamma, lam, int(config.samples), config.seed)
    return [ReportRow("oracle-agreement", est.value, mc, 3 * se + est.error_bound, "eq",
                      ANCHORS["oracle-agreement"])]


# ---------------------------------------------------------------- claims

ANCHORS = {
    "ac-closed-form": "limit-of-F:absolutely-continuous-term",
    "ac-tail": "limit-of-F:absolutely-continuous-term",
    "jump-closed-form": "limit-of-F:jump-term",
    "mixed-tail": "limit-of-F:sbv-sum",
    "cantor-lower-bound": "lower-bound:cantor-term",
    "cantor-bounded": "uniform-bound:total-variation",
    "recovery-certificates": "area-strict-limit:recovery-upper-bound",
    "recovery-area-gap": "area-strict-limit:recovery-convergence",
    "full-staircase-limsup": "ordinary-limit:at-most-jump-constant",
    "full-staircase-below-pointwise": "ordinary-limit:strictly-below-pointwise",
    "disk-closed-form": "slicing:sphere-constant-c2",
    "disk-mc": "slicing:multiple-integral-identity",
    "kernel-symmetry": "kernel:symmetric-measure",
    "kernel-additivity": "kernel:additive-measure",
    "scaling": "functional:homogeneity",
    "lambda-monotone": "functional:superlevel-nesting",
    "staircase-l1": "coarea:staircase-l1",
    "staircase-variation": "coarea:riemann-sum",
    "ramp-bound": "monotone-transition:lower-bound",
    "oracle-agreement": "evaluator:monte-carlo-agreement",
}


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rows = fn(*args, **kwargs)
        dt = time.perf_counter() - t0
        return [ReportRow(**{**asdict(r), "runtime_s": dt}) for r in rows]

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _row(claim, computed, target, tol, relation, criterion, suffix=""):
    return ReportRow(claim + suffix, float(computed), float(target), float(tol), relation,
                     ANCHORS[claim], criterion)


@_timed
def criterion_linear(constants=CONSTANTS, gammas=(0.5, 1.0, 2.0)):
    """u = x: closed form at lambda = 1e4 and the tail of a 1e2..1e6 sweep."""
    C1 = constants["C1"]
    u = catalog.affine()
    rows = []
    for g in gammas:
        lam = 1e4
        exact = C1 / g * (1 - g * lam ** (-1 / g) / (g + 1))
        e = f_eval(u, None, g, lam, warn=False)
        rows.append(_row("ac-closed-form", e.value, exact, e.error_bound + 5e-3 * exact,
                         "eq", 1, f"[gamma={g}]"))
        res = lambda_sweep(u, None, g, np.geomspace(1e2, 1e6, 9), warn=False)
        tail = res.rows[-max(1, int(math.ceil(0.25 * len(res.rows)))):]
        worst = max(tail, key=lambda r: abs(r.estimate.value - C1 / g))
        rows.append(_row("ac-tail", worst.estimate.value, C1 / g,
                         0.01 * C1 / g + worst.estimate.error_bound, "eq", 1, f"[gamma={g}]"))
    return rows


@_timed
def criterion_jump(constants=CONSTANTS, gammas=(0.5, 1.0, 2.0)):
    """u = H(x - 1/2): exact value 2/(gamma + 1) at lambda = 1e4."""
    C1 = constants["C1"]
    u = catalog.step(0.5)
    rows = []
    for g in gammas:
        target = C1 / (g + 1)
        e = f_eval(u, None, g, 1e4, warn=False)
        rows.append(_row("jump-closed-form", e.value, target, e.error_bound + 5e-3 * target,
                         "eq", 2, f"[gamma={g}]"))
    return rows


@_timed
def criterion_mixed(constants=CONSTANTS):
    """u = x + H(x - 1/2), gamma = 1: sweep tail near 2/gamma + 2/(gamma + 1)."""
    C1 = constants["C1"]
    g = 1.0
    target = C1 / g + C1 / (g + 1)
    res = lambda_sweep(catalog.affine() + catalog.step(0.5), None, g,
                       np.geomspace(1e2, 1e6, 9), warn=False)
    tail = res.rows[-max(1, int(math.ceil(0.25 * len(res.rows)))):]
    worst = max(tail, key=lambda r: abs(r.estimate.value - target))
    return [_row("mixed-tail", worst.estimate.value, target,
                 0.02 * target + worst.estimate.error_bound, "eq", 3)]


@_timed
def criterion_cantor(constants=CONSTANTS, points=5, rtol=3e-2):
    """Cantor function, gamma = 1: tail over [1e4, 1e6] bounded below and above."""
    C1 = constants["C1"]
    g = 1.0
    u = catalog.cantor()
    res = lambda_sweep(u, None, g, np.geomspace(1e4, 1e6, points), rtol=rtol, warn=False)
    vals = [r.estimate.value for r in res.rows]
    errs = [r.estimate.error_bound for r in res.rows]
    lower = C1 / (g + 1) * 1.0
    i = int(np.argmin(vals))
    return [_row("cantor-lower-bound", vals[i], lower, errs[i] + 0.01 * lower, "ge", 4),
            _row("cantor-bounded", max(vals), 5.0, max(errs), "le", 4)]


@_timed
def criterion_recovery(constants=CONSTANTS, stages=(1, 2, 4, 8, 16, 32)):
    """Recovery family for the Cantor function, gamma = 1."""
    C1 = constants["C1"]
    g = 1.0
    fam = recovery.build_recovery_family(catalog.cantor(), g, stages, "split", rtol=1e-2)
    limit = C1 / (g + 1) * 1.0
    # worst excess of a stage certificate over limit + 1/k
    worst = max(s.f_value - s.f_error - 1.0 / s.k for s in fam.stages)
    gaps = [s.area_gap for s in fam.stages]
    rise = max(np.diff(gaps).max(initial=0.0), 0.0)
    ok = all(s.verified for s in fam.stages)
    return [_row("recovery-certificates", worst if ok else math.inf, limit, 1e-12, "le", 5),
            _row("recovery-area-gap", gaps[-1] + (math.inf if rise > 1e-10 else 0.0), 0.0,
                 1e-2, "le", 5)]


@_timed
def criterion_full_staircase(constants=CONSTANTS, stages=(1, 2, 4, 8, 16, 32)):
    """Full staircase of u = x, gamma = 1: limsup at most 2/(gamma + 1) < 2/gamma."""
    C1 = constants["C1"]
    g = 1.0
    fam = recovery.build_recovery_family(catalog.affine(), g, stages, "full", rtol=1e-3)
    worst = max(max(s.f_value, s.f_tail) - 1.0 / s.k for s in fam.stages)
    top = max(max(s.f_value + s.f_error, s.f_tail) for s in fam.stages)
    return [_row("full-staircase-limsup", worst, C1 / (g + 1), 1e-12, "le", 6),
            _row("full-staircase-below-pointwise", top, C1 / g, -1e-9, "le", 6)]


@_timed
def criterion_disk(constants=CONSTANTS, samples=MC_SAMPLES_2D, seed=DEFAULT_SEED,
                   radius=0.3, lam=1e3):
    """Disk indicator in (-1, 1)^2, gamma = 1: closed form and direct Monte Carlo."""
    C2 = constants["C2"]
    g = 1.0
    u = slicer.disk_indicator(radius)
    est = slicer.f_eval_2d(u, g, lam)
    target = C2 / (g + 1) * 2 * math.pi * radius
    mc, se = slicer.f_eval_mc_2d(u, g, lam, samples, seed)
    return [_row("disk-closed-form", est.value, target, 0.05 * target, "eq", 7),
            _row("disk-mc", est.value, mc, 3 * se + est.error_bound, "eq", 7)]


def random_catalog_function(rng):
    """Random sum of catalog terms on (0, 1).

    The smooth part is either a polynomial or a sine (sine pieces do not
    combine with overlapping polynomial pieces).
    """
    if rng.random() < 0.3:
        terms = [catalog.sine(rng.uniform(0.1, 0.5), rng.uniform(1, 8), rng.uniform(0, 6))]
    else:
        terms = [catalog.poly([rng.uniform(-1, 1), rng.uniform(-2, 2), rng.uniform(-2, 2),
                               rng.uniform(-2, 2)])]
    if rng.random() < 0.6:
        terms.append(catalog.step(rng.uniform(0.2, 0.8), rng.uniform(-1.5, 1.5)))
    if rng.random() < 0.4:
        a = rng.uniform(0.0, 0.5)
        terms.append(catalog.cantor(rng.uniform(0.3, 1.0), (a, a + rng.uniform(0.2, 0.5))))
    return catalog.sum_of(*terms)


def random_ramp(rng):
    """Increasing function, b1 left of L1 and b2 right of L2, with all three parts."""
    L1 = rng.uniform(-1, 0)
    L2 = L1 + rng.uniform(0.5, 2)
    b1 = rng.uniform(-1, 1)
    n = 6
    knots = np.linspace(L1, L2, n)
    vals = b1 + np.concatenate([[0.0], np.cumsum(rng.uniform(0, 0.5, n - 1))])
    u = catalog.spline(knots, vals, domain=((L1 - 5, L2 + 5),))
    loc = rng.uniform(L1, L2)
    u = u + catalog.step(loc, rng.uniform(0.1, 1.0), ((L1 - 5, L2 + 5),))
    a = rng.uniform(L1, 0.5 * (L1 + L2))
    u = u + catalog.cantor(rng.uniform(0.1, 1.0), (a, a + 0.5 * (L2 - L1)),
                           ((L1 - 5, L2 + 5),))
    return u, (L1, L2)


def _nu_cells(rng, n):
    a = rng.uniform(-2, 2, n)
    c = rng.uniform(-2, 2, n)
    return np.column_stack([a, a + rng.uniform(0.01, 1, n), c, c + rng.uniform(0.01, 1, n)])


@_timed
def criterion_properties(constants=CONSTANTS, seed=DEFAULT_SEED):
    """Kernel symmetry and additivity, scaling, nesting, staircase and ramp checks."""
    rng = np.random.default_rng(seed)
    rows = []
    # kernel: symmetry under (x, y) -> (y, x) and additivity under random cuts
    cells = _nu_cells(rng, 100)
    sym = adds = 0.0
    for g in (0.5, 1.0, 2.0):
        v = nu_gamma_cell(cells, g)
        vt = nu_gamma_cell(cells[:, [2, 3, 0, 1]], g)
        sym = max(sym, float(np.max(np.abs(v - vt) / np.maximum(v, 1e-300))))
        sx = rng.uniform(cells[:, 0], cells[:, 1])
        sy = rng.uniform(cells[:, 2], cells[:, 3])
        parts = sum(nu_gamma_cell(np.column_stack(p), g) for p in (
            (cells[:, 0], sx, cells[:, 2], sy), (sx, cells[:, 1], cells[:, 2], sy),
            (cells[:, 0], sx, sy, cells[:, 3]), (sx, cells[:, 1], sy, cells[:, 3])))
        adds = max(adds, float(np.max(np.abs(parts - v) / np.maximum(v, 1e-300))))
    rows.append(_row("kernel-symmetry", sym, 0.0, 1e-12, "le", 8))
    rows.append(_row("kernel-additivity", adds, 0.0, 1e-12, "le", 8))
    # scaling F_lam(c u) = c F_{lam / c}(u)
    worst = -math.inf
    for _ in range(10):
        u = random_catalog_function(rng)
        c = rng.uniform(0.5, 3.0)
        g = float(rng.choice([1.0, 1.5, 2.0]))
        lam = rng.uniform(20, 200)
        e1 = f_eval(u * c, None, g, lam, rtol=1e-2, warn=False)
        e2 = f_eval(u, None, g, lam / c, rtol=1e-2, warn=False)
        worst = max(worst, abs(e1.value - c * e2.value) - (e1.error_bound + c * e2.error_bound))
    rows.append(_row("scaling", worst, 0.0, 0.0, "le", 8))
    # nu(E_lambda) is non-increasing in lambda
    worst = -math.inf
    for _ in range(5):
        u = random_catalog_function(rng)
        g = float(rng.choice([1.0, 2.0]))
        nus = []
        for lam in np.geomspace(5, 500, 6):
            e = f_eval(u, None, g, lam, rtol=1e-2, warn=False)
            nus.append(((e.value - e.error_bound) / lam, (e.value + e.error_bound) / lam))
        for (lo0, hi0), (lo1, hi1) in zip(nus, nus[1:]):
            worst = max(worst, lo1 - hi0)
    rows.append(_row("lambda-monotone", worst, 0.0, 0.0, "le", 8))
    # staircase invariants
    l1_excess = var_excess = -math.inf
    funcs = [catalog.affine(), catalog.cantor(), catalog.sine(1.0, 10.0),
             catalog.affine() + catalog.cantor(0.5), catalog.poly([0, 1, -3, 2])]
    for u in funcs:
        lo, hi = recovery._sup_inf(u, u.domain)
        M = max(abs(lo), abs(hi)) * 1.001
        k = 16
        eps = 1.01 * (2 * M / k) * u.domain.measure
        r = recovery.staircase_result(u, recovery.StaircaseParams(M, k, 33), eps)
        l1_excess = max(l1_excess, r.l1_gap - 4 * eps)
        var_excess = max(var_excess, r.variation_after - r.variation_before)
    rows.append(_row("staircase-l1", l1_excess, 0.0, 0.0, "le", 8))
    rows.append(_row("staircase-variation", var_excess, 0.0, 1e-12, "le", 8))
    # monotone transition bound on random ramps
    worst = -math.inf
    for _ in range(5):
        u, (L1, L2) = random_ramp(rng)
        g = float(rng.choice([0.5, 1.0, 2.0]))
        delta = rng.uniform(0.05, 0.5)
        rise = u.right_limit(L2 + 1) - u.right_limit(L1 - 1)
        lam = 1.5 * rise / delta ** (1 + g)
        e = f_eval(u, ((L1 - delta, L2 + delta),), g, lam, rtol=1e-2, warn=False)
        bound = constants["C1"] * rise / (g + 1)
        worst = max(worst, bound - (e.value + e.error_bound))
    rows.append(_row("ramp-bound", worst, 0.0, 0.0, "le", 8))
    return rows


CRITERIA = {
    1: criterion_linear,
    2: criterion_jump,
    3: criterion_mixed,
    4: criterion_cantor,
    5: criterion_recovery,
    6: criterion_full_staircase,
    7: criterion_disk,
    8: criterion_properties,
}

TIME_LIMITS = {1: 15.0, 2: 5.0, 3: 30.0, 4: 60.0, 5: 300.0, 6: 120.0, 7: 300.0, 8: 120.0}


def claim_suite(criteria=None, constants=None, log=None):
    """Run the acceptance matrix; returns the list of ReportRows."""
    consts = dict(CONSTANTS, **(constants or {}))
    rows = []
    for n in criteria or sorted(CRITERIA):
        got = CRITERIA[n](consts)
        rows.extend(got)
        if log is not None:
            for r in got:
                log(r.line())
    return rows


def suite_summary(rows):
    return {"rows": [r.to_dict() for r in rows],
            "anchors": {r.claim: r.anchor for r in rows},
            "passed": all(r.passed for r in rows)}
