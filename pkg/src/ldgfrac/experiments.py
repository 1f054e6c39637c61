"""Experiment configuration, builtin presets, convergence/projection sweeps and CSV output."""
from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import (HEAVISIDE_NOTE, ConvergencePoint, ConvergenceReport, fit_order,
                       l2_error_at_T, predicted_for, q_error_QT)
from .exceptions import ConfigError, DegenerateFit, NonFinite
from .fracfun import SingularSolution, SolutionKind
from .ldg import LdgProblem
from .mesh import Mesh1D
from .projection import (PROJECTIONS, SHAPES, ReferenceFunction, measure_projection_rate,
                         predicted_projection_rate, project, projection_errors, reference_rule)
from .timestep import DEFAULT_CFL, TimeStepPlan, integrate

log = logging.getLogger(__name__)

OUTPUT_ENV = "LDGFRAC_OUTPUT_DIR"
MODES = ("converge", "project")
MAX_HALVINGS = 8
Q_SNAPSHOTS = 50


def _parse_float(text: str) -> float:
    t = text.strip().lower()
    if t in ("pi", "π"):
        return math.pi
    if t in ("inf", "infinity"):
        return math.inf
    return float(t)


def parse_p_range(text: str) -> tuple[int, ...]:
    """'4,5,6', '4-16' or '4:16:2' (inclusive)."""
    t = text.strip()
    if not t:
        return ()
    try:
        if ":" in t:
            lo, hi, step = (int(v) for v in t.split(":"))
            return tuple(range(lo, hi + 1, step))
        if "-" in t and "," not in t:
            lo, hi = (int(v) for v in t.split("-"))
            return tuple(range(lo, hi + 1))
        return tuple(int(v) for v in t.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad p_range {text!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a solver convergence sweep or a reference projection study.

    For ``mode = project`` the ``kind`` names a reference shape (left, right,
    interior, smooth, polynomial) and ``theta`` is the reference-element
    location of an interior singularity; c, d, T and the mesh are unused.
    """

    name: str
    mode: str = "converge"
    kind: str = SolutionKind.POWER_LEFT.value
    alpha: float = math.pi
    theta: float | None = None
    zeta: float | None = None
    c: float = 0.1
    d: float = 0.0
    T: float = 1.0
    a: float = 0.0
    b: float = 1.0
    n_elements: int = 4
    uniform: bool = True
    p_values: tuple[int, ...] = tuple(range(4, 17))
    projection: str = "minus"
    cfl: float = DEFAULT_CFL
    audit: bool = True
    tolerance: float = 0.3
    output: str | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p_values", tuple(int(p) for p in self.p_values))
        self.validate()

    def validate(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise ConfigError(f"experiment name must be a non-empty token, got {self.name!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.p_values:
            raise ConfigError("p_range is empty")
        if any(q <= p for p, q in zip(self.p_values, self.p_values[1:])):
            raise ConfigError("p_range must be strictly increasing")
        if min(self.p_values) < 1:
            raise ConfigError("degrees must be at least 1")
        if self.n_elements < 1:
            raise ConfigError("element count must be at least 1")
        if not self.c > 0:
            raise ConfigError("c must be positive")
        if not self.d >= 0:
            raise ConfigError("d must be non-negative")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if not self.a < self.b:
            raise ConfigError("domain must have a < b")
        if not self.uniform:
            raise ConfigError("only uniform meshes are supported")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.mode == "project":
            if self.kind not in SHAPES:
                raise ConfigError(f"projection kind must be one of {SHAPES}")
            if self.projection not in PROJECTIONS:
                raise ConfigError(f"projection must be one of {PROJECTIONS}")
            if self.kind == "interior" and self.theta is None:
                raise ConfigError("interior shape needs theta")
        else:
            try:
                self.solution()
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    # -- builders --------------------------------------------------------------
    def solution(self) -> SingularSolution:
        kind = SolutionKind(self.kind)
        if kind is SolutionKind.SMOOTH:
            return SingularSolution.smooth()
        if kind is SolutionKind.FRAC_INT_HEAVISIDE:
            if self.zeta is None:
                raise ConfigError("Heaviside kind needs zeta")
            return SingularSolution.frac_int_heaviside(self.zeta, self.alpha)
        if kind is SolutionKind.ABS_POWER_INTERIOR:
            if self.theta is None:
                raise ConfigError("interior kind needs theta")
            return SingularSolution.abs_power_interior(self.theta, self.alpha)
        return SingularSolution(kind, alpha=self.alpha)

    def reference_function(self) -> ReferenceFunction:
        return ReferenceFunction(self.kind, self.alpha, self.theta or 0.0)

    def mesh(self, p: int) -> Mesh1D:
        return Mesh1D.uniform(self.a, self.b, self.n_elements, p)

    def problem(self, p: int) -> LdgProblem:
        return LdgProblem.from_solution(self.solution(), self.c, self.d, self.T, self.mesh(p))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    # -- serialization ---------------------------------------------------------
    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        section = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "p_values":
                section["p_range"] = ",".join(str(p) for p in value)
            elif isinstance(value, float):
                section[f.name] = repr(value)
            else:
                section[f.name] = str(value).lower() if isinstance(value, bool) else str(value)
        parser["experiment"] = section
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        if "experiment" not in parser:
            raise ConfigError("config needs an [experiment] section")
        sec = parser["experiment"]
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        try:
            for key, raw in sec.items():
                key = "T" if key == "t" else key  # configparser lower-cases keys
                if key == "p_range":
                    kwargs["p_values"] = parse_p_range(raw)
                elif key not in known:
                    raise ConfigError(f"unknown config key {key!r}")
                elif key in ("alpha", "theta", "zeta", "c", "d", "T", "a", "b", "cfl",
                             "tolerance"):
                    kwargs[key] = _parse_float(raw)
                elif key in ("n_elements", "seed"):
                    kwargs[key] = int(raw)
                elif key in ("uniform", "audit"):
                    kwargs[key] = configparser.ConfigParser.BOOLEAN_STATES[raw.strip().lower()]
                else:
                    kwargs[key] = raw.strip()
        except ConfigError:
            raise
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value in config: {exc}") from exc
        if "name" not in kwargs:
            raise ConfigError("config needs a name")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.from_ini(text)


# -- presets -----------------------------------------------------------------------

_FULL = tuple(range(4, 17))
# singular point at an element midpoint: p and p+1 give near-identical errors
_EVEN = tuple(range(4, 17, 2))


def _presets() -> dict[str, ExperimentConfig]:
    out = {}

    def add(cfg):
        out[cfg.name] = cfg

    for suffix, d in (("d0", 0.0), ("d01", 0.1)):
        add(ExperimentConfig(f"fig1-right-{suffix}", kind="power-left", d=d, p_values=_FULL))
        add(ExperimentConfig(f"fig2-left-{suffix}", kind="power-left-modulated", d=d,
                             p_values=_FULL))
        add(ExperimentConfig(f"fig2-right-{suffix}", kind="frac-int-heaviside", zeta=0.125, d=d,
                             p_values=_EVEN))
        add(ExperimentConfig(f"fig3-fitted-{suffix}", kind="abs-power-interior", theta=0.25,
                             d=d, p_values=_FULL))
        add(ExperimentConfig(f"fig3-unfitted-{suffix}", kind="abs-power-interior", theta=0.125,
                             d=d, p_values=_EVEN))
    proj_p = tuple(range(8, 65, 8))
    for alpha, tag in ((0.5, "0.5"), (1.2, "1.2"), (math.pi, "pi")):
        for proj in ("minus", "plus"):
            add(ExperimentConfig(f"proj-left-{tag}-{proj}", mode="project", kind="left",
                                 alpha=alpha, projection=proj, p_values=proj_p, tolerance=0.15))
        add(ExperimentConfig(f"proj-interior-{tag}", mode="project", kind="interior",
                             alpha=alpha, theta=0.0, projection="minus", p_values=proj_p,
                             tolerance=0.15))
    add(ExperimentConfig("proj-right-1.2-minus", mode="project", kind="right", alpha=1.2,
                         projection="minus", p_values=proj_p, tolerance=0.15))
    add(ExperimentConfig("proj-polynomial", mode="project", kind="polynomial",
                         projection="minus", p_values=(4, 8, 16, 32), tolerance=0.15))
    return out


PRESETS: dict[str, ExperimentConfig] = _presets()


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; try list-presets") from None


# -- sweeps ------------------------------------------------------------------------

@dataclass(frozen=True)
class PointResult:
    p: int
    error_u: float
    error_q: float | None
    dt_used: float
    audit_pass: bool | None


def _solve(cfg: ExperimentConfig, prob: LdgProblem, plan: TimeStepPlan):
    s = cfg.solution()
    res = integrate(prob, plan, q_snapshots=Q_SNAPSHOTS if cfg.d > 0 else 0)
    eu = l2_error_at_T(res.u, s, prob.mesh, cfg.T)
    eq = q_error_QT(res.q_times, res.q_snapshots, s, cfg.d, prob.mesh) if cfg.d > 0 else None
    return eu, eq


def run_point(cfg: ExperimentConfig, p: int) -> PointResult:
    """Solve at degree p; with the audit on, halve dt until the error settles."""
    prob = cfg.problem(p)
    plan = TimeStepPlan.for_problem(prob, cfg.cfl)
    try:
        eu, eq = _solve(cfg, prob, plan)
        if not cfg.audit:
            return PointResult(p, eu, eq, plan.dt, None)
        for _ in range(MAX_HALVINGS):
            finer = plan.halved()
            eu2, eq2 = _solve(cfg, prob, finer)
            if abs(eu - eu2) < 0.01 * eu2:
                return PointResult(p, eu, eq, plan.dt, True)
            log.info("%s p=%d: dt=%.3g not converged in time, halving", cfg.name, p, plan.dt)
            plan, eu, eq = finer, eu2, eq2
        return PointResult(p, eu, eq, plan.dt, False)
    except NonFinite as exc:
        raise NonFinite(f"{cfg.name}, p={p}: {exc}", step=exc.step) from exc


def _map_points(cfg: ExperimentConfig, workers: int):
    if workers <= 1:
        return [run_point(cfg, p) for p in cfg.p_values]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps results in p order regardless of completion order
        return list(pool.map(run_point, [cfg] * len(cfg.p_values), cfg.p_values))


def run_convergence_suite(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    if cfg.mode != "converge":
        raise ConfigError(f"{cfg.name} is not a convergence experiment")
    results = _map_points(cfg, workers)
    points = tuple(ConvergencePoint(r.p, r.error_u, r.error_q, r.dt_used, r.audit_pass)
                   for r in results)
    s = cfg.solution()
    predicted = predicted_for(s, cfg.mesh(cfg.p_values[0]), cfg.d)
    notes = []
    if s.kind is SolutionKind.FRAC_INT_HEAVISIDE:
        notes.append(HEAVISIDE_NOTE)
    try:
        fit = fit_order([(pt.p, pt.error_u) for pt in points])
    except DegenerateFit as exc:
        raise DegenerateFit(f"{cfg.name}: {exc}") from exc
    secondary = None
    if cfg.d > 0:
        try:
            secondary = fit_order([(pt.p, pt.error_u + pt.error_q) for pt in points]).slope
        except DegenerateFit:
            notes.append("combined u+q errors stagnate; no slope")
    return ConvergenceReport(cfg.name, points, fit.slope, predicted, cfg.tolerance,
                             fit.dropped, tuple(notes),
                             secondary_label="u+q" if cfg.d > 0 else "",
                             secondary_slope=secondary)


def run_projection_suite(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    """Reference-element projection study; ``workers`` is accepted for symmetry."""
    if cfg.mode != "project":
        raise ConfigError(f"{cfg.name} is not a projection experiment")
    func = cfg.reference_function()
    points = []
    for p in cfg.p_values:
        quad = reference_rule(p, func.singular_points)
        e = projection_errors(func, project(func, p, quad, cfg.projection), quad)
        trace = {"minus": e.left_trace_error, "plus": e.right_trace_error}.get(
            cfg.projection, max(e.left_trace_error, e.right_trace_error))
        points.append(ConvergencePoint(p, e.l2_error, trace_error=trace))
    scale = float(np.sqrt(reference_rule(4).integrate(lambda x: func(x) ** 2)))
    if all(pt.error_u <= 1e-12 * scale for pt in points):
        return ConvergenceReport(cfg.name, tuple(points), math.nan, None, cfg.tolerance,
                                 notes=("errors at round-off floor",), exact=True)
    try:
        rate = measure_projection_rate(func, cfg.projection, cfg.p_values)
    except DegenerateFit as exc:
        raise DegenerateFit(f"{cfg.name}: {exc}") from exc
    pred_trace = predicted_projection_rate(func.shape, func.alpha, cfg.projection, "trace")
    return ConvergenceReport(cfg.name, tuple(points), rate.slope, rate.predicted, cfg.tolerance,
                             dropped=2, secondary_label="trace",
                             secondary_slope=rate.trace_slope, secondary_predicted=pred_trace)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    if cfg.mode == "project":
        return run_projection_suite(cfg, workers)
    return run_convergence_suite(cfg, workers)


# -- CSV ---------------------------------------------------------------------------

def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_csv(report: ConvergenceReport, mode: str = "converge") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if mode == "project":
        w.writerow(["p", "l2_error", "trace_error", "predicted_rate"])
        for pt in report.points:
            w.writerow([pt.p, _cell(pt.error_u), _cell(pt.trace_error),
                        _cell(report.predicted_slope)])
    else:
        w.writerow(["p", "error_u", "error_q", "dt_used", "audit_pass"])
        for pt in report.points:
            w.writerow([pt.p, _cell(pt.error_u), _cell(pt.error_q), _cell(pt.dt_used),
                        _cell(pt.audit_pass)])
    buf.write("# " + report.summary() + "\n")
    return buf.getvalue()


def default_output(cfg: ExperimentConfig) -> Path:
    if cfg.output:
        return Path(cfg.output)
    return Path(os.environ.get(OUTPUT_ENV, "results")) / f"{cfg.name}.csv"


def write_report(report: ConvergenceReport, cfg: ExperimentConfig,
                 path: str | os.PathLike | None = None) -> Path:
    out = Path(path) if path else default_output(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(report_csv(report, cfg.mode))
    return out


def preset_names(prefix: str = "") -> Sequence[str]:
    return sorted(n for n in PRESETS if n.startswith(prefix))
