"""Experiment configuration, seeded trials, rate sweeps and result files."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import refine, sampler, spectral
from .evaluate import misclassification
from .model import ModelParams, ParameterError, gch_threshold, in_xi
from .rng import derive_seed

CSV_COLUMNS = ("scale", "gch", "trials", "exact_rate", "stage1_err_mean", "final_err_mean", "seed")
DEFAULT_RADIUS_MULTIPLIER = 10.0
DEFAULT_TRIM_CONSTANT = 20.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    gamma_formula: str = "sqrt_log"
    gamma_multiplier: float = 1.0
    trim_constant: float = DEFAULT_TRIM_CONSTANT
    radius_multiplier: float = DEFAULT_RADIUS_MULTIPLIER
    trials: int = 20
    seed: int = 0
    sweep: tuple[float, ...] = (1.0,)
    strategy: str | None = None
    workers: int = 1
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.sweep:
            raise ConfigError("sweep must list at least one scale factor")
        for s in self.sweep:
            if not s > 0:
                raise ConfigError(f"scale factors must be positive, got {s}")
            if self.params.edge_prob(s * self.params.q_max) > 1.0:
                raise ConfigError(f"scale {s} pushes a hyperedge probability above 1")
        if self.gamma_formula not in ("sqrt_log", "fixed"):
            raise ConfigError(f"unknown gamma formula {self.gamma_formula!r}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.strategy not in (None, "exact", "stratified"):
            raise ConfigError(f"unknown sampling strategy {self.strategy!r}")
        rate = self.gamma_n / math.log(self.params.n)
        if not 0 < rate < 1:
            raise ConfigError(f"gamma_n / log n = {rate:.4g} must lie in (0, 1)")

    @property
    def gamma_n(self) -> float:
        """Splitting parameter: multiplier * sqrt(log n), or the multiplier itself for ``fixed``."""
        if self.gamma_formula == "fixed":
            return self.gamma_multiplier
        return self.gamma_multiplier * sampler.default_gamma(self.params.n)


def _params_from_dict(raw: dict) -> ModelParams:
    try:
        n, k, d = int(raw["n"]), int(raw["k"]), int(raw["d"])
        p = raw.get("p") or [1.0 / k] * k
        q = raw["Q"]
        if "symmetric" in q:
            sym = q["symmetric"]
            return ModelParams.symmetric(n, k, d, float(sym["q_in"]), float(sym["q_out"]), p=p)
        if "matrix" in q:
            if d != 2:
                raise ConfigError("a Q matrix is only meaningful for d = 2")
            return ModelParams.sbm(n, q["matrix"], p)
        if "table" in q:
            table = {tuple(int(c) for c in row["T"]): float(row["rate"]) for row in q["table"]}
            return ModelParams(n=n, k=k, d=d, p=tuple(p), Q=table)
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from exc
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("Q must be given as 'symmetric', 'matrix' or 'table'")


def config_from_dict(raw: dict) -> ExperimentConfig:
    params = _params_from_dict(raw)
    gamma = raw.get("gamma", {})
    out = raw.get("output", {})
    sweep = raw.get("sweep")
    if sweep is None and "sweep_gch" in raw:
        # target thresholds; the GCH value is linear in the rate scale
        base, _ = gch_threshold(params)
        if base <= 0:
            raise ConfigError("sweep_gch needs a model with positive GCH threshold")
        sweep = [float(t) / base for t in raw["sweep_gch"]]
    try:
        return ExperimentConfig(
            params=params,
            gamma_formula=gamma.get("formula", "sqrt_log"),
            gamma_multiplier=float(gamma.get("multiplier", 1.0)),
            trim_constant=float(raw.get("trim_constant", DEFAULT_TRIM_CONSTANT)),
            radius_multiplier=float(raw.get("radius_multiplier", DEFAULT_RADIUS_MULTIPLIER)),
            trials=int(raw.get("trials", 20)),
            seed=int(raw.get("seed", 0)),
            sweep=tuple(float(s) for s in (sweep or [1.0])),
            strategy=raw.get("strategy"),
            workers=int(raw.get("workers", 1)),
            output_path=out.get("path"),
            output_format=out.get("format", "csv"),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


@dataclass
class TrialRecord:
    seed: int
    scale: float
    gch: float
    gch_pair: tuple[int, int]
    in_xi: bool
    stage1_misclassification: float | None = None
    final_misclassification: float | None = None
    exact: bool = False
    times: dict = field(default_factory=dict)
    failure: str | None = None

    def as_dict(self, timings=True) -> dict:
        out = asdict(self)
        out["gch_pair"] = list(self.gch_pair)
        if not timings:
            out.pop("times")
        return out


def run_trial(cfg: ExperimentConfig, scale: float, seed: int) -> TrialRecord:
    """Labels, hypergraph, split, Stage 1 on G1, Stage 2 on G2, evaluation.

    Stage failures are recorded in ``failure`` rather than raised.
    """
    params = cfg.params.scaled(scale)
    gch, pair = gch_threshold(params)
    xi, _ = in_xi(params)
    rec = TrialRecord(seed=seed, scale=scale, gch=gch, gch_pair=pair, in_xi=xi)
    gamma_n = cfg.gamma_n
    stage = "sample"
    try:
        t0 = time.perf_counter()
        z = sampler.sample_labels(params, seed)
        g = sampler.sample_hsbm(params, z, seed, cfg.strategy)
        pair_ = sampler.split_hypergraph(g, gamma_n, seed)
        t1 = time.perf_counter()
        rec.times["sample"] = t1 - t0

        stage = "stage1"
        tau = spectral.default_tau(params, gamma_n, cfg.trim_constant)
        r = spectral.default_radius(params.n, gamma_n, cfg.radius_multiplier)
        z0, _ = spectral.stage1(pair_.g1, params.k, tau, r, seed)
        t2 = time.perf_counter()
        rec.times["stage1"] = t2 - t1
        rec.stage1_misclassification = misclassification(z0, z, params.k).misclassification

        stage = "stage2"
        z_hat = refine.refine_all(pair_.g2, z0, params, gamma_n)
        rec.times["stage2"] = time.perf_counter() - t2
        report = misclassification(z_hat, z, params.k)
        rec.final_misclassification = report.misclassification
        rec.exact = report.exact
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        rec.failure = f"{stage}: {type(exc).__name__}: {exc}"
    return rec


@dataclass(frozen=True)
class SweepRow:
    scale: float
    gch: float
    trials: int
    exact_rate: float
    stage1_err_mean: float
    final_err_mean: float
    seed: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    records: list[TrialRecord]
    gch_crossing_scale: float | None
    monotone_violations: list[tuple[float, float]]  # (scale, drop) where exact_rate decreased


def _mean(values) -> float:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else math.nan


def aggregate(scale: float, gch: float, records: list[TrialRecord], seed: int) -> SweepRow:
    return SweepRow(
        scale=scale,
        gch=gch,
        trials=len(records),
        exact_rate=sum(r.exact for r in records) / len(records),
        stage1_err_mean=_mean(r.stage1_misclassification for r in records),
        final_err_mean=_mean(r.final_misclassification for r in records),
        seed=seed,
    )


def _trial_job(args):
    cfg, scale, seed = args
    return run_trial(cfg, scale, seed)


def trial_seeds(cfg: ExperimentConfig) -> list[list[int]]:
    return [[derive_seed(cfg.seed, si, ti) for ti in range(cfg.trials)] for si in range(len(cfg.sweep))]


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Run ``cfg.trials`` trials at every scale factor and summarize each scale."""
    workers = cfg.workers if workers is None else workers
    seeds = trial_seeds(cfg)
    jobs = [(cfg, s, seed) for s, row in zip(cfg.sweep, seeds) for seed in row]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_job, jobs))
    else:
        records = [_trial_job(j) for j in jobs]

    rows = []
    for si, scale in enumerate(cfg.sweep):
        chunk = records[si * cfg.trials:(si + 1) * cfg.trials]
        gch, _ = gch_threshold(cfg.params.scaled(scale))
        rows.append(aggregate(scale, gch, chunk, cfg.seed))
    return SweepResult(
        rows=rows,
        records=records,
        gch_crossing_scale=gch_crossing(rows),
        monotone_violations=monotone_violations(rows),
    )


def gch_crossing(rows: list[SweepRow]) -> float | None:
    """Scale at which the GCH threshold equals 1, interpolated between sweep points."""
    pts = sorted((r.scale, r.gch) for r in rows)
    for (s0, g0), (s1, g1) in zip(pts, pts[1:]):
        if g0 == 1.0:
            return s0
        if (g0 - 1.0) * (g1 - 1.0) < 0:
            return s0 + (1.0 - g0) * (s1 - s0) / (g1 - g0)
    if pts and pts[-1][1] == 1.0:
        return pts[-1][0]
    return None


def monotone_violations(rows: list[SweepRow]) -> list[tuple[float, float]]:
    pts = sorted((r.scale, r.exact_rate) for r in rows)
    return [(s1, e0 - e1) for (s0, e0), (s1, e1) in zip(pts, pts[1:]) if e1 < e0]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _json_text(obj) -> str:
    """JSON with floats written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_text(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_text(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render(result: SweepResult | list[SweepRow], fmt: str) -> str:
    """Sweep rows as CSV or JSON text; timing fields are never included."""
    rows = result.rows if isinstance(result, SweepResult) else list(result)
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {"rows": [{c: getattr(r, c) for c in CSV_COLUMNS} for r in rows]}
        if isinstance(result, SweepResult):
            doc["gch_crossing_scale"] = result.gch_crossing_scale
            doc["monotone_violations"] = [list(v) for v in result.monotone_violations]
        return _json_text(doc) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(result: SweepResult | list[SweepRow], fmt: str, path) -> Path:
    path = Path(path)
    text = render(result, fmt)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_csv(path) -> list[SweepRow]:
    lines = Path(path).read_text().splitlines()
    if tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header {lines[0]!r}")
    rows = []
    for line in lines[1:]:
        f = line.split(",")
        rows.append(SweepRow(float(f[0]), float(f[1]), int(f[2]), float(f[3]), float(f[4]), float(f[5]), int(f[6])))
    return rows


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
