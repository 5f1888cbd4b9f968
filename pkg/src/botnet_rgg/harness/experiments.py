"""Power, risk, audit and histogram sweeps over a parameter grid.

Every replicate draws from its own stream ``derive_rng(seed, purpose,
grid_index, replicate)``, and results are reduced in replicate order, so the
output depends only on the config and never on the worker count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import astuple, dataclass, fields
from functools import partial
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

from botnet_rgg.detection import (
    CalibrationTable,
    calibrate,
    distance_threshold,
    isolated_star_profile,
)
from botnet_rgg.estimation import NoWedgesError, estimate_parameters
from botnet_rgg.geometry import kissing_number
from botnet_rgg.graph import NoConnectedPairsError, average_graph_distance
from botnet_rgg.harness.config import ExperimentConfig
from botnet_rgg.identification import identification_risk, identify_botnet
from botnet_rgg.numerics import DomainError
from botnet_rgg.parallel import ordered_map
from botnet_rgg.samplers import ModelParams, derive_rng, sample, sample_alternative

log = logging.getLogger(__name__)

TEST_STATISTIC = {"star": "max_star", "distance": "avg_distance"}


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def to_csv(rows: Sequence, header: Sequence[str] | None = None) -> str:
    """Rows of dataclasses (or tuples with ``header``) as LF-terminated CSV."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is None:
        if not rows:
            raise ValueError("need a header for an empty table")
        header = [f.name for f in fields(rows[0])]
    w.writerow(header)
    for row in rows:
        values = astuple(row) if hasattr(row, "__dataclass_fields__") else row
        w.writerow([_fmt(v) for v in values])
    return buf.getvalue()


def feasible_grid(config: ExperimentConfig, *, warn: bool = True) -> list[tuple[int, ModelParams]]:
    """``(grid_index, params)`` for grid points whose radius is at most 1/2."""
    out = []
    for gi, (n, d, np_, k) in enumerate(config.grid()):
        try:
            out.append((gi, ModelParams.from_density(n, d, k=k, avg_degree=np_)))
        except DomainError as exc:
            if warn:
                log.warning("skipping infeasible grid point n=%s d=%s np=%s k=%s: %s", n, d, np_, k, exc)
    return out


# --------------------------------------------------------------------- power


@dataclass(frozen=True)
class PowerRow:
    d: int
    n: int
    np: float
    k: int
    test: str
    threshold_source: str
    alpha: float | None
    replicates: int
    rejections: int
    power: float
    wilson_lo: float
    wilson_hi: float

    @classmethod
    def build(cls, params: ModelParams, test: str, source: str, alpha, rejections: int, replicates: int) -> "PowerRow":
        lo, hi = wilson_interval(rejections, replicates)
        return cls(
            params.d, params.n, float(params.avg_degree), params.k, test, source,
            alpha, replicates, rejections, rejections / replicates, lo, hi,
        )

    @property
    def wilson_ci(self) -> tuple[float, float]:
        return self.wilson_lo, self.wilson_hi


def _replicate_statistics(
    replicate: int, *, params: ModelParams, seed: int, purpose: str, grid_index: int, config: ExperimentConfig,
    estimate: bool,
) -> dict:
    # k = 0 draws from the null model
    g = sample(params, derive_rng(seed, purpose, grid_index, replicate)).graph
    rec: dict = {}
    if "star" in config.tests:
        rec["max_star"] = isolated_star_profile(g, config.star_method, config.exact_cap).max_star
    if "distance" in config.tests:
        try:
            rng = derive_rng(seed, purpose + ":pairs", grid_index, replicate)
            summary = average_graph_distance(g, sample_pairs=config.distance_sample_pairs, rng=rng)
            rec["avg_distance"] = summary.average
        except NoConnectedPairsError:
            rec["avg_distance"] = math.inf
    if estimate:
        try:
            rep = estimate_parameters(g, config.d_max)
            rec["d_hat"], rec["r_hat"] = rep.d_hat, rep.r_hat
        except NoWedgesError:
            rec["d_hat"], rec["r_hat"] = None, None
    return rec


def _analytic_reject(test: str, rec: dict, d: int | None, r: float | None, epsilon: float) -> bool:
    # an estimate that admits no threshold cannot reject
    if d is None:
        return False
    if test == "star":
        return rec["max_star"] > kissing_number(d)
    if r is None:
        return False
    return rec["avg_distance"] < distance_threshold(d, r, epsilon)


def _mc_reject(test: str, rec: dict, table: CalibrationTable, alpha: float) -> bool:
    return table.rejects(rec[TEST_STATISTIC[test]], alpha)


def _calibration_tables(
    config: ExperimentConfig, params: ModelParams, cache: dict | None = None
) -> dict[str, CalibrationTable]:
    # streams depend on (n, d, p) only, so grid points differing in k share one calibration
    key = (params.n, params.d, params.p)
    if cache is not None and key in cache:
        return cache[key]
    tables = calibrate(
        params.with_k(0),
        config.calibration_replicates,
        config.alphas,
        config.seed,
        stats=tuple(TEST_STATISTIC[t] for t in config.tests),
        star_method=config.star_method,
        cap=config.exact_cap,
        workers=config.workers,
        purpose=f"calibration:{params.n}:{params.d}:{params.p!r}",
    )
    if cache is not None:
        cache[key] = tables
    return tables


def _rejection_rows(
    config: ExperimentConfig,
    params: ModelParams,
    grid_index: int,
    purpose: str,
    use_true_params: bool,
    calibrations: dict | None,
) -> list[PowerRow]:
    estimate = config.threshold_source == "analytic" and not use_true_params
    fn = partial(
        _replicate_statistics, params=params, seed=config.seed, purpose=purpose,
        grid_index=grid_index, config=config, estimate=estimate,
    )
    recs = ordered_map(fn, range(config.replicates), config.workers)
    rows = []
    if config.threshold_source == "analytic":
        for test in config.tests:
            if estimate:
                hits = sum(_analytic_reject(test, r, r["d_hat"], r["r_hat"], config.epsilon) for r in recs)
            else:
                hits = sum(_analytic_reject(test, r, params.d, params.r, config.epsilon) for r in recs)
            rows.append(PowerRow.build(params, test, "analytic", None, int(hits), config.replicates))
    else:
        tables = _calibration_tables(config, params, calibrations)
        for test in config.tests:
            table = tables[TEST_STATISTIC[test]]
            for alpha in config.alphas:
                hits = sum(_mc_reject(test, r, table, alpha) for r in recs)
                rows.append(PowerRow.build(params, test, "monte_carlo", alpha, int(hits), config.replicates))
    return rows


def run_power_sweep(config: ExperimentConfig, calibrations: dict | None = None) -> list[PowerRow]:
    """Rejection rates on alternative samples at every feasible grid point.

    Analytic thresholds use parameters estimated from each graph; Monte Carlo
    thresholds are calibrated on null samples with the true parameters.
    Calibration tables are stored in (and reused from) ``calibrations`` when
    a dict is given, keyed by ``(n, d, p)``.
    """
    calibrations = {} if calibrations is None else calibrations
    rows: list[PowerRow] = []
    for gi, params in feasible_grid(config):
        rows.extend(_rejection_rows(config, params, gi, "power", False, calibrations))
    return rows


def run_null_calibration_audit(
    config: ExperimentConfig, *, use_true_params: bool = False, calibrations: dict | None = None
) -> list[PowerRow]:
    """Type-1 error rates on fresh null samples (every ``k`` in the grid must be 0).

    Monte Carlo thresholds are calibrated on a disjoint set of null streams.
    """
    if any(k != 0 for k in config.k):
        raise ValueError("the null audit requires k = 0 throughout the grid")
    calibrations = {} if calibrations is None else calibrations
    rows: list[PowerRow] = []
    for gi, params in feasible_grid(config):
        rows.extend(_rejection_rows(config, params, gi, "audit", use_true_params, calibrations))
    return rows


# ----------------------------------------------------------------- histogram


@dataclass(frozen=True)
class HistogramRow:
    n: int
    d: int
    np: float
    k: int
    statistic: str
    hypothesis: str
    bin_lo: float
    bin_hi: float
    count: int
    threshold: float
    alpha: float


@dataclass(frozen=True)
class HistogramResult:
    rows: list[HistogramRow]
    samples: dict[tuple[int, str, str], np.ndarray]  # (grid index, statistic, hypothesis)
    thresholds: dict[tuple[int, str], float]


def _bin(values: np.ndarray, width: float | None) -> list[tuple[float, float, int]]:
    if width is None:
        keys, counts = np.unique(values.astype(np.int64), return_counts=True)
        return [(float(v), float(v + 1), int(c)) for v, c in zip(keys, counts)]
    idx = np.floor(values / width).astype(np.int64)
    keys, counts = np.unique(idx, return_counts=True)
    return [(round(int(i) * width, 12), round((int(i) + 1) * width, 12), int(c)) for i, c in zip(keys, counts)]


def run_histogram(config: ExperimentConfig) -> HistogramResult:
    """Binned null and alternative distributions of both statistics.

    The null draws at each grid point also define the ``alphas[0]``
    order-statistic threshold reported on every row.
    """
    if config.replicates < 1:
        raise ValueError("replicates must be >= 1")
    alpha = config.alphas[0]
    rows: list[HistogramRow] = []
    samples: dict = {}
    thresholds: dict = {}
    for gi, params in feasible_grid(config):
        per_hyp = {}
        for hyp, p in (("null", params.with_k(0)), ("alternative", params)):
            fn = partial(
                _replicate_statistics, params=p, seed=config.seed, purpose=f"histogram:{hyp}",
                grid_index=gi, config=config, estimate=False,
            )
            per_hyp[hyp] = ordered_map(fn, range(config.replicates), config.workers)
        for test in config.tests:
            stat = TEST_STATISTIC[test]
            null = np.array([r[stat] for r in per_hyp["null"]], dtype=float)
            table = CalibrationTable.from_samples(stat, params.with_k(0), null, [alpha])
            thr = table.threshold(alpha)
            thresholds[(gi, stat)] = thr
            width = None if stat == "max_star" else config.histogram_bin_width
            for hyp in ("null", "alternative"):
                vals = np.array([r[stat] for r in per_hyp[hyp]], dtype=float)
                samples[(gi, stat, hyp)] = vals
                for lo, hi, c in _bin(vals, width):
                    rows.append(HistogramRow(
                        params.n, params.d, float(params.avg_degree), params.k, stat, hyp, lo, hi, c, thr, alpha,
                    ))
    return HistogramResult(rows, samples, thresholds)


# ---------------------------------------------------------------------- risk


@dataclass(frozen=True)
class RiskRow:
    n: int
    d: int
    np: float
    k: int
    epsilon: float
    replicates: int
    mean_risk: float
    se_risk: float
    mean_topk_risk: float
    se_topk_risk: float
    mean_missed: float
    mean_false_positive: float


def _replicate_risk(replicate: int, *, params: ModelParams, config: ExperimentConfig, grid_index: int) -> tuple:
    s = sample_alternative(params, derive_rng(config.seed, "risk", grid_index, replicate))
    est = identify_botnet(
        s.graph, params.d, params.k, params.p, config.epsilon, method=config.star_method, cap=config.exact_cap
    )
    risk = identification_risk(est.suspects, s.botnet)
    topk = identification_risk(est.topk_suspects, s.botnet)
    return risk.value, topk.value, risk.missed, risk.false_positive


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(x.mean()), se


def run_risk_sweep(config: ExperimentConfig) -> list[RiskRow]:
    """Mean identification risk (and its standard error) per grid point."""
    if any(k < 1 for k in config.k):
        raise ValueError("risk sweeps need k >= 1 throughout the grid")
    rows = []
    for gi, params in feasible_grid(config):
        fn = partial(_replicate_risk, params=params, config=config, grid_index=gi)
        res = np.array(ordered_map(fn, range(config.replicates), config.workers), dtype=float)
        m, se = _mean_se(res[:, 0])
        mt, set_ = _mean_se(res[:, 1])
        rows.append(RiskRow(
            params.n, params.d, float(params.avg_degree), params.k, config.epsilon, config.replicates,
            m, se, mt, set_, float(res[:, 2].mean()), float(res[:, 3].mean()),
        ))
    return rows


# ---------------------------------------------------------------- isolation


@dataclass(frozen=True)
class IsolationProbe:
    n: int
    np: float
    k: int
    replicates: int
    isolated: int
    frequency: float
    reference: float  # exp(-np * k)


def _all_isolated(replicate: int, *, params: ModelParams, seed: int) -> bool:
    s = sample_alternative(params, derive_rng(seed, "isolation", replicate))
    deg = s.graph.degree()
    return bool(np.all(deg[s.botnet_array()] == 0))


def run_theorem1_probe(
    n: int, np_: float, k: int, replicates: int, seed: int, *, d: int = 2, workers: int | None = None
) -> IsolationProbe:
    """How often every botnet vertex ends up with no neighbours at all."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if np_ == 0:
        # no edges at all, so isolation is certain
        return IsolationProbe(n, 0.0, k, replicates, replicates, 1.0, 1.0)
    params = ModelParams.from_density(n, d, k=k, avg_degree=np_)
    hits = sum(ordered_map(partial(_all_isolated, params=params, seed=seed), range(replicates), workers))
    return IsolationProbe(n, float(np_), k, replicates, int(hits), hits / replicates, math.exp(-np_ * k))


def run_calibration(config: ExperimentConfig) -> list[CalibrationTable]:
    """Calibration tables for every grid point (``k`` is ignored)."""
    tables = []
    cache: dict = {}
    for _, params in feasible_grid(config):
        tables.extend(_calibration_tables(config, params, cache).values())
    return tables


def calibration_rows(tables: Iterable[CalibrationTable]) -> list[tuple]:
    rows = []
    for t in tables:
        for alpha, thr in sorted(t.alpha_to_threshold.items()):
            rows.append((t.n, t.d, t.p, t.stat, t.replicates, alpha, thr))
    return rows


CALIBRATION_HEADER = ("n", "d", "p", "statistic", "replicates", "alpha", "threshold")
