"""Monte-Carlo cells, parameter sweeps, and analytic cost curves.

One cell = one (anomaly rate, intensity) point: solve a strategy, generate
a run, obfuscate it, attack it, and report guessing error and conditional
entropy next to the prior-only ideal values (1 - R_p and H2(R_p) bits).
Sweeps grid over anomaly rate and intensity and emit plot-ready CSV with a
pinned header. Everything is deterministic given the base seed; every
estimate carries a standard error and acceptance comparisons use 3 sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .attacker import (DegenerateMetricError, DetectorConfig, guess_run,
                       guessing_error, guessing_error_se, test_run)
from .obfuscator import (CostModel, InfeasibleTargetError, KnowledgeModel,
                         Strategy, apply_strategy, costs, solve_fake_rate,
                         solve_strategy, solve_waterfill_rate)
from .traffic import IntervalModel, Run, gen_run

__all__ = [
    "SWEEP_CSV_HEADER",
    "COST_CSV_HEADER",
    "binary_entropy_bits",
    "MetricsReport",
    "run_cell",
    "SweepSpec",
    "run_sweep",
    "feasible_region",
    "sweep_to_csv",
    "CostPoint",
    "cost_curves",
    "cost_curves_to_csv",
    "realized_cost",
]

SWEEP_CSV_HEADER = ("R_p,I,S,lambda,P_tp,P_tn,budget,P_wf,P_f,epsilon,cost,"
                    "feasible_optimal,guess_err,guess_err_se,ce_bits,ce_bits_se,"
                    "ideal_guess_err,ideal_ce_bits")
COST_CSV_HEADER = "k,C_f,C_wf,lambda,I,wf_feasible"

_NAN = float("nan")


def binary_entropy_bits(p: float) -> float:
    """H2(p) in bits; 0 at the endpoints."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def _seed_tuple(seed) -> tuple[int, ...]:
    # cells derive sub-streams by appending indices to this tuple
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


@dataclass(frozen=True)
class MetricsReport:
    """One sweep cell: strategy, measured metrics, and their ideal values.

    guess_err is the attacker's error on truly anomalous intervals;
    ce_bits is the plug-in conditional entropy of the truth given the
    attacker's observable class, from the empirical 2x2 joint. Both come
    with standard errors. ideal_* are the prior-only attacker's values.
    Cells that failed keep their grid coordinates and carry the message in
    ``error`` with nan metrics.
    """

    r_p: float
    intensity: float
    slots: int
    base_rate: float
    tpr: float
    tnr: float
    budget: float
    p_waterfill: float = _NAN
    p_fake: float = _NAN
    epsilon: float = _NAN
    cost: float = _NAN
    feasible_optimal: bool = False
    guess_err: float = _NAN
    guess_err_se: float = _NAN
    ce_bits: float = _NAN
    ce_bits_se: float = _NAN
    ideal_guess_err: float = _NAN
    ideal_ce_bits: float = _NAN
    degenerate: bool = False
    realized_cost: float = _NAN
    realized_cost_se: float = _NAN
    error: str = ""


def realized_cost(run: Run, cost_model: CostModel) -> tuple[float, float]:
    """Mean per-interval relative dummy load of an obfuscated run, with SE.

    Each interval's dummy total is divided by the normalizer of the action
    applied to it (waterfilled intervals by the waterfill normalizer,
    everything else by the baseline interval load).
    """
    dummies = run.dummy_counts.sum(axis=1)
    norm = np.where(run.action == 1, cost_model.waterfill_normalizer(),
                    cost_model.fake_normalizer())
    contrib = dummies / norm
    n = len(run)
    se = float(contrib.std(ddof=1) / math.sqrt(n)) if n > 1 else _NAN
    return float(contrib.mean()), se


def _empirical_ce_bits(truth: np.ndarray, cls: np.ndarray) -> tuple[float, float]:
    """Plug-in H(truth | class) in bits from the empirical 2x2 joint.

    Equals the mean over intervals of -log2 p_hat(t_i | c_i), so the SE is
    the standard error of those per-interval values.
    """
    n = truth.size
    vals = np.empty(n)
    for c in (False, True):
        cmask = cls == c
        nc = int(cmask.sum())
        if nc == 0:
            continue
        for t in (False, True):
            mask = cmask & (truth == t)
            nt = int(mask.sum())
            if nt:
                vals[mask] = -math.log2(nt / nc)
    ce = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else _NAN
    return ce, se


def run_cell(model: IntervalModel, knowledge: KnowledgeModel | None = None,
             budget: float = 1.0, detector_mode: str = "idealized",
             alpha: float = 0.05, n_intervals: int = 100_000, seed=0,
             strategy: Strategy | None = None,
             cost_denominator: str = "base-plus-anomaly") -> MetricsReport:
    """Simulate one cell end to end under a solved (or given) strategy.

    The chi-square detector's class-conditional flag rates are not analytic,
    so that mode first measures them on an independent calibration run (same
    strategy, derived seed) and hands them to the attacker as its knowledge;
    epsilon in the report stays the analytic deterministic-classifier value
    either way, so the two views sit side by side in one record.

    Degenerate anomaly rates produce a flagged record: with no anomalies
    (or no baselines) the strategy is a no-op and guessing error on
    anomalies can be undefined (nan).
    """
    knowledge = knowledge or KnowledgeModel.complete()
    base = _seed_tuple(seed)
    cm = costs(model, cost_denominator)
    strat = strategy if strategy is not None else solve_strategy(model, knowledge, budget, cm)

    run = gen_run(model, n_intervals, base + (0,))
    obf = apply_strategy(run, strat, knowledge, cm, base + (1,))

    if detector_mode == "idealized":
        cfg = DetectorConfig.idealized(model.anomaly_rate, strat.p_waterfill,
                                       strat.p_fake, knowledge.tpr, knowledge.tnr)
    elif detector_mode == "chi-square":
        cal = gen_run(model, n_intervals, base + (3,))
        cal_obf = apply_strategy(cal, strat, knowledge, cm, base + (4,))
        blind = DetectorConfig.chi_square(model.anomaly_rate, alpha)
        cal_flags = test_run(cal_obf, blind).flagged
        fa = float(cal_flags[cal.is_anomaly].mean()) if cal.is_anomaly.any() else _NAN
        fb = float(cal_flags[~cal.is_anomaly].mean()) if (~cal.is_anomaly).any() else _NAN
        cfg = DetectorConfig.chi_square(model.anomaly_rate, alpha, fa, fb)
    else:
        raise ValueError(f"unknown detector mode {detector_mode!r}")

    verdicts = test_run(obf, cfg)

    if np.any(np.isnan(verdicts.posterior_anomaly)):
        guess_err = guess_se = _NAN
    else:
        guesses = guess_run(verdicts.posterior_anomaly, base + (2,))
        try:
            guess_err = guessing_error(guesses, obf.is_anomaly)
            guess_se = guessing_error_se(guess_err, int(obf.is_anomaly.sum()))
        except DegenerateMetricError:
            guess_err = guess_se = _NAN

    ce, ce_se = _empirical_ce_bits(obf.is_anomaly, verdicts.flagged)
    rcost, rcost_se = realized_cost(obf, cm)

    return MetricsReport(
        r_p=model.anomaly_rate, intensity=model.intensity, slots=model.slots,
        base_rate=model.base_rate, tpr=knowledge.tpr, tnr=knowledge.tnr,
        budget=budget, p_waterfill=strat.p_waterfill, p_fake=strat.p_fake,
        epsilon=strat.epsilon, cost=strat.cost,
        feasible_optimal=strat.feasible_optimal,
        guess_err=guess_err, guess_err_se=guess_se,
        ce_bits=ce, ce_bits_se=ce_se,
        ideal_guess_err=1.0 - model.anomaly_rate,
        ideal_ce_bits=binary_entropy_bits(model.anomaly_rate),
        degenerate=strat.degenerate,
        realized_cost=rcost, realized_cost_se=rcost_se)


@dataclass(frozen=True)
class SweepSpec:
    """Grid description for :func:`run_sweep`."""

    anomaly_rates: tuple[float, ...]
    intensities: tuple[float, ...]
    slots: int = 10
    base_rate: float = 1.0
    knowledge: KnowledgeModel = field(default_factory=KnowledgeModel.complete)
    budget: float = 1.0
    detector_mode: str = "idealized"
    alpha: float = 0.05
    n_intervals: int = 100_000
    seed: int = 0
    cost_denominator: str = "base-plus-anomaly"

    def __post_init__(self):
        object.__setattr__(self, "anomaly_rates", tuple(float(r) for r in self.anomaly_rates))
        object.__setattr__(self, "intensities", tuple(float(i) for i in self.intensities))
        if not self.anomaly_rates or not self.intensities:
            raise ValueError("sweep grids must be non-empty")
        if self.n_intervals < 1000:
            raise ValueError("sweeps need at least 1000 intervals per cell")


def run_sweep(spec: SweepSpec) -> list[MetricsReport]:
    """Run every (intensity, anomaly rate) cell; never aborts mid-sweep.

    Rows are ordered intensity-major, anomaly rate minor. Each cell gets the
    derived seed (spec.seed, rate index, intensity index), so any single
    cell can be re-run in isolation. A cell that raises is recorded with nan
    metrics and the exception text in ``error``.
    """
    records = []
    for j, intensity in enumerate(spec.intensities):
        for i, rp in enumerate(spec.anomaly_rates):
            cell_seed = (spec.seed, i, j)
            try:
                model = IntervalModel(spec.slots, spec.base_rate, intensity, rp)
                rec = run_cell(model, spec.knowledge, spec.budget,
                               spec.detector_mode, spec.alpha, spec.n_intervals,
                               cell_seed, cost_denominator=spec.cost_denominator)
            except Exception as exc:
                rec = MetricsReport(
                    r_p=float(rp), intensity=float(intensity), slots=spec.slots,
                    base_rate=spec.base_rate, tpr=spec.knowledge.tpr,
                    tnr=spec.knowledge.tnr, budget=spec.budget,
                    error=f"{type(exc).__name__}: {exc}")
            records.append(rec)
    return records


def feasible_region(records: Sequence[MetricsReport]) -> dict[float, list[float]]:
    """Anomaly rates with a feasible-optimal strategy, keyed by intensity."""
    region: dict[float, list[float]] = {}
    for rec in records:
        region.setdefault(rec.intensity, [])
        if rec.feasible_optimal and not rec.error:
            region[rec.intensity].append(rec.r_p)
    return {i: sorted(rs) for i, rs in region.items()}


def _open_text(file, mode="w"):
    if hasattr(file, "write") or hasattr(file, "read"):
        return file, False
    return open(file, mode), True


def _fmt(v) -> str:
    # repr of the builtin float is byte-stable and round-trips exactly
    return repr(float(v))


def _write_comment(fh, comment) -> None:
    if comment:
        for line in str(comment).splitlines():
            fh.write(f"# {line}\n")


def sweep_to_csv(records: Sequence[MetricsReport], file, comment=None) -> None:
    """Write sweep records in the pinned column order (see SWEEP_CSV_HEADER)."""
    fh, close = _open_text(file)
    try:
        _write_comment(fh, comment)
        fh.write(SWEEP_CSV_HEADER + "\n")
        for r in records:
            row = [_fmt(r.r_p), _fmt(r.intensity), str(int(r.slots)), _fmt(r.base_rate),
                   _fmt(r.tpr), _fmt(r.tnr), _fmt(r.budget), _fmt(r.p_waterfill),
                   _fmt(r.p_fake), _fmt(r.epsilon), _fmt(r.cost),
                   str(int(r.feasible_optimal)), _fmt(r.guess_err), _fmt(r.guess_err_se),
                   _fmt(r.ce_bits), _fmt(r.ce_bits_se), _fmt(r.ideal_guess_err),
                   _fmt(r.ideal_ce_bits)]
            fh.write(",".join(row) + "\n")
    finally:
        if close:
            fh.close()


@dataclass(frozen=True)
class CostPoint:
    """Analytic relative cost of shifting expected dispersion by factor k."""

    shift: float
    fake_cost: float
    waterfill_cost: float
    base_rate: float
    intensity: float
    wf_feasible: bool


def cost_curves(models: Sequence[IntervalModel], shifts: Sequence[float],
                denominator: str = "base-plus-anomaly") -> list[CostPoint]:
    """Evaluate both mechanisms' analytic costs over a shift grid.

    Fake anomalies can reach any k >= 1; waterfilling saturates at full
    suppression, beyond which the point is marked infeasible (nan cost)
    rather than dropped.
    """
    for k in shifts:
        if k < 1.0:
            raise ValueError(f"shift grid must be >= 1, got {k}")
    points = []
    for model in models:
        cm = costs(model, denominator)
        for k in shifts:
            fake = solve_fake_rate(model, float(k)) / cm.fake_normalizer()
            try:
                wf_rate = solve_waterfill_rate(model, float(k))
                wf = wf_rate * (model.slots - 1) / cm.waterfill_normalizer()
                ok = True
            except InfeasibleTargetError:
                wf, ok = _NAN, False
            points.append(CostPoint(float(k), fake, wf, model.base_rate,
                                    model.intensity, ok))
    return points


def cost_curves_to_csv(points: Sequence[CostPoint], file, comment=None) -> None:
    fh, close = _open_text(file)
    try:
        _write_comment(fh, comment)
        fh.write(COST_CSV_HEADER + "\n")
        for p in points:
            fh.write(",".join([_fmt(p.shift), _fmt(p.fake_cost), _fmt(p.waterfill_cost),
                               _fmt(p.base_rate), _fmt(p.intensity),
                               str(int(p.wf_feasible))]) + "\n")
    finally:
        if close:
            fh.close()
