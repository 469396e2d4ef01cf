"""Dispersion-statistic attacker for slotted message counts.

The attacker sees per-slot message counts (real plus dummy, already summed)
and decides per interval whether the traffic looks anomalous. Homogeneous
Poisson slots have index of dispersion 1; a boosted slot inflates it. Two
detector modes exist:

* ``chi-square``: flag an interval when (slots-1) * dispersion exceeds the
  chi-square quantile at 1 - alpha, the classical Poisson dispersion test.
* ``idealized``: the deterministic classifier the strategy algebra assumes;
  the observable class bit is supplied by the simulation harness, never
  derived from counts. Useful wherever the closed-form class probabilities
  are the object of study.

Verdicts carry a posterior anomaly probability computed from the prior
anomaly rate and the class-conditional flag rates the attacker is assumed
to know.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .traffic import OBF_FAKE, OBF_WATERFILL, IntervalObservation, Run, as_rng

__all__ = [
    "DegenerateMetricError",
    "DispersionStat",
    "dispersion",
    "run_dispersion",
    "ensemble_dispersion",
    "chi_square_threshold",
    "DetectorConfig",
    "class_posteriors",
    "Verdict",
    "test_interval",
    "observable_class",
    "run_observable_class",
    "RunVerdicts",
    "test_run",
    "guess_run",
    "guessing_error",
    "guessing_error_se",
    "h1_dispersion_quantiles",
    "h1_flag_rate",
    "save_h1_cache",
    "load_h1_cache",
    "H1_CACHE_HEADER",
    "bin_timestamps",
]

H1_CACHE_HEADER = "S,lambda,intensity,quantile_p,value"


class DegenerateMetricError(ValueError):
    """A metric is undefined on this input (e.g. no anomalous intervals)."""


@dataclass(frozen=True)
class DispersionStat:
    """Sample mean/variance of one interval's slot counts and their ratio."""

    mean: float
    variance: float
    dispersion: float  # variance / mean; nan when degenerate
    degenerate: bool   # all slots zero: the ratio is undefined


def dispersion(counts) -> DispersionStat:
    """Index of dispersion of one interval (Bessel-corrected variance)."""
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("counts must be a 1-D sequence of at least 2 slots")
    mu = float(c.mean())
    s2 = float(c.var(ddof=1))
    if mu == 0.0:
        return DispersionStat(mu, s2, float("nan"), True)
    return DispersionStat(mu, s2, s2 / mu, False)


def run_dispersion(counts_2d) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized per-interval (mean, variance, dispersion) columns.

    Dispersion is nan for degenerate (all-zero) intervals.
    """
    c = np.asarray(counts_2d, dtype=float)
    if c.ndim != 2 or c.shape[1] < 2:
        raise ValueError("counts must be (n, slots>=2)")
    mu = c.mean(axis=1)
    s2 = c.var(axis=1, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(mu > 0, s2 / np.where(mu > 0, mu, 1.0), np.nan)
    return mu, s2, d


def ensemble_dispersion(counts_2d) -> float:
    """Pooled index of dispersion of a batch: mean variance / mean mean.

    The pooled ratio is consistent for the model-level ratio of expected
    variance to expected mean; averaging per-interval ratios instead is
    biased low by roughly (D - 1) / E[interval total] and must not be used
    against analytic dispersion targets.
    """
    mu, s2, _ = run_dispersion(counts_2d)
    m = float(mu.mean())
    if m == 0.0:
        raise DegenerateMetricError("batch has no messages")
    return float(s2.mean()) / m


def chi_square_threshold(slots: int, alpha: float) -> float:
    """Critical value: flag when (slots-1) * dispersion exceeds it."""
    if slots < 2:
        raise ValueError("slots must be >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    return float(chi2.ppf(1.0 - alpha, slots - 1))


@dataclass(frozen=True)
class DetectorConfig:
    """Detector mode plus the knowledge behind posterior computation.

    ``flag_rate_anomaly`` / ``flag_rate_baseline`` are the class-conditional
    probabilities of being flagged, used to turn a verdict into a posterior
    anomaly probability. They may be nan when unknown, in which case
    posteriors are nan as well.
    """

    mode: str  # "chi-square" | "idealized"
    anomaly_rate: float
    alpha: float = 0.05
    flag_rate_anomaly: float = float("nan")
    flag_rate_baseline: float = float("nan")

    def __post_init__(self):
        if self.mode not in ("chi-square", "idealized"):
            raise ValueError(f"unknown detector mode {self.mode!r}")
        if not 0.0 <= self.anomaly_rate <= 1.0:
            raise ValueError("anomaly_rate must be in [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        for r in (self.flag_rate_anomaly, self.flag_rate_baseline):
            if not np.isnan(r) and not 0.0 <= r <= 1.0:
                raise ValueError("flag rates must be in [0, 1] or nan")

    @classmethod
    def chi_square(cls, anomaly_rate: float, alpha: float = 0.05,
                   flag_rate_anomaly: float = float("nan"),
                   flag_rate_baseline: float = float("nan")) -> "DetectorConfig":
        return cls("chi-square", anomaly_rate, alpha, flag_rate_anomaly, flag_rate_baseline)

    @classmethod
    def idealized(cls, anomaly_rate: float, p_waterfill: float, p_fake: float,
                  tpr: float = 1.0, tnr: float = 1.0) -> "DetectorConfig":
        """Deterministic-classifier config for a known obfuscation strategy.

        An anomalous interval escapes flagging only when its holder predicted
        it (tpr) and waterfilled it (p_waterfill); a baseline interval is
        flagged only when recognized (tnr) and given a fake (p_fake).
        """
        fa = 1.0 - tpr * p_waterfill
        fb = tnr * p_fake
        return cls("idealized", anomaly_rate, flag_rate_anomaly=fa, flag_rate_baseline=fb)


def class_posteriors(cfg: DetectorConfig) -> tuple[float, float]:
    """(P(anomaly | flagged), P(anomaly | not flagged)) under cfg's rates.

    A class of probability zero never occurs; its posterior is reported as
    the prior by convention.
    """
    rp, rn = cfg.anomaly_rate, 1.0 - cfg.anomaly_rate
    fa, fb = cfg.flag_rate_anomaly, cfg.flag_rate_baseline
    if np.isnan(fa) or np.isnan(fb):
        return float("nan"), float("nan")
    num_f = rp * fa
    den_f = rp * fa + rn * fb
    p_flagged = num_f / den_f if den_f > 0 else rp
    num_u = rp * (1.0 - fa)
    den_u = rp * (1.0 - fa) + rn * (1.0 - fb)
    p_unflagged = num_u / den_u if den_u > 0 else rp
    return p_flagged, p_unflagged


@dataclass(frozen=True)
class Verdict:
    flagged: bool
    statistic: float      # (slots-1) * dispersion; nan in idealized mode
    threshold: float      # chi-square critical value; nan in idealized mode
    posterior_anomaly: float


def test_interval(counts, cfg: DetectorConfig, looks_anomalous: bool | None = None) -> Verdict:
    """Classify one interval from its summed slot counts.

    The signature is the attacker boundary: no truth labels, no dummy
    shares. In idealized mode the observable class bit must be supplied by
    the harness (see :func:`observable_class`); chi-square mode ignores it.
    Degenerate (all-zero) intervals are never flagged.
    """
    p_flag, p_unflag = class_posteriors(cfg)
    if cfg.mode == "idealized":
        if looks_anomalous is None:
            raise ValueError("idealized mode needs the observable class bit")
        flagged = bool(looks_anomalous)
        return Verdict(flagged, float("nan"), float("nan"),
                       p_flag if flagged else p_unflag)
    stat_src = dispersion(counts)
    s = len(np.asarray(counts))
    thr = chi_square_threshold(s, cfg.alpha)
    stat = (s - 1) * stat_src.dispersion
    flagged = bool(not stat_src.degenerate and stat > thr)
    return Verdict(flagged, float(stat), thr, p_flag if flagged else p_unflag)


def observable_class(obs: IntervalObservation) -> bool:
    """True when the interval looks anomalous to the deterministic classifier.

    Simulation-side construction: a real anomaly looks anomalous unless it
    was waterfilled; a baseline interval looks anomalous exactly when it
    received a fake anomaly. Detectors never call this; the harness does.
    """
    if obs.is_anomaly:
        return obs.obf_action != OBF_WATERFILL
    return obs.obf_action == OBF_FAKE


def run_observable_class(run: Run) -> np.ndarray:
    """Vectorized :func:`observable_class` over a run."""
    waterfilled = run.action == 1  # ACTIONS index of "waterfilled"
    faked = run.action == 2        # ACTIONS index of "fake-anomaly"
    return np.where(run.is_anomaly, ~waterfilled, faked)


@dataclass(frozen=True)
class RunVerdicts:
    flagged: np.ndarray            # (n,) bool
    statistic: np.ndarray          # (n,) float, nan in idealized mode
    threshold: float               # nan in idealized mode
    posterior_anomaly: np.ndarray  # (n,) float


def test_run(run: Run, cfg: DetectorConfig) -> RunVerdicts:
    """Classify every interval of a run.

    chi-square mode reads only ``run.counts``. Idealized mode derives the
    class bits from the run's ground truth, because that detector is defined
    by construction classes rather than by a statistic.
    """
    n = len(run)
    p_flag, p_unflag = class_posteriors(cfg)
    if cfg.mode == "idealized":
        flagged = run_observable_class(run)
        stats = np.full(n, np.nan)
        thr = float("nan")
    else:
        _, _, d = run_dispersion(run.counts)
        thr = chi_square_threshold(run.slots, cfg.alpha)
        stats = (run.slots - 1) * d
        flagged = np.where(np.isnan(stats), False, stats > thr)
    post = np.where(flagged, p_flag, p_unflag)
    return RunVerdicts(flagged.astype(bool), stats, thr, post)


def guess_run(posterior_anomaly, seed, rule: str = "posterior-match") -> np.ndarray:
    """Turn per-interval posteriors into anomaly guesses.

    ``posterior-match`` guesses anomalous with the posterior probability
    (randomized, deterministic given seed); ``map`` guesses anomalous when
    the posterior exceeds 1/2.
    """
    p = np.asarray(posterior_anomaly, dtype=float)
    if np.any(np.isnan(p)):
        raise ValueError("posteriors contain nan; configure detector flag rates")
    if rule == "posterior-match":
        rng = as_rng(seed)
        return rng.random(p.shape) < p
    if rule == "map":
        return p > 0.5
    raise ValueError(f"unknown guess rule {rule!r}")


def guessing_error(guesses, truths) -> float:
    """Fraction of truly anomalous intervals the attacker failed to guess."""
    g = np.asarray(guesses, dtype=bool)
    t = np.asarray(truths, dtype=bool)
    if g.shape != t.shape:
        raise ValueError("guesses and truths must align")
    n_anom = int(t.sum())
    if n_anom == 0:
        raise DegenerateMetricError("guessing error undefined: no anomalous intervals")
    return float((~g[t]).sum() / n_anom)


def guessing_error_se(err: float, n_anomalies: int) -> float:
    """Binomial standard error of a guessing-error estimate."""
    if n_anomalies <= 0:
        raise DegenerateMetricError("no anomalous intervals")
    return float(np.sqrt(max(err * (1.0 - err), 0.0) / n_anomalies))


# -- empirical H1 dispersion distribution ------------------------------------

_H1_PS = np.round(np.arange(1, 1000) / 1000.0, 3)  # 0.001 .. 0.999


def h1_dispersion_quantiles(slots: int, base_rate: float, intensity: float,
                            n_intervals: int = 100_000, seed=0
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo quantiles of the statistic over anomalous intervals.

    Returns (quantile_p, value) arrays for (slots-1) * dispersion of
    unobfuscated anomalous intervals. The boosted slot's position does not
    affect the statistic, so it is fixed for speed.
    """
    rng = as_rng(seed)
    c = rng.poisson(base_rate, (n_intervals, slots)).astype(float)
    c[:, 0] = rng.poisson(intensity * base_rate, n_intervals)
    _, _, d = run_dispersion(c)
    stat = (slots - 1) * d[~np.isnan(d)]
    return _H1_PS.copy(), np.quantile(stat, _H1_PS)


def h1_flag_rate(quantile_p: np.ndarray, values: np.ndarray, threshold: float) -> float:
    """P(statistic > threshold) from a quantile grid, by interpolation."""
    q = np.asarray(quantile_p, dtype=float)
    v = np.asarray(values, dtype=float)
    if q.shape != v.shape or q.ndim != 1 or q.size < 2:
        raise ValueError("quantile grid malformed")
    cdf = float(np.interp(threshold, v, q, left=0.0, right=1.0))
    return 1.0 - cdf


def save_h1_cache(path, entries: dict, comment: str | None = None) -> None:
    """Write {(slots, base_rate, intensity): (ps, values)} to CSV."""
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write("# " + comment.strip() + "\n")
        fh.write(H1_CACHE_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for (s, lam, inten) in sorted(entries):
            ps, vals = entries[(s, lam, inten)]
            for p, v in zip(ps, vals):
                w.writerow([int(s), repr(float(lam)), repr(float(inten)),
                            repr(float(p)), repr(float(v))])


def load_h1_cache(path) -> dict:
    """Read a cache written by :func:`save_h1_cache`."""
    out: dict = {}
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or ",".join(rows[0]) != H1_CACHE_HEADER:
        raise ValueError("not an H1 cache CSV: bad or missing header")
    for r in rows[1:]:
        key = (int(r[0]), float(r[1]), float(r[2]))
        out.setdefault(key, ([], []))
        out[key][0].append(float(r[3]))
        out[key][1].append(float(r[4]))
    return {k: (np.asarray(p), np.asarray(v)) for k, (p, v) in out.items()}


def bin_timestamps(timestamps, slot_width: float, slots: int,
                   origin: float | None = None) -> np.ndarray:
    """Bin sorted timestamps into (intervals, slots) counts.

    ``origin`` anchors the slot grid; None anchors at the first message's
    slot start (sensible for epoch-scale external traces). The trailing
    partial interval is dropped: the dispersion test needs full intervals.
    """
    ts = np.asarray(timestamps, dtype=float)
    if ts.size == 0:
        raise ValueError("no timestamps to bin")
    if np.any(np.diff(ts) < 0):
        raise ValueError("timestamps must be sorted")
    if not slot_width > 0 or slots < 2:
        raise ValueError("need slot_width > 0 and slots >= 2")
    if origin is None:
        origin = np.floor(ts[0] / slot_width) * slot_width
    idx = np.floor((ts - origin) / slot_width).astype(np.int64)
    if np.any(idx < 0):
        raise ValueError("timestamps precede the binning origin")
    n_full = int(idx.max() + 1) // slots
    if n_full == 0:
        raise ValueError(f"fewer than one full interval of {slots} slots")
    keep = idx < n_full * slots
    counts = np.bincount(idx[keep], minlength=n_full * slots)
    return counts.reshape(n_full, slots)
