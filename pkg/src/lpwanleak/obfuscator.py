"""Dummy-message obfuscation: rate solving, power costs, strategy selection.

Two mechanisms exist, both purely additive (dummies can be inserted, real
messages never removed):

* waterfilling: raise every non-anomalous slot of an anomalous interval by
  a dummy rate, pulling the interval's expected dispersion down toward 1;
* fake anomaly: add a dummy burst to one slot of a baseline interval,
  pushing its expected dispersion up to look like a real anomaly.

Rates are solved in closed form against expected-dispersion targets, costs
are expressed relative to real traffic, and a (p_waterfill, p_fake)
strategy is chosen under a power budget. The strategy quality measure is
epsilon, the signed relative bias between the attacker's two
class-conditional posteriors; epsilon = 0 means the observable class
carries no information beyond the prior anomaly rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .traffic import IntervalModel, Run, as_rng

__all__ = [
    "InfeasibleTargetError",
    "anomaly_dispersion",
    "expected_dispersion_fake",
    "expected_dispersion_waterfill",
    "solve_fake_rate",
    "solve_waterfill_rate",
    "CostModel",
    "costs",
    "DENOMINATOR_MODES",
    "KnowledgeModel",
    "Strategy",
    "posterior_ratios",
    "epsilon_of",
    "power_cost",
    "power_ok",
    "solve_strategy",
    "apply_strategy",
    "strategy_json",
]

DENOMINATOR_MODES = ("base-plus-anomaly", "interval-expected")


class InfeasibleTargetError(ValueError):
    """The requested dispersion shift cannot be reached by adding traffic."""


def expected_dispersion_fake(model: IntervalModel, fake_rate: float) -> float:
    """Expected dispersion of a baseline interval with one boosted slot.

    Slot rates are (lam, ..., lam, lam + fake_rate). Expected Bessel
    variance of independent Poisson slots with rates m_i is
    mean(m) + (mean(m^2) - mean(m)^2) * S/(S-1); dividing by the expected
    mean gives the dispersion target the solver inverts.
    """
    s, lam = model.slots, model.base_rate
    mu = lam + fake_rate / s
    m2 = ((s - 1) * lam * lam + (lam + fake_rate) ** 2) / s
    var = (m2 - mu * mu) * s / (s - 1) + mu
    return var / mu


def expected_dispersion_waterfill(model: IntervalModel, waterfill_rate: float) -> float:
    """Expected dispersion of an anomalous interval with filled side slots.

    Slot rates are (lam + w, ..., lam + w, lam * intensity); same moment
    algebra as :func:`expected_dispersion_fake`.
    """
    s, lam = model.slots, model.base_rate
    a = lam + waterfill_rate
    b = model.anomaly_slot_rate
    mu = ((s - 1) * a + b) / s
    m2 = ((s - 1) * a * a + b * b) / s
    var = (m2 - mu * mu) * s / (s - 1) + mu
    return var / mu


def anomaly_dispersion(model: IntervalModel) -> float:
    """Expected dispersion of an unobfuscated anomalous interval."""
    return expected_dispersion_waterfill(model, 0.0)


def solve_fake_rate(model: IntervalModel, k: float) -> float:
    """Dummy rate for the boosted slot so a baseline interval's expected
    dispersion becomes k (baseline dispersion is 1, so k is the shift).

    The defining equation reduces to t^2 = (k-1)(S*lam + t); the
    non-negative quadratic root is exact.
    """
    if k < 1.0:
        raise InfeasibleTargetError(
            f"fake-anomaly shift k must be >= 1 (adding traffic only raises dispersion), got {k}")
    if k == 1.0:
        return 0.0
    s, lam = model.slots, model.base_rate
    c = k - 1.0
    return (c + math.sqrt(c * c + 4.0 * c * s * lam)) / 2.0


def solve_waterfill_rate(model: IntervalModel, k: float) -> float:
    """Per-slot dummy rate pulling an anomalous interval's expected
    dispersion down by the factor k (target D' = anomaly dispersion / k).

    k = anomaly dispersion means full suppression (D' = 1, all slot rates
    equal). Larger k would need D' < 1, unreachable by adding traffic.
    With a = lam + w and b the anomalous slot rate, the defining equation
    is (a - b)^2 = (D' - 1) * ((S-1) a + b); the smaller root keeps
    a between lam and b, i.e. the minimal non-negative rate.
    """
    if k < 1.0:
        raise InfeasibleTargetError(f"waterfill shift k must be >= 1, got {k}")
    d0 = anomaly_dispersion(model)
    target = d0 / k
    if target < 1.0:
        raise InfeasibleTargetError(
            f"shift k={k} exceeds full suppression (max {d0}) for this model")
    if k == 1.0:
        return 0.0
    s, lam = model.slots, model.base_rate
    b = model.anomaly_slot_rate
    c = target - 1.0
    if c == 0.0:
        # full suppression: all slots at the anomalous rate, exactly
        return b - lam
    disc = 4.0 * b * c * s + c * c * (s - 1) ** 2
    a = (2.0 * b + c * (s - 1) - math.sqrt(disc)) / 2.0
    w = a - lam
    if w < 0.0:
        # roundoff at the k -> 1 end; the exact root is never negative here
        if w > -1e-9 * max(1.0, b):
            return 0.0
        raise ArithmeticError(f"waterfill solve produced negative rate {w}")
    return w


@dataclass(frozen=True)
class CostModel:
    """Solved full-target rates and their relative power costs.

    fake_rate fakes a full anomaly (expected dispersion equal to a real
    anomaly's), waterfill_rate fully suppresses one (expected dispersion 1).
    fake_cost = fake_rate / (lam * S). waterfill_cost divides the total fill
    (S-1 slots) by a normalizer chosen by ``denominator``:

    * "base-plus-anomaly" (default): lam * S + anomaly slot rate — counts
      the full baseline interval load plus the boosted slot, double
      counting the boosted slot's baseline share;
    * "interval-expected": (S-1) * lam + anomaly slot rate — the exact
      expected message count of an anomalous interval.
    """

    model: IntervalModel
    fake_rate: float
    waterfill_rate: float
    fake_cost: float
    waterfill_cost: float
    denominator: str = "base-plus-anomaly"

    def waterfill_normalizer(self) -> float:
        m = self.model
        if self.denominator == "base-plus-anomaly":
            return m.base_rate * m.slots + m.anomaly_slot_rate
        return (m.slots - 1) * m.base_rate + m.anomaly_slot_rate

    def fake_normalizer(self) -> float:
        return self.model.base_rate * self.model.slots


def costs(model: IntervalModel, denominator: str = "base-plus-anomaly") -> CostModel:
    """Solve both full-target rates and derive per-action relative costs."""
    if denominator not in DENOMINATOR_MODES:
        raise ValueError(f"denominator must be one of {DENOMINATOR_MODES}, got {denominator!r}")
    d0 = anomaly_dispersion(model)
    fake_rate = solve_fake_rate(model, d0)
    waterfill_rate = solve_waterfill_rate(model, d0)
    cm = CostModel(model, fake_rate, waterfill_rate, 0.0, 0.0, denominator)
    fake_cost = fake_rate / cm.fake_normalizer()
    waterfill_cost = waterfill_rate * (model.slots - 1) / cm.waterfill_normalizer()
    return CostModel(model, fake_rate, waterfill_rate, fake_cost, waterfill_cost, denominator)


@dataclass(frozen=True)
class KnowledgeModel:
    """Quality of the obfuscator's per-interval event predictor.

    tpr: probability an anomalous interval is predicted as anomalous.
    tnr: probability a baseline interval is recognized as baseline.
    (1, 1) is complete knowledge.
    """

    tpr: float = 1.0
    tnr: float = 1.0

    def __post_init__(self):
        for name, v in (("tpr", self.tpr), ("tnr", self.tnr)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @classmethod
    def complete(cls) -> "KnowledgeModel":
        return cls(1.0, 1.0)

    @property
    def is_complete(self) -> bool:
        return self.tpr == 1.0 and self.tnr == 1.0


@dataclass(frozen=True)
class Strategy:
    """Obfuscation strategy: action probabilities plus solver bookkeeping.

    p_waterfill applies to intervals predicted anomalous, p_fake to
    intervals predicted baseline. epsilon/cost are the solver's analytic
    values; feasible_optimal marks an epsilon = 0 solution within budget;
    degenerate marks the no-op returned for anomaly rates 0 and 1.
    """

    p_waterfill: float
    p_fake: float
    epsilon: float
    cost: float
    feasible_optimal: bool
    degenerate: bool = False

    def __post_init__(self):
        for name, v in (("p_waterfill", self.p_waterfill), ("p_fake", self.p_fake)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def posterior_ratios(anomaly_rate: float, p_waterfill: float, p_fake: float,
                     tpr: float = 1.0, tnr: float = 1.0) -> tuple[float, float]:
    """(P(anomaly | flagged), P(anomaly | not flagged)) for the
    deterministic classifier, from strategy parameters.

    An anomaly escapes flagging with probability tpr * p_waterfill; a
    baseline is flagged with probability tnr * p_fake. A zero-probability
    class posterior is reported as the prior (it never occurs).
    """
    rp = anomaly_rate
    rn = 1.0 - rp
    x = tpr * p_waterfill   # P(hidden | anomaly)
    y = tnr * p_fake        # P(flagged | baseline)
    den_f = rp * (1.0 - x) + rn * y
    p_flagged = rp * (1.0 - x) / den_f if den_f > 0 else rp
    den_u = rp * x + rn * (1.0 - y)
    p_unflagged = rp * x / den_u if den_u > 0 else rp
    return p_flagged, p_unflagged


def epsilon_of(anomaly_rate: float, p_waterfill: float, p_fake: float,
               tpr: float = 1.0, tnr: float = 1.0) -> float:
    """Signed relative bias between the two class posteriors.

    epsilon = P(anomaly | flagged) / P(anomaly | not flagged) - 1. Zero
    means the class is independent of the truth. When the observable
    partition is degenerate (flagging has probability 0 or 1) the single
    occurring class carries the prior, so epsilon is 0. A zero unflagged
    posterior against a positive flagged one yields +inf.
    """
    rp = anomaly_rate
    rn = 1.0 - rp
    x = tpr * p_waterfill
    y = tnr * p_fake
    p_flag_total = rp * (1.0 - x) + rn * y
    if p_flag_total <= 0.0 or p_flag_total >= 1.0:
        return 0.0
    p_flagged, p_unflagged = posterior_ratios(anomaly_rate, p_waterfill, p_fake, tpr, tnr)
    if p_unflagged == 0.0:
        return math.inf if p_flagged > 0.0 else 0.0
    return p_flagged / p_unflagged - 1.0


def power_cost(p_waterfill: float, p_fake: float, cost_model: CostModel,
               anomaly_rate: float) -> float:
    """Long-run expected relative dummy cost of a strategy."""
    rp = anomaly_rate
    return rp * p_waterfill * cost_model.waterfill_cost \
        + (1.0 - rp) * p_fake * cost_model.fake_cost


def power_ok(strategy: Strategy, cost_model: CostModel, anomaly_rate: float,
             budget: float = 1.0) -> bool:
    """True when the strategy's expected cost is within budget (boundary counts)."""
    return power_cost(strategy.p_waterfill, strategy.p_fake, cost_model, anomaly_rate) <= budget


def _epsilon_grid(rp: float, pw: np.ndarray, pf: np.ndarray,
                  tpr: float, tnr: float) -> np.ndarray:
    """Vectorized :func:`epsilon_of` over broadcast p_waterfill/p_fake grids."""
    rn = 1.0 - rp
    x = tpr * pw
    y = tnr * pf
    fa = 1.0 - x
    p_total = rp * fa + rn * y
    num_f = rp * fa
    den_f = rp * fa + rn * y
    num_u = rp * x
    den_u = rp * x + rn * (1.0 - y)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_flagged = np.where(den_f > 0, num_f / np.where(den_f > 0, den_f, 1.0), rp)
        p_unflagged = np.where(den_u > 0, num_u / np.where(den_u > 0, den_u, 1.0), rp)
        eps = np.where(p_unflagged > 0, p_flagged / np.where(p_unflagged > 0, p_unflagged, 1.0) - 1.0,
                       np.where(p_flagged > 0, np.inf, 0.0))
    return np.where((p_total <= 0.0) | (p_total >= 1.0), 0.0, eps)


def _refine_1d(f, lo: float, hi: float, iters: int = 48) -> tuple[float, float]:
    """Deterministic ternary search for a local minimum of f on [lo, hi]."""
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    x = (lo + hi) / 2.0
    return x, f(x)


def solve_strategy(model: IntervalModel, knowledge: KnowledgeModel | None = None,
                   budget: float = 1.0, cost_model: CostModel | None = None,
                   grid_step: float = 1e-3) -> Strategy:
    """Pick (p_waterfill, p_fake) under the power budget.

    Degenerate anomaly rates (0 or 1) need no obfuscation: the prior already
    tells the attacker everything it will ever learn, so the zero-cost no-op
    is returned with the degenerate flag set.

    Otherwise the epsilon = 0 family is tpr * p_waterfill + tnr * p_fake = 1
    with both probabilities in [0, 1]; cost is linear along it, so only its
    endpoints can be cheapest. If an endpoint fits the budget the cheapest
    one is returned as feasible-optimal. If none fits (or the family is
    empty, tpr + tnr < 1), |epsilon| is minimized over the feasible
    rectangle by a dense grid (step ``grid_step``) with deterministic tie
    breaking (lower cost, then lower p_waterfill, then lower p_fake),
    polished by local coordinate ternary search.
    """
    knowledge = knowledge or KnowledgeModel.complete()
    if budget < 0:
        raise ValueError("budget must be >= 0")
    rp = model.anomaly_rate
    if rp in (0.0, 1.0):
        return Strategy(0.0, 0.0, 0.0, 0.0, True, degenerate=True)
    cm = cost_model or costs(model)
    tpr, tnr = knowledge.tpr, knowledge.tnr

    # epsilon = 0 endpoints: y = tnr * p_fake bounded by the unit square
    y_lo = max(0.0, 1.0 - tpr)
    y_hi = min(tnr, 1.0)
    if y_lo <= y_hi:
        cands = []
        for y in {y_lo, y_hi}:
            p_f = min(1.0, y / tnr) if tnr > 0 else 0.0
            p_wf = min(1.0, (1.0 - y) / tpr) if tpr > 0 else 0.0
            cands.append((p_wf, p_f))
        best = None
        for p_wf, p_f in sorted(set(cands)):
            c = power_cost(p_wf, p_f, cm, rp)
            if c <= budget and (best is None or c < best[0]):
                best = (c, p_wf, p_f)
        if best is not None:
            c, p_wf, p_f = best
            return Strategy(p_wf, p_f, 0.0, c, True)

    # sub-optimal: dense |epsilon| grid over the budget-feasible rectangle
    n = int(round(1.0 / grid_step))
    g = np.linspace(0.0, 1.0, n + 1)
    pw = g[:, None]
    pf = g[None, :]
    cost = rp * pw * cm.waterfill_cost + (1.0 - rp) * pf * cm.fake_cost
    feasible = cost <= budget
    eps = _epsilon_grid(rp, pw, pf, tpr, tnr)
    score = np.where(feasible, np.abs(eps), np.inf)
    flat = score.ravel()
    ties = np.flatnonzero(flat == flat.min())
    tc = cost.ravel()[ties]
    ties = ties[tc == tc.min()]
    ti, tj = np.unravel_index(ties, score.shape)
    order = np.lexsort((tj, ti))
    i, j = int(ti[order[0]]), int(tj[order[0]])
    best_pw, best_pf = float(g[i]), float(g[j])

    def objective(p_wf: float, p_f: float) -> float:
        if power_cost(p_wf, p_f, cm, rp) > budget:
            return math.inf
        return abs(epsilon_of(rp, p_wf, p_f, tpr, tnr))

    best_val = objective(best_pw, best_pf)
    for _ in range(2):  # two coordinate sweeps of local polish
        x, v = _refine_1d(lambda t: objective(t, best_pf),
                          max(0.0, best_pw - grid_step), min(1.0, best_pw + grid_step))
        if v < best_val:
            best_pw, best_val = x, v
        x, v = _refine_1d(lambda t: objective(best_pw, t),
                          max(0.0, best_pf - grid_step), min(1.0, best_pf + grid_step))
        if v < best_val:
            best_pf, best_val = x, v
    return Strategy(best_pw, best_pf, epsilon_of(rp, best_pw, best_pf, tpr, tnr),
                    power_cost(best_pw, best_pf, cm, rp), False)


def apply_strategy(run: Run, strategy: Strategy, knowledge: KnowledgeModel,
                   cost_model: CostModel, seed) -> Run:
    """Obfuscate a run. Returns a new run; only ever adds messages.

    Per interval: the predictor classifies it (correctly with probability
    tpr for anomalies, tnr for baselines). Predicted-anomalous intervals are
    waterfilled with probability p_waterfill: Poisson dummies at the solved
    per-slot rate into every slot except the anomalous one (for a
    mispredicted baseline, a uniformly guessed slot is spared instead).
    Predicted-baseline intervals receive a fake anomaly with probability
    p_fake: one Poisson dummy burst into a uniformly chosen slot. The action
    column of the result reflects this application.
    """
    rng = as_rng(seed)
    n, s = len(run), run.slots
    u_pred = rng.random(n)
    u_act = rng.random(n)
    spare_guess = rng.integers(0, s, n)
    fake_slots = rng.integers(0, s, n)

    correct = u_pred < np.where(run.is_anomaly, knowledge.tpr, knowledge.tnr)
    predicted_anom = np.where(correct, run.is_anomaly, ~run.is_anomaly)
    wf_mask = predicted_anom & (u_act < strategy.p_waterfill)
    fk_mask = ~predicted_anom & (u_act < strategy.p_fake)

    counts = run.counts.copy()
    dummies = run.dummy_counts.copy()
    action = np.zeros(n, dtype=np.int8)

    wf_rows = np.flatnonzero(wf_mask)
    if wf_rows.size:
        spare = np.where(run.is_anomaly[wf_rows], run.anomaly_slot[wf_rows],
                         spare_guess[wf_rows])
        add = rng.poisson(cost_model.waterfill_rate, (wf_rows.size, s))
        add[np.arange(wf_rows.size), spare] = 0
        counts[wf_rows] += add
        dummies[wf_rows] += add
        action[wf_rows] = 1  # waterfilled

    fk_rows = np.flatnonzero(fk_mask)
    if fk_rows.size:
        burst = rng.poisson(cost_model.fake_rate, fk_rows.size)
        counts[fk_rows, fake_slots[fk_rows]] += burst
        dummies[fk_rows, fake_slots[fk_rows]] += burst
        action[fk_rows] = 2  # fake-anomaly

    return Run(counts, dummies, run.is_anomaly, run.anomaly_slot, action)


def strategy_json(strategy: Strategy, model: IntervalModel,
                  knowledge: KnowledgeModel) -> dict:
    """Machine-readable strategy record (stable key set)."""
    return {
        "P_wf": strategy.p_waterfill,
        "P_f": strategy.p_fake,
        "epsilon": strategy.epsilon,
        "cost": strategy.cost,
        "feasible_optimal": strategy.feasible_optimal,
        "degenerate": strategy.degenerate,
        "model": {
            "S": model.slots,
            "lambda": model.base_rate,
            "I": model.intensity,
            "R_p": model.anomaly_rate,
        },
        "knowledge": {
            "P_tp": knowledge.tpr,
            "P_tn": knowledge.tnr,
        },
    }
