"""Discrete-time trace model: priors, additive mechanisms, posterior, metrics.

A message trace is a strictly increasing tuple of timestamps inside an
observation window. Time is discretized to a tick so priors have finite
support and every quantity here is exactly enumerable at small scale.
An obfuscation mechanism maps a real trace R to an observed trace X by
adding dummy messages (always X >= R as sets; nothing is ever removed), and
the attacker inverts it through Bayes:

    p(R | X) = prior(R) * q(X | R) / sum over R' subset of X of prior(R') * q(X | R')

Two leakage metrics are computed from that posterior, by exhaustive
enumeration when the instance is small and by seeded Monte-Carlo otherwise:
average error of an optimal guessing attacker under a distance function,
and conditional entropy of the real trace given the observation (bits).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .attacker import chi_square_threshold, dispersion
from .traffic import as_rng

__all__ = [
    "Event",
    "EventSet",
    "MessageTrace",
    "TracePrior",
    "Mechanism",
    "IdentityMechanism",
    "FillToMechanism",
    "TableMechanism",
    "CardinalityDistance",
    "AnomalyCountDistance",
    "distance",
    "InconsistentObservationError",
    "posterior",
    "posterior_table",
    "enumerate_observables",
    "optimal_guess",
    "average_error",
    "average_error_mc",
    "conditional_entropy",
    "conditional_entropy_mc",
    "Fixture",
    "load_fixture",
]

TRACE_KINDS = ("real", "dummy", "observed")

# subset enumeration guard: 2^20 candidate sets
_MAX_OBSERVED_FOR_SUBSETS = 20
# auto method switches to Monte-Carlo above this many observed messages
_MAX_EXACT_MESSAGES = 12


class InconsistentObservationError(ValueError):
    """No real trace with positive prior mass can produce the observation."""


@dataclass(frozen=True)
class Event:
    """A real-world event occupying [t0, t1]."""

    t0: float
    t1: float

    def __post_init__(self):
        if self.t1 < self.t0:
            raise ValueError(f"event end {self.t1} precedes start {self.t0}")


@dataclass(frozen=True)
class EventSet:
    """Events inside one observation window, ordered by start time."""

    window: tuple[float, float]
    events: tuple[Event, ...]

    def __post_init__(self):
        ta, tb = self.window
        if tb < ta:
            raise ValueError("window end precedes start")
        object.__setattr__(self, "events", tuple(self.events))
        prev = None
        for e in self.events:
            if e.t0 < ta or e.t1 > tb:
                raise ValueError(f"event {e} outside window [{ta}, {tb}]")
            if prev is not None and e.t0 <= prev:
                raise ValueError("events must have strictly increasing start times")
            prev = e.t0

    def to_trace(self) -> "MessageTrace":
        """Real trace carrying one message per event, at the event's start."""
        return MessageTrace(self.window, tuple(e.t0 for e in self.events), "real")


@dataclass(frozen=True)
class MessageTrace:
    """Timestamps of one device's messages inside a window."""

    window: tuple[float, float]
    timestamps: tuple[float, ...]
    kind: str = "real"

    def __post_init__(self):
        ta, tb = self.window
        if tb < ta:
            raise ValueError("window end precedes start")
        if self.kind not in TRACE_KINDS:
            raise ValueError(f"kind must be one of {TRACE_KINDS}, got {self.kind!r}")
        ts = tuple(float(t) for t in self.timestamps)
        object.__setattr__(self, "timestamps", ts)
        prev = None
        for t in ts:
            if not ta <= t <= tb:
                raise ValueError(f"timestamp {t} outside window [{ta}, {tb}]")
            if prev is not None and t <= prev:
                raise ValueError("timestamps must be strictly increasing")
            prev = t

    def __len__(self) -> int:
        return len(self.timestamps)

    def merge(self, dummy: "MessageTrace") -> "MessageTrace":
        """Observed trace: sorted union of this (real) trace and a dummy trace."""
        joined = tuple(sorted(set(self.timestamps) | set(dummy.timestamps)))
        return MessageTrace(self.window, joined, "observed")


def _ts(trace) -> tuple[float, ...]:
    # canonical timestamp-tuple form; accepts MessageTrace or any iterable
    if isinstance(trace, MessageTrace):
        return trace.timestamps
    ts = tuple(sorted(float(t) for t in trace))
    if len(set(ts)) != len(ts):
        raise ValueError("duplicate timestamps in trace")
    return ts


def _is_subset(small: tuple, big: tuple) -> bool:
    return set(small) <= set(big)


class TracePrior:
    """Finite-support prior over real traces.

    support: mapping from trace (timestamp iterable or MessageTrace) to
    probability. Probabilities must be non-negative and sum to 1 within
    1e-9; zero-mass entries are dropped. Timestamps must sit on the tick
    grid relative to the window start.
    """

    def __init__(self, support: Mapping, window: tuple[float, float], tick: float = 1.0):
        ta, tb = float(window[0]), float(window[1])
        if tb < ta:
            raise ValueError("window end precedes start")
        if tick <= 0:
            raise ValueError("tick must be positive")
        self.window = (ta, tb)
        self.tick = float(tick)
        table: dict[tuple[float, ...], float] = {}
        for trace, p in support.items():
            p = float(p)
            if p < 0:
                raise ValueError(f"negative prior mass {p}")
            if p == 0.0:
                continue
            ts = _ts(trace)
            for t in ts:
                if not ta <= t <= tb:
                    raise ValueError(f"timestamp {t} outside window [{ta}, {tb}]")
                steps = (t - ta) / self.tick
                if abs(steps - round(steps)) > 1e-9:
                    raise ValueError(f"timestamp {t} is off the {self.tick}s tick grid")
            if ts in table:
                raise ValueError(f"duplicate support trace {ts}")
            table[ts] = p
        total = math.fsum(table.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"prior masses sum to {total}, expected 1")
        self._traces = tuple(sorted(table))
        self._probs = np.array([table[t] for t in self._traces])
        self._table = table

    @property
    def support(self) -> tuple[tuple[float, ...], ...]:
        """Support traces in lexicographic order."""
        return self._traces

    def mass(self, trace) -> float:
        return self._table.get(_ts(trace), 0.0)

    def entropy_bits(self) -> float:
        p = self._probs
        return float(-np.sum(p * np.log2(p)))

    def sample(self, rng) -> tuple[float, ...]:
        rng = as_rng(rng)
        return self._traces[int(rng.choice(len(self._traces), p=self._probs))]


class Mechanism:
    """Additive obfuscation channel q(X | R).

    Subclasses implement ``mass`` and, when the output set is finite,
    ``outputs`` (which also powers sampling and exact enumeration). Every
    output must contain the conditioning real trace as a subset.
    """

    def mass(self, observed, real) -> float:
        raise NotImplementedError

    def outputs(self, real) -> list[tuple[tuple[float, ...], float]]:
        """[(observed, q)] pairs with positive q, masses summing to 1."""
        raise NotImplementedError

    def sample(self, real, rng) -> tuple[float, ...]:
        outs = self.outputs(real)
        if len(outs) == 1:
            return outs[0][0]
        rng = as_rng(rng)
        probs = np.array([q for _, q in outs])
        return outs[int(rng.choice(len(outs), p=probs))][0]


class IdentityMechanism(Mechanism):
    """No dummies: X = R with certainty."""

    def mass(self, observed, real) -> float:
        return 1.0 if _ts(observed) == _ts(real) else 0.0

    def outputs(self, real):
        return [(_ts(real), 1.0)]


class FillToMechanism(Mechanism):
    """Deterministically pad every real trace up to a fixed target set.

    The output is the union of the real trace and the target, so the
    superset invariant holds even for reals outside the target.
    """

    def __init__(self, target: Iterable[float]):
        self.target = _ts(target)

    def mass(self, observed, real) -> float:
        want = tuple(sorted(set(self.target) | set(_ts(real))))
        return 1.0 if _ts(observed) == want else 0.0

    def outputs(self, real):
        return [(tuple(sorted(set(self.target) | set(_ts(real)))), 1.0)]


class TableMechanism(Mechanism):
    """Explicit q(X | R) table.

    rows: mapping real trace -> mapping observed trace -> probability.
    Each row must sum to 1 within 1e-9 and every observed trace must
    contain its real trace.
    """

    def __init__(self, rows: Mapping):
        table: dict[tuple, dict[tuple, float]] = {}
        for real, outs in rows.items():
            r = _ts(real)
            row: dict[tuple, float] = {}
            for obs, q in outs.items():
                q = float(q)
                if q < 0:
                    raise ValueError(f"negative mechanism mass {q}")
                if q == 0.0:
                    continue
                x = _ts(obs)
                if not _is_subset(r, x):
                    raise ValueError(f"mechanism output {x} does not contain real trace {r}")
                row[x] = row.get(x, 0.0) + q
            total = math.fsum(row.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"mechanism row for {r} sums to {total}, expected 1")
            table[r] = row
        self._rows = table

    def mass(self, observed, real) -> float:
        r = _ts(real)
        if r not in self._rows:
            raise ValueError(f"mechanism has no row for real trace {r}")
        return self._rows[r].get(_ts(observed), 0.0)

    def outputs(self, real):
        r = _ts(real)
        if r not in self._rows:
            raise ValueError(f"mechanism has no row for real trace {r}")
        return sorted(self._rows[r].items())


class CardinalityDistance:
    """d(R, R') = absolute difference in message counts."""

    def __call__(self, a, b) -> float:
        return float(abs(len(_ts(a)) - len(_ts(b))))


class AnomalyCountDistance:
    """d(R, R') = absolute difference in the number of flagged intervals.

    Each trace is binned into slots of ``slot_width`` seconds anchored at
    the window start, grouped into intervals of ``slots`` slots, and each
    complete interval is flagged by the dispersion test at level alpha.
    Empty intervals are never flagged.
    """

    def __init__(self, window: tuple[float, float], slot_width: float, slots: int,
                 alpha: float = 0.05):
        if slot_width <= 0:
            raise ValueError("slot_width must be positive")
        ta, tb = float(window[0]), float(window[1])
        span = slots * slot_width
        n_intervals = int(math.floor(round((tb - ta) / span, 9)))
        if n_intervals < 1:
            raise ValueError("window shorter than one interval")
        self.window = (ta, tb)
        self.slot_width = float(slot_width)
        self.slots = int(slots)
        self.n_intervals = n_intervals
        self.threshold = chi_square_threshold(slots, alpha)
        self._cache: dict[tuple, int] = {}

    def _flag_count(self, ts: tuple[float, ...]) -> int:
        if ts in self._cache:
            return self._cache[ts]
        total_slots = self.n_intervals * self.slots
        counts = np.zeros(total_slots, dtype=np.int64)
        for t in ts:
            idx = int((t - self.window[0]) // self.slot_width)
            if 0 <= idx < total_slots:  # messages past the last full interval are ignored
                counts[idx] += 1
        flags = 0
        for i in range(self.n_intervals):
            stat = dispersion(counts[i * self.slots:(i + 1) * self.slots])
            if not stat.degenerate and (self.slots - 1) * stat.dispersion > self.threshold:
                flags += 1
        self._cache[ts] = flags
        return flags

    def __call__(self, a, b) -> float:
        return float(abs(self._flag_count(_ts(a)) - self._flag_count(_ts(b))))


def distance(mode: str, **kwargs):
    """Distance factory by mode name."""
    if mode == "cardinality-difference":
        return CardinalityDistance()
    if mode == "anomaly-count-difference":
        return AnomalyCountDistance(**kwargs)
    raise ValueError(f"unknown distance mode {mode!r}")


def _subsets_lex(ts: tuple[float, ...]) -> list[tuple[float, ...]]:
    """All subsets of a timestamp tuple, lexicographically sorted."""
    if len(ts) > _MAX_OBSERVED_FOR_SUBSETS:
        raise ValueError(f"observed trace too large to enumerate subsets ({len(ts)} messages)")
    subs = []
    for k in range(len(ts) + 1):
        subs.extend(itertools.combinations(ts, k))
    return sorted(subs)


def _joint_weights(prior: TracePrior, mech: Mechanism, obs: tuple) -> dict[tuple, float]:
    """{R: prior(R) * q(X|R)} over support traces contained in X."""
    out: dict[tuple, float] = {}
    for r in prior.support:
        if not _is_subset(r, obs):
            continue
        w = prior.mass(r) * mech.mass(obs, r)
        if w > 0:
            out[r] = w
    return out


def posterior(prior: TracePrior, mech: Mechanism, observed, candidate) -> float:
    """p(candidate | observed) by Bayes over the prior support.

    Zero for candidates not contained in the observation. Raises
    InconsistentObservationError when nothing in the support can have
    produced the observation.
    """
    obs = _ts(observed)
    cand = _ts(candidate)
    weights = _joint_weights(prior, mech, obs)
    normalizer = math.fsum(weights.values())
    if normalizer <= 0.0:
        raise InconsistentObservationError(
            f"no prior trace can produce observation {obs}")
    if not _is_subset(cand, obs):
        return 0.0
    return weights.get(cand, 0.0) / normalizer


def posterior_table(prior: TracePrior, mech: Mechanism, observed) -> dict[tuple, float]:
    """Full posterior over support traces for one observation."""
    obs = _ts(observed)
    weights = _joint_weights(prior, mech, obs)
    normalizer = math.fsum(weights.values())
    if normalizer <= 0.0:
        raise InconsistentObservationError(
            f"no prior trace can produce observation {obs}")
    return {r: w / normalizer for r, w in weights.items()}


def enumerate_observables(prior: TracePrior, mech: Mechanism) -> dict[tuple, float]:
    """Marginal p(X) over every reachable observation."""
    out: dict[tuple, float] = {}
    for r in prior.support:
        p = prior.mass(r)
        for x, q in mech.outputs(r):
            out[x] = out.get(x, 0.0) + p * q
    return out


def optimal_guess(prior: TracePrior, mech: Mechanism, observed, dist) -> tuple[tuple, float]:
    """Best guess for one observation and its expected distance.

    Minimizes sum over R of prior(R) q(X|R) d(R, R') over all subsets R' of
    the observation; ties go to the lexicographically smallest subset. The
    returned cost is normalized by p(X), i.e. the attacker's conditional
    expected error.
    """
    obs = _ts(observed)
    weights = _joint_weights(prior, mech, obs)
    normalizer = math.fsum(weights.values())
    if normalizer <= 0.0:
        raise InconsistentObservationError(
            f"no prior trace can produce observation {obs}")
    best = None
    best_cost = math.inf
    for cand in _subsets_lex(obs):
        cost = math.fsum(w * dist(r, cand) for r, w in weights.items())
        if cost < best_cost:
            best, best_cost = cand, cost
    return best, best_cost / normalizer


def _exact_joint(prior: TracePrior, mech: Mechanism) -> dict[tuple, dict[tuple, float]]:
    """{X: {R: prior(R) q(X|R)}} over all reachable observations."""
    joint: dict[tuple, dict[tuple, float]] = {}
    for r in prior.support:
        p = prior.mass(r)
        for x, q in mech.outputs(r):
            row = joint.setdefault(x, {})
            row[r] = row.get(r, 0.0) + p * q
    return joint


def _max_observed_size(prior: TracePrior, mech: Mechanism) -> int | None:
    try:
        return max(len(x) for r in prior.support for x, _ in mech.outputs(r))
    except NotImplementedError:
        return None


def average_error(prior: TracePrior, mech: Mechanism, dist,
                  budget: int = 100_000, seed=0, method: str = "auto") -> float:
    """Expected distance achieved by an optimal guessing attacker.

    method "exact" enumerates every reachable observation and every guess;
    "mc" draws ``budget`` (real, observed) pairs and evaluates the exact
    per-observation optimal guess on each; "auto" picks exact when the
    mechanism has finite outputs of at most 12 messages.
    """
    if method == "auto":
        m = _max_observed_size(prior, mech)
        method = "exact" if m is not None and m <= _MAX_EXACT_MESSAGES else "mc"
    if method == "exact":
        joint = _exact_joint(prior, mech)
        total = 0.0
        for x, weights in joint.items():
            best = math.inf
            for cand in _subsets_lex(x):
                cost = math.fsum(w * dist(r, cand) for r, w in weights.items())
                if cost < best:
                    best = cost
            total += best
        return total
    if method == "mc":
        return average_error_mc(prior, mech, dist, budget, seed)[0]
    raise ValueError(f"unknown method {method!r}")


def _sample_pairs(prior: TracePrior, mech: Mechanism, budget: int, rng):
    """Draw (real index, observed trace) pairs, grouped for speed."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    traces = prior.support
    r_idx = rng.choice(len(traces), size=budget, p=prior._probs)
    x_keys: list = [None] * budget
    for i in np.unique(r_idx):
        rows = np.flatnonzero(r_idx == i)
        real = traces[int(i)]
        try:
            outs = mech.outputs(real)
        except NotImplementedError:
            outs = None
        if outs is None:
            for j in rows:
                x_keys[int(j)] = mech.sample(real, rng)
        elif len(outs) == 1:
            for j in rows:
                x_keys[int(j)] = outs[0][0]
        else:
            probs = np.array([q for _, q in outs])
            picks = rng.choice(len(outs), size=rows.size, p=probs)
            for j, k in zip(rows, picks):
                x_keys[int(j)] = outs[int(k)][0]
    return r_idx, x_keys


def average_error_mc(prior: TracePrior, mech: Mechanism, dist,
                     budget: int = 100_000, seed=0) -> tuple[float, float]:
    """Monte-Carlo average error with its standard error."""
    rng = as_rng(seed)
    r_idx, x_keys = _sample_pairs(prior, mech, budget, rng)
    guesses: dict[tuple, tuple] = {}
    err_cache: dict[tuple, float] = {}
    errs = np.empty(budget)
    for n in range(budget):
        x = x_keys[n]
        if x not in guesses:
            guesses[x], _ = optimal_guess(prior, mech, x, dist)
        key = (int(r_idx[n]), x)
        if key not in err_cache:
            err_cache[key] = dist(prior.support[int(r_idx[n])], guesses[x])
        errs[n] = err_cache[key]
    se = float(np.std(errs, ddof=1) / math.sqrt(budget)) if budget > 1 else math.nan
    return float(errs.mean()), se


def conditional_entropy(prior: TracePrior, mech: Mechanism,
                        budget: int = 100_000, seed=0, method: str = "auto") -> float:
    """Entropy (bits) of the real trace given the observation.

    Exact value is sum over X of p(X) H(p(R|X)); the MC estimate averages
    -log2 p(R|X) over sampled pairs, which has the same expectation. "auto"
    goes exact whenever the mechanism can enumerate its outputs.
    """
    if method == "auto":
        method = "exact" if _max_observed_size(prior, mech) is not None else "mc"
    if method == "exact":
        joint = _exact_joint(prior, mech)
        total = 0.0
        for x, weights in joint.items():
            norm = math.fsum(weights.values())
            for w in weights.values():
                if w > 0:
                    total -= w * math.log2(w / norm)
        return total
    if method == "mc":
        return conditional_entropy_mc(prior, mech, budget, seed)[0]
    raise ValueError(f"unknown method {method!r}")


def conditional_entropy_mc(prior: TracePrior, mech: Mechanism,
                           budget: int = 100_000, seed=0) -> tuple[float, float]:
    """Monte-Carlo conditional entropy (bits) with its standard error."""
    rng = as_rng(seed)
    r_idx, x_keys = _sample_pairs(prior, mech, budget, rng)
    tables: dict[tuple, dict] = {}
    vals = np.empty(budget)
    for n in range(budget):
        x = x_keys[n]
        if x not in tables:
            tables[x] = posterior_table(prior, mech, x)
        p = tables[x].get(prior.support[int(r_idx[n])], 0.0)
        if p <= 0.0:
            raise InconsistentObservationError(
                "sampled real trace has zero posterior; mechanism and prior disagree")
        vals[n] = -math.log2(p)
    se = float(np.std(vals, ddof=1) / math.sqrt(budget)) if budget > 1 else math.nan
    return float(vals.mean()), se


@dataclass(frozen=True)
class Fixture:
    """A loaded prior/mechanism test instance."""

    tick: float
    window: tuple[float, float]
    prior: TracePrior
    mechanism: Mechanism
    name: str = ""


def _mechanism_from_spec(spec, prior: TracePrior) -> Mechanism:
    if spec == "identity":
        return IdentityMechanism()
    if spec == "fill-to":
        # default target: union of every timestamp in the prior support
        target = sorted({t for r in prior.support for t in r})
        return FillToMechanism(target)
    if isinstance(spec, dict):
        kind = spec.get("type")
        if kind == "fill-to":
            return FillToMechanism(spec["target"])
        if kind == "table":
            rows = {}
            for row in spec["rows"]:
                outs = {tuple(o["observed"]): o["q"] for o in row["outputs"]}
                rows[tuple(row["real"])] = outs
            return TableMechanism(rows)
        raise ValueError(f"unknown mechanism type {kind!r}")
    raise ValueError(f"unknown mechanism spec {spec!r}")


def load_fixture(source) -> Fixture:
    """Load a prior/mechanism fixture from a JSON file path, file object,
    or already-parsed dict.

    Schema: {"tick": float, "window": [ta, tb],
             "prior": [{"trace": [t, ...], "p": float}, ...],
             "mechanism": "identity" | "fill-to"
                          | {"type": "fill-to", "target": [t, ...]}
                          | {"type": "table", "rows": [{"real": [...],
                             "outputs": [{"observed": [...], "q": p}, ...]}, ...]}}
    """
    if isinstance(source, dict):
        doc = source
        name = str(doc.get("name", ""))
    elif hasattr(source, "read"):
        doc = json.load(source)
        name = str(doc.get("name", ""))
    else:
        with open(source) as fh:
            doc = json.load(fh)
        name = str(doc.get("name", str(source)))
    tick = float(doc.get("tick", 1.0))
    window = (float(doc["window"][0]), float(doc["window"][1]))
    support = {tuple(entry["trace"]): entry["p"] for entry in doc["prior"]}
    prior = TracePrior(support, window, tick)
    mech = _mechanism_from_spec(doc["mechanism"], prior)
    return Fixture(tick, window, prior, mech, name)
