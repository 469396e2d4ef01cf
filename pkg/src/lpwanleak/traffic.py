"""Slotted Poisson traffic model for event-driven LPWAN uplinks.

Time is divided into intervals of ``slots`` consecutive slots. Every slot
carries an independent Poisson message count at the baseline rate. An
anomalous interval has exactly one slot (uniformly placed) whose rate is
boosted by the anomaly intensity; anomalies occur independently per
interval with probability ``anomaly_rate``.

A :class:`Run` stores a batch of intervals column-wise (numpy arrays) and
behaves as an immutable sequence of :class:`IntervalObservation`. Counts
always include dummy messages added by an obfuscator; ``dummy_counts``
records the dummy share so that honest accounting stays possible while an
attacker is only ever handed the summed counts.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OBF_NONE",
    "OBF_WATERFILL",
    "OBF_FAKE",
    "ACTIONS",
    "IntervalModel",
    "IntervalObservation",
    "Run",
    "as_rng",
    "gen_interval",
    "gen_run",
    "run_to_csv",
    "run_from_csv",
    "RUN_CSV_HEADER",
    "to_timestamps",
]

# Obfuscation action labels, in wire order (CSV uses the strings, Run stores codes).
OBF_NONE = "none"
OBF_WATERFILL = "waterfilled"
OBF_FAKE = "fake-anomaly"
ACTIONS = (OBF_NONE, OBF_WATERFILL, OBF_FAKE)
_ACTION_CODE = {name: i for i, name in enumerate(ACTIONS)}

RUN_CSV_HEADER = "interval,slot,count,dummy_count,is_anomaly,anomaly_slot,obf_action"


def as_rng(seed) -> np.random.Generator:
    """Normalize ``seed`` to a numpy Generator.

    Accepts a Generator (returned as is), an int, or a sequence of ints
    (derived-seed form, e.g. ``(base_seed, interval_index)``).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class IntervalModel:
    """Single-timescale traffic model.

    slots: slots per interval (at least 2, so a sample variance exists).
    base_rate: expected messages per baseline slot (> 0).
    intensity: anomalous slot rate divided by the baseline rate (>= 1).
    anomaly_rate: per-interval probability of an anomaly, in [0, 1].
    """

    slots: int
    base_rate: float
    intensity: float
    anomaly_rate: float

    def __post_init__(self):
        if self.slots < 2:
            raise ValueError(f"slots must be >= 2, got {self.slots}")
        if not self.base_rate > 0:
            raise ValueError(f"base_rate must be > 0, got {self.base_rate}")
        if self.intensity < 1:
            raise ValueError(f"intensity must be >= 1, got {self.intensity}")
        if not 0.0 <= self.anomaly_rate <= 1.0:
            raise ValueError(f"anomaly_rate must be in [0, 1], got {self.anomaly_rate}")

    @property
    def anomaly_slot_rate(self) -> float:
        """Rate of the boosted slot in an anomalous interval."""
        return self.intensity * self.base_rate


@dataclass(frozen=True)
class IntervalObservation:
    """One interval: slot counts plus ground-truth bookkeeping.

    ``counts`` include any dummies; ``dummy_counts`` is the dummy share per
    slot. ``anomaly_slot`` is None for baseline intervals. The truth fields
    exist for simulation accounting and must never feed a detector.
    """

    counts: tuple[int, ...]
    is_anomaly: bool
    anomaly_slot: int | None = None
    obf_action: str = OBF_NONE
    dummy_counts: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.dummy_counts:
            object.__setattr__(self, "dummy_counts", (0,) * len(self.counts))
        if len(self.dummy_counts) != len(self.counts):
            raise ValueError("dummy_counts length must match counts")
        if any(d > c or d < 0 for d, c in zip(self.dummy_counts, self.counts)):
            raise ValueError("dummy_counts must satisfy 0 <= dummy <= count per slot")
        if self.is_anomaly != (self.anomaly_slot is not None):
            raise ValueError("anomaly_slot must be set exactly for anomalous intervals")
        if self.anomaly_slot is not None and not 0 <= self.anomaly_slot < len(self.counts):
            raise ValueError("anomaly_slot out of range")
        if self.obf_action not in _ACTION_CODE:
            raise ValueError(f"unknown obf_action {self.obf_action!r}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class Run(Sequence):
    """Immutable batch of intervals, stored column-wise.

    counts, dummy_counts: (n, slots) int arrays.
    is_anomaly: (n,) bool. anomaly_slot: (n,) int, -1 for baseline intervals.
    action: (n,) int codes indexing ACTIONS.
    """

    __slots__ = ("counts", "dummy_counts", "is_anomaly", "anomaly_slot", "action")

    def __init__(self, counts, dummy_counts, is_anomaly, anomaly_slot, action):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[1] < 2:
            raise ValueError("counts must be (n, slots>=2)")
        n, s = counts.shape
        dummy_counts = np.asarray(dummy_counts, dtype=np.int64)
        is_anomaly = np.asarray(is_anomaly, dtype=bool)
        anomaly_slot = np.asarray(anomaly_slot, dtype=np.int64)
        action = np.asarray(action, dtype=np.int8)
        if dummy_counts.shape != (n, s) or is_anomaly.shape != (n,) \
                or anomaly_slot.shape != (n,) or action.shape != (n,):
            raise ValueError("column shapes inconsistent")
        if np.any(dummy_counts < 0) or np.any(dummy_counts > counts):
            raise ValueError("dummy_counts must satisfy 0 <= dummy <= count")
        if np.any(is_anomaly != (anomaly_slot >= 0)) or np.any(anomaly_slot >= s):
            raise ValueError("anomaly_slot must be in [0, slots) for anomalies, -1 otherwise")
        if np.any(action < 0) or np.any(action >= len(ACTIONS)):
            raise ValueError("unknown action code")
        self.counts = _readonly(counts)
        self.dummy_counts = _readonly(dummy_counts)
        self.is_anomaly = _readonly(is_anomaly)
        self.anomaly_slot = _readonly(anomaly_slot)
        self.action = _readonly(action)

    @property
    def slots(self) -> int:
        return self.counts.shape[1]

    def __len__(self) -> int:
        return self.counts.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Run(self.counts[i], self.dummy_counts[i], self.is_anomaly[i],
                       self.anomaly_slot[i], self.action[i])
        i = int(i)
        slot = int(self.anomaly_slot[i])
        return IntervalObservation(
            counts=tuple(int(c) for c in self.counts[i]),
            is_anomaly=bool(self.is_anomaly[i]),
            anomaly_slot=slot if slot >= 0 else None,
            obf_action=ACTIONS[int(self.action[i])],
            dummy_counts=tuple(int(d) for d in self.dummy_counts[i]),
        )

    def __eq__(self, other):
        if not isinstance(other, Run):
            return NotImplemented
        return (np.array_equal(self.counts, other.counts)
                and np.array_equal(self.dummy_counts, other.dummy_counts)
                and np.array_equal(self.is_anomaly, other.is_anomaly)
                and np.array_equal(self.anomaly_slot, other.anomaly_slot)
                and np.array_equal(self.action, other.action))

    __hash__ = None


def gen_interval(model: IntervalModel, seed) -> IntervalObservation:
    """Draw one interval.

    ``seed`` may be an int, a Generator, or a derived-seed tuple such as
    ``(base_seed, interval_index)``; the tuple form makes parallel
    per-interval generation order-independent.
    """
    rng = as_rng(seed)
    anomalous = bool(rng.random() < model.anomaly_rate)
    counts = rng.poisson(model.base_rate, model.slots)
    slot = None
    if anomalous:
        slot = int(rng.integers(model.slots))
        counts[slot] = rng.poisson(model.anomaly_slot_rate)
    return IntervalObservation(
        counts=tuple(int(c) for c in counts),
        is_anomaly=anomalous,
        anomaly_slot=slot,
    )


def gen_run(model: IntervalModel, n_intervals: int, seed) -> Run:
    """Draw ``n_intervals`` independent intervals as one vectorized batch.

    Deterministic given ``seed``. The batch consumes a single generator in
    a fixed order (anomaly coins, baseline matrix, slot choices, anomalous
    counts), so it is not bit-compatible with composing gen_interval, which
    exists for order-independent parallel generation.
    """
    if n_intervals < 0:
        raise ValueError("n_intervals must be >= 0")
    rng = as_rng(seed)
    n, s = n_intervals, model.slots
    flags = rng.random(n) < model.anomaly_rate
    counts = rng.poisson(model.base_rate, (n, s))
    slots = rng.integers(0, s, n)
    boosted = rng.poisson(model.anomaly_slot_rate, n)
    counts[flags, slots[flags]] = boosted[flags]
    anomaly_slot = np.where(flags, slots, -1)
    return Run(counts, np.zeros((n, s), dtype=np.int64), flags, anomaly_slot,
               np.zeros(n, dtype=np.int8))


def run_to_csv(run: Run, file, comment: str | None = None) -> None:
    """Write a run in long form, one row per (interval, slot).

    ``file`` is a path or a text file object. ``comment`` (if given) is
    emitted first as a '#'-prefixed provenance line.
    """
    own = isinstance(file, (str, bytes)) or hasattr(file, "__fspath__")
    fh = open(file, "w", newline="") if own else file
    try:
        if comment:
            fh.write("# " + comment.strip() + "\n")
        fh.write(RUN_CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for i in range(len(run)):
            anom = bool(run.is_anomaly[i])
            slot = int(run.anomaly_slot[i])
            act = ACTIONS[int(run.action[i])]
            for j in range(run.slots):
                w.writerow([i, j, int(run.counts[i, j]), int(run.dummy_counts[i, j]),
                            int(anom), slot if anom else "", act])
    finally:
        if own:
            fh.close()


def run_from_csv(file) -> Run:
    """Read a run written by :func:`run_to_csv`. Comment lines are skipped."""
    own = isinstance(file, (str, bytes)) or hasattr(file, "__fspath__")
    fh = open(file, "r", newline="") if own else file
    try:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    finally:
        if own:
            fh.close()
    if not rows or ",".join(rows[0]) != RUN_CSV_HEADER:
        raise ValueError("not a run CSV: bad or missing header")
    body = rows[1:]
    if not body:
        raise ValueError("run CSV has no data rows")
    n = int(body[-1][0]) + 1
    s = int(body[-1][1]) + 1
    if len(body) != n * s:
        raise ValueError("run CSV row count does not form a full (interval, slot) grid")
    counts = np.zeros((n, s), dtype=np.int64)
    dummy = np.zeros((n, s), dtype=np.int64)
    flags = np.zeros(n, dtype=bool)
    aslot = np.full(n, -1, dtype=np.int64)
    act = np.zeros(n, dtype=np.int8)
    for r in body:
        i, j = int(r[0]), int(r[1])
        counts[i, j] = int(r[2])
        dummy[i, j] = int(r[3])
        flags[i] = bool(int(r[4]))
        aslot[i] = int(r[5]) if r[5] != "" else -1
        act[i] = _ACTION_CODE[r[6]]
    return Run(counts, dummy, flags, aslot, act)


def to_timestamps(run: Run, slot_width: float = 1.0, start: float = 0.0) -> np.ndarray:
    """Flatten a run to message timestamps (seconds), deterministically.

    The c messages of a slot are evenly spaced inside it, so flooring the
    timestamps back onto the slot grid reproduces the counts exactly.
    """
    if not slot_width > 0:
        raise ValueError("slot_width must be > 0")
    flat = run.counts.ravel()
    n_slots = flat.size
    out = []
    for k in range(n_slots):
        c = int(flat[k])
        if c == 0:
            continue
        base = start + k * slot_width
        out.append(base + slot_width * (np.arange(c) + 0.5) / c)
    if not out:
        return np.empty(0, dtype=float)
    return np.concatenate(out)
