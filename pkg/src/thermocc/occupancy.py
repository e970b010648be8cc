"""Occupancy timelines and a hysteresis HVAC control simulation.

A timeline is a strictly increasing series of (timestamp, occupied)
samples. Detected timelines come from thresholding per-frame
detections; actual timelines come from manifest flags. The control
simulator turns a detected timeline into an on/off schedule with an
on delay and an off hold, the usual guard against short vacancies
cycling the plant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .annot import Detection
from .errors import AlignmentError, ConfigError, SequenceError
from .manifest import ManifestRecord
from .metrics import precision_recall


@dataclass(frozen=True)
class OccupancyTimeline:
    entries: tuple[tuple[int, bool], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries",
                           tuple((int(t), bool(f)) for t, f in self.entries))
        ts = [t for t, _ in self.entries]
        for a, b in zip(ts, ts[1:]):
            if b <= a:
                raise SequenceError(
                    f"timeline timestamps must strictly increase, "
                    f"got {a} then {b}")

    def timestamps(self) -> list[int]:
        return [t for t, _ in self.entries]

    def flags(self) -> list[bool]:
        return [f for _, f in self.entries]

    def __len__(self):
        return len(self.entries)


def frame_occupancy(dets: list[Detection], tau: float = 0.9) -> bool:
    """A frame counts as occupied when any detection reaches tau."""
    if not (0.0 <= tau <= 1.0):
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    return any(d.confidence >= tau for d in dets)


def detection_timeline(timestamps: list[int],
                       detections: list[list[Detection]],
                       tau: float = 0.9) -> OccupancyTimeline:
    """Threshold per-frame detections into an occupancy timeline."""
    if len(timestamps) != len(detections):
        raise AlignmentError(
            f"{len(timestamps)} timestamps vs {len(detections)} "
            f"detection lists")
    return OccupancyTimeline(tuple(
        (ts, frame_occupancy(dets, tau))
        for ts, dets in zip(timestamps, detections)))


def manifest_timeline(records: list[ManifestRecord]) -> OccupancyTimeline:
    """Ground-truth occupancy straight from manifest flags, time-sorted."""
    entries = sorted((rec.ts, rec.occupied) for rec in records)
    return OccupancyTimeline(tuple(entries))


@dataclass(frozen=True)
class OccupancyConfusion:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float

    @property
    def missed_occupied(self) -> int:
        """Occupied frames the detector called vacant."""
        return self.fn


def compare(actual: OccupancyTimeline,
            detected: OccupancyTimeline) -> OccupancyConfusion:
    """Frame-level confusion between two timelines on identical stamps."""
    if actual.timestamps() != detected.timestamps():
        raise AlignmentError("timelines cover different timestamps")
    tp = fp = fn = tn = 0
    for (_, truth), (_, seen) in zip(actual.entries, detected.entries):
        if truth and seen:
            tp += 1
        elif not truth and seen:
            fp += 1
        elif truth and not seen:
            fn += 1
        else:
            tn += 1
    precision, recall = precision_recall(tp, fp, fn)
    return OccupancyConfusion(tp, fp, fn, tn, precision, recall)


@dataclass(frozen=True)
class ControlPolicy:
    """Hysteresis thresholds in seconds.

    on_delay: how long a space must look occupied before the plant
    turns on. off_hold: how long it must look vacant before it turns
    off again.
    """

    on_delay: float = 0.0
    off_hold: float = 900.0

    def __post_init__(self):
        if self.on_delay < 0 or self.off_hold < 0:
            raise ConfigError("policy delays must be non-negative")


@dataclass(frozen=True)
class HvacSchedule:
    entries: tuple[tuple[int, bool], ...]
    on_seconds: float
    total_seconds: float
    on_fraction: float

    @property
    def runtime_reduction(self) -> float:
        """Fraction of always-on runtime the schedule saves."""
        return 1.0 - self.on_fraction


def simulate_control(detected: OccupancyTimeline,
                     policy: ControlPolicy = ControlPolicy()) -> HvacSchedule:
    """Walk a detected timeline through the hysteresis policy.

    The plant starts off. Within a run of equal occupancy samples the
    elapsed time since the run began is compared to the policy: an
    occupied run switches on once it reaches on_delay, a vacant run
    switches off once it reaches off_hold; otherwise the previous state
    holds. Durations weight each entry by the gap to the next sample;
    the final entry reuses the previous gap (zero for a lone sample).
    """
    entries = []
    hvac = False
    run_value: bool | None = None
    run_start = 0
    for ts, occupied in detected.entries:
        if occupied != run_value:
            run_value = occupied
            run_start = ts
        elapsed = ts - run_start
        if run_value and elapsed >= policy.on_delay:
            hvac = True
        elif not run_value and elapsed >= policy.off_hold:
            hvac = False
        entries.append((ts, hvac))
    on_seconds, total_seconds = _weighted_on_time(entries)
    if total_seconds > 0:
        on_fraction = on_seconds / total_seconds
    elif entries:
        on_fraction = sum(f for _, f in entries) / len(entries)
    else:
        on_fraction = 0.0
    return HvacSchedule(tuple(entries), on_seconds, total_seconds,
                        on_fraction)


def _weighted_on_time(entries: list[tuple[int, bool]]) -> tuple[float, float]:
    n = len(entries)
    if n < 2:
        return 0.0, 0.0
    on = total = 0.0
    for k, (ts, flag) in enumerate(entries):
        if k < n - 1:
            dwell = entries[k + 1][0] - ts
        else:
            dwell = ts - entries[k - 1][0]
        total += dwell
        if flag:
            on += dwell
    return on, total


def write_timeline_csv(path: str, actual: OccupancyTimeline,
                       detected: OccupancyTimeline) -> None:
    """One row per frame: timestamp, actual flag, detected flag (0/1)."""
    if actual.timestamps() != detected.timestamps():
        raise AlignmentError("timelines cover different timestamps")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ts", "actual", "detected"])
        for (ts, truth), (_, seen) in zip(actual.entries, detected.entries):
            writer.writerow([ts, int(truth), int(seen)])


def write_schedule_csv(path: str, schedule: HvacSchedule) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ts", "hvac_on"])
        for ts, flag in schedule.entries:
            writer.writerow([ts, int(flag)])
