"""Synthetic thermal scenes with exact ground truth.

An occupant's head is modeled as a warm ellipse over a uniform
background: a flat core at the peak temperature out to 90% of the
radius, then a linear falloff to 60% of the peak-over-background delta
at the rim. Because the rim never drops below half the delta, the
ground-truth box (the tight bounding box of visible in-ellipse pixels,
computed before noise) is exactly the tight box of pixels warmer than
background + delta/2.

Side and downward poses shrink one radius, occlusion cuts a chosen
fraction of the ellipse area from the bottom (a hand or a held object
in front of the lower face), and every frame draws from its own
seeded generator so datasets reproduce byte-for-byte.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .annot import Detection, GroundTruthBox, NormalizedBox, serialize_labels
from .errors import OracleScaleError, SceneSpecError
from .frame import ThermalFrame, raw_from_celsius, write_frame
from .manifest import ManifestRecord, write_manifest
from .metrics import MatchResult
from .util import round_half_away

ORIENTATIONS = ("frontal", "side", "down")
_ORIENT_SCALE = {"frontal": (1.0, 1.0), "side": (0.55, 1.0),
                 "down": (1.0, 0.55)}

# Radial profile: flat at the peak out to HEAD_CORE of the radius,
# linear down to HEAD_EDGE of the delta at the rim. HEAD_EDGE > 0.5
# keeps every in-ellipse pixel above background + delta/2.
HEAD_CORE = 0.9
HEAD_EDGE = 0.6

DEFAULT_OCCUPIED_FRACTION = 3.75 / 4.75


@dataclass(frozen=True)
class HeadSpec:
    """One head: center and radii in unit coordinates."""

    cx: float
    cy: float
    rx: float
    ry: float
    peak_temp: float = 34.0
    orientation: str = "frontal"
    occlusion: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise SceneSpecError("head center must lie in the unit square")
        if not (0.0 < self.rx <= 0.5 and 0.0 < self.ry <= 0.5):
            raise SceneSpecError("head radii must lie in (0, 0.5]")
        if self.orientation not in ORIENTATIONS:
            raise SceneSpecError(f"unknown orientation {self.orientation!r}")
        if not (0.0 <= self.occlusion <= 0.9):
            raise SceneSpecError("occlusion fraction must lie in [0, 0.9]")


@dataclass(frozen=True)
class SceneSpec:
    """One frame: a background and at most one head."""

    background_temp: float = 22.0
    noise_sigma: float = 0.3
    head: HeadSpec | None = None

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise SceneSpecError("noise sigma must be non-negative")
        if (self.head is not None
                and self.head.peak_temp <= self.background_temp):
            raise SceneSpecError("head peak must exceed the background")


@dataclass(frozen=True)
class Scenario:
    """A pose/occlusion combination and its sampling weight."""

    orientation: str = "frontal"
    occlusion: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise SceneSpecError(f"unknown orientation {self.orientation!r}")
        if not (0.0 <= self.occlusion <= 0.9):
            raise SceneSpecError("occlusion fraction must lie in [0, 0.9]")
        if not (self.weight > 0):
            raise SceneSpecError("scenario weight must be positive")


FRONTAL_SCENARIOS = (Scenario("frontal", 0.0, 1.0),)

# Mixed poses: clear frontal views plus the hard cases a ceiling
# camera actually sees (profiles, bowed heads, hands and held objects
# in front of the face).
MIXED_SCENARIOS = (
    Scenario("frontal", 0.0, 0.40),
    Scenario("side", 0.0, 0.25),
    Scenario("down", 0.0, 0.10),
    Scenario("frontal", 0.5, 0.15),
    Scenario("frontal", 0.7, 0.10),
)


@dataclass(frozen=True)
class DatasetSpec:
    frames: int
    occupied_fraction: float = DEFAULT_OCCUPIED_FRACTION
    scenarios: tuple[Scenario, ...] = MIXED_SCENARIOS
    seed: int = 0
    width: int = 128
    height: int = 96
    background_temp: float = 22.0
    noise_sigma: float = 0.3
    start_ts: int = 0
    period: int = 10

    def __post_init__(self):
        if self.frames < 1:
            raise SceneSpecError("need at least one frame")
        if not (0.0 <= self.occupied_fraction <= 1.0):
            raise SceneSpecError("occupied fraction must lie in [0, 1]")
        if not self.scenarios:
            raise SceneSpecError("need at least one scenario")
        if self.seed < 0:
            raise SceneSpecError("seed must be non-negative")
        if self.width < 8 or self.height < 8:
            raise SceneSpecError("frames must be at least 8x8")
        if self.noise_sigma < 0:
            raise SceneSpecError("noise sigma must be non-negative")
        if self.period < 1:
            raise SceneSpecError("frame period must be at least 1 s")


@dataclass(frozen=True)
class FramePlan:
    index: int
    ts: int
    occupied: bool
    scenario: int | None  # index into DatasetSpec.scenarios


def occupied_count(frames: int, fraction: float) -> int:
    """Occupied frames for a dataset: rounded, halves away from zero."""
    return round_half_away(frames * fraction)


def _occlusion_cut(fraction: float) -> float:
    """Chord level c such that the disk area below c equals fraction.

    Area below a chord at height c (c in [-1, 1], axis pointing down)
    is (acos(c) - c*sqrt(1 - c^2)) / pi; solved by bisection, which is
    exact enough (1e-12) and has no seed or library dependence.
    """
    if fraction <= 0.0:
        return 1.0

    def below(c: float) -> float:
        return (math.acos(c) - c * math.sqrt(1.0 - c * c)) / math.pi

    lo, hi = -1.0, 1.0  # below(lo) = 1, below(hi) = 0
    for _ in range(60):
        mid = (lo + hi) / 2.0
        if below(mid) > fraction:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def _render(scene: SceneSpec, rng: np.random.Generator, width: int,
            height: int, ts: int) -> tuple[ThermalFrame, list[GroundTruthBox]]:
    """Rasterize a scene; ground truth comes from the noiseless mask."""
    temps = np.full((height, width), scene.background_temp, dtype=np.float64)
    gts: list[GroundTruthBox] = []
    if scene.head is not None:
        head = scene.head
        sx, sy = _ORIENT_SCALE[head.orientation]
        rx, ry = head.rx * sx, head.ry * sy
        u = (np.arange(width) + 0.5) / width
        v = (np.arange(height) + 0.5) / height
        du = (u[None, :] - head.cx) / rx
        dv = (v[:, None] - head.cy) / ry
        dist = np.sqrt(du * du + dv * dv)
        inside = dist <= 1.0
        if head.occlusion > 0.0:
            cut = _occlusion_cut(head.occlusion)
            inside &= dv <= cut
        if inside.any():
            delta = head.peak_temp - scene.background_temp
            profile = np.where(
                dist <= HEAD_CORE, 1.0,
                1.0 - (1.0 - HEAD_EDGE) * (dist - HEAD_CORE) / (1.0 - HEAD_CORE))
            temps = np.where(inside, scene.background_temp + delta * profile,
                             temps)
            rows = np.nonzero(inside.any(axis=1))[0]
            cols = np.nonzero(inside.any(axis=0))[0]
            x0, x1 = cols[0] / width, (cols[-1] + 1) / width
            y0, y1 = rows[0] / height, (rows[-1] + 1) / height
            gts.append(GroundTruthBox(0, NormalizedBox(
                (x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0)))
    if scene.noise_sigma > 0.0:
        temps = temps + rng.normal(0.0, scene.noise_sigma, temps.shape)
    return ThermalFrame(width, height, raw_from_celsius(temps), ts), gts


def generate_scene(scene: SceneSpec, seed: int = 0, width: int = 128,
                   height: int = 96, ts: int = 0):
    """Render one scene with its own generator; returns (frame, gts)."""
    rng = np.random.default_rng(seed)
    return _render(scene, rng, width, height, ts)


def plan_dataset(spec: DatasetSpec) -> list[FramePlan]:
    """Lay out occupancy runs and pick a scenario for each occupied run.

    Frames alternate between occupied stretches of 30..120 frames and
    vacant stretches of 20..100 frames (a person settling in, then the
    room standing empty), starting with whichever kind the quota needs
    more of. One scenario is drawn per occupied run: a person holds a
    pose for a while rather than re-rolling it every 10 seconds.
    """
    total_occ = occupied_count(spec.frames, spec.occupied_fraction)
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed,)))
    weights = np.array([s.weight for s in spec.scenarios], dtype=np.float64)
    weights /= weights.sum()
    plans: list[FramePlan] = []
    occ_left, vac_left = total_occ, spec.frames - total_occ
    occupied_turn = occ_left >= vac_left
    while occ_left > 0 or vac_left > 0:
        if occupied_turn and occ_left > 0:
            run = min(occ_left, int(rng.integers(30, 121)))
            scenario = int(rng.choice(len(spec.scenarios), p=weights))
            occ_left -= run
            flags = [(True, scenario)] * run
        elif not occupied_turn and vac_left > 0:
            run = min(vac_left, int(rng.integers(20, 101)))
            vac_left -= run
            flags = [(False, None)] * run
        else:
            flags = []
        for occupied, scenario in flags:
            index = len(plans)
            plans.append(FramePlan(index, spec.start_ts + index * spec.period,
                                   occupied, scenario))
        occupied_turn = not occupied_turn
    return plans


def render_frame(spec: DatasetSpec,
                 plan: FramePlan) -> tuple[ThermalFrame, list[GroundTruthBox]]:
    """Render one planned frame from its own (seed, index) stream.

    Draw order is fixed: background drift, then head geometry for
    occupied frames, then pixel noise; changing it would change every
    generated dataset.
    """
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, plan.index)))
    bg = spec.background_temp + rng.uniform(-0.3, 0.3)
    head = None
    if plan.occupied:
        scenario = spec.scenarios[plan.scenario]
        cx = rng.uniform(0.35, 0.65)
        cy = rng.uniform(0.30, 0.55)
        rx = rng.uniform(0.09, 0.13)
        ry = rx * rng.uniform(1.25, 1.55)
        head = HeadSpec(cx, cy, rx, ry, peak_temp=34.0,
                        orientation=scenario.orientation,
                        occlusion=scenario.occlusion)
    scene = SceneSpec(background_temp=bg, noise_sigma=spec.noise_sigma,
                      head=head)
    return _render(scene, rng, spec.width, spec.height, plan.ts)


def generate_dataset(spec: DatasetSpec, out_dir: str) -> str:
    """Write frames/, labels/ and manifest.jsonl; returns the manifest path.

    Every frame gets a label file; unoccupied frames get a blank one.
    Rerunning with the same spec reproduces every byte.
    """
    frames_dir = os.path.join(out_dir, "frames")
    labels_dir = os.path.join(out_dir, "labels")
    os.makedirs(frames_dir, exist_ok=True)
    os.makedirs(labels_dir, exist_ok=True)
    records = []
    for plan in plan_dataset(spec):
        stem = f"frame_{plan.index:06d}"
        frame, gts = render_frame(spec, plan)
        write_frame(os.path.join(frames_dir, stem + ".pgm"), frame)
        with open(os.path.join(labels_dir, stem + ".txt"), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_labels(gts))
        records.append(ManifestRecord(
            frame=f"frames/{stem}.pgm", labels=f"labels/{stem}.txt",
            occupied=plan.occupied, ts=plan.ts))
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    write_manifest(manifest_path, records)
    return manifest_path


def oracle_match(preds: list[Detection], gts: list[GroundTruthBox],
                 iou_thresh: float = 0.5, width: int = 128,
                 height: int = 96) -> MatchResult:
    """Brute-force reference matcher for cross-checking.

    Recomputes box scaling, overlap and the greedy assignment with
    plain Python floats and no shared helpers, so it can disagree with
    the production matcher if either drifts. Deliberately capped to
    tiny inputs; it exists to be obviously correct, not fast.
    """
    if len(preds) > 8:
        raise OracleScaleError(f"at most 8 predictions, got {len(preds)}")
    if len(gts) > 5:
        raise OracleScaleError(f"at most 5 ground truths, got {len(gts)}")

    def corners(box: NormalizedBox) -> tuple[float, float, float, float]:
        x0 = min(max((box.cx - box.w / 2.0) * width, 0.0), float(width))
        x1 = min(max((box.cx + box.w / 2.0) * width, 0.0), float(width))
        y0 = min(max((box.cy - box.h / 2.0) * height, 0.0), float(height))
        y1 = min(max((box.cy + box.h / 2.0) * height, 0.0), float(height))
        return x0, y0, x1, y1

    def overlap(a, b) -> float:
        iw = min(a[2], b[2]) - max(a[0], b[0])
        ih = min(a[3], b[3]) - max(a[1], b[1])
        if iw <= 0.0 or ih <= 0.0:
            return 0.0
        inter = iw * ih
        area_a = (a[2] - a[0]) * (a[3] - a[1])
        area_b = (b[2] - b[0]) * (b[3] - b[1])
        return inter / (area_a + area_b - inter)

    pcs = [corners(d.box) for d in preds]
    gcs = [corners(g.box) for g in gts]
    order = sorted(range(len(preds)),
                   key=lambda i: (-preds[i].confidence, pcs[i][1], pcs[i][0]))
    taken = [False] * len(gts)
    assignments = []
    tp = 0
    for i in order:
        best_j = None
        best = 0.0
        for j in range(len(gts)):
            if taken[j]:
                continue
            v = overlap(pcs[i], gcs[j])
            if v > best:
                best = v
                best_j = j
        if best_j is not None and best >= iou_thresh:
            taken[best_j] = True
            tp += 1
            assignments.append((i, best_j))
        else:
            assignments.append((i, None))
    return MatchResult(tuple(assignments), tp, len(preds) - tp,
                       len(gts) - tp)
