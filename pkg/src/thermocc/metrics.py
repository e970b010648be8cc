"""Detection metrics: IoU, greedy matching, PR curves, AP and mAP.

All overlap math runs on continuous pixel boxes. IoU is scale
invariant, so the rasterization size only pins the (y0, x0) tie-break
order; everything defaults to the native 128x96 grid.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .annot import Detection, GroundTruthBox, PixelBox, parse_labels, \
    parse_predictions, to_pixel_box
from .errors import ConfigError
from .manifest import ManifestRecord, resolve

NATIVE_WIDTH = 128
NATIVE_HEIGHT = 96

# IoU thresholds for the mAP ladder: 0.50 to 0.95 in 0.05 steps.
MAP_THRESHOLDS = tuple((50 + 5 * k) / 100 for k in range(10))


def iou(a: PixelBox, b: PixelBox) -> float:
    """Intersection over union of two pixel boxes."""
    ix0 = max(a.x0, b.x0)
    iy0 = max(a.y0, b.y0)
    ix1 = min(a.x1, b.x1)
    iy1 = min(a.y1, b.y1)
    iw = ix1 - ix0
    ih = iy1 - iy0
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area() + b.area() - inter
    return inter / union


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one image's predictions to its ground truth.

    assignments holds (prediction index, matched gt index or None) in
    the order predictions were visited (descending confidence).
    """

    assignments: tuple[tuple[int, int | None], ...]
    tp: int
    fp: int
    fn: int


def match_detections(preds: list[Detection], gts: list[GroundTruthBox],
                     iou_thresh: float = 0.5,
                     width: int = NATIVE_WIDTH,
                     height: int = NATIVE_HEIGHT) -> MatchResult:
    """Greedily match predictions to ground-truth boxes.

    Predictions are visited in descending confidence (ties broken by
    the box's pixel y0 then x0). Each takes the still-unmatched ground
    truth with the highest IoU, ties going to the lowest gt index, and
    counts as a true positive when that IoU reaches iou_thresh. Each
    ground truth is consumed at most once.
    """
    pboxes = [to_pixel_box(d.box, width, height) for d in preds]
    gboxes = [to_pixel_box(g.box, width, height) for g in gts]
    order = sorted(range(len(preds)),
                   key=lambda i: (-preds[i].confidence,
                                  pboxes[i].y0, pboxes[i].x0))
    taken = [False] * len(gts)
    assignments = []
    tp = 0
    for i in order:
        best_j = None
        best = 0.0
        for j, gb in enumerate(gboxes):
            if taken[j]:
                continue
            v = iou(pboxes[i], gb)
            if v > best:
                best = v
                best_j = j
        if best_j is not None and best >= iou_thresh:
            taken[best_j] = True
            tp += 1
            assignments.append((i, best_j))
        else:
            assignments.append((i, None))
    return MatchResult(tuple(assignments), tp,
                       len(preds) - tp, len(gts) - tp)


def precision_recall(tp: int, fp: int, fn: int) -> tuple[float, float]:
    """Pointwise precision and recall; empty denominators count as 1.0."""
    precision = tp / (tp + fp) if tp + fp > 0 else 1.0
    recall = tp / (tp + fn) if tp + fn > 0 else 1.0
    return precision, recall


@dataclass(frozen=True)
class PRCurve:
    """Dataset-wide precision/recall after each prediction rank.

    points[k] is (recall, precision) after admitting the k+1 highest
    confidence predictions across every image. With zero ground truths
    recall is defined as 1.0 throughout.
    """

    points: tuple[tuple[float, float], ...]
    total_gts: int


def pr_curve(samples, iou_thresh: float = 0.5,
             width: int = NATIVE_WIDTH,
             height: int = NATIVE_HEIGHT) -> PRCurve:
    """Sweep confidence over a dataset of (predictions, gts) pairs.

    Matching runs per image once; because the greedy pass visits
    predictions in descending confidence, the matches of any
    confidence prefix equal the prefix of the full match, so one pass
    labels every prediction TP or FP for the whole sweep. Ranks order
    by confidence descending with (image index, y0, x0) tie-breaks.
    """
    entries = []
    total_gts = 0
    for img_id, (preds, gts) in enumerate(samples):
        total_gts += len(gts)
        result = match_detections(preds, gts, iou_thresh, width, height)
        matched = {i for i, j in result.assignments if j is not None}
        for i, det in enumerate(preds):
            pb = to_pixel_box(det.box, width, height)
            entries.append((-det.confidence, img_id, pb.y0, pb.x0,
                            i in matched))
    entries.sort(key=lambda e: e[:4])
    points = []
    cum_tp = 0
    for rank, entry in enumerate(entries, start=1):
        cum_tp += bool(entry[4])
        recall = cum_tp / total_gts if total_gts > 0 else 1.0
        points.append((recall, cum_tp / rank))
    return PRCurve(tuple(points), total_gts)


def average_precision(curve: PRCurve) -> float:
    """101-point interpolated AP.

    AP = mean over r in {0.00, 0.01, ..., 1.00} of the maximum
    precision among curve points whose recall is at least r; grid
    points beyond the final recall contribute zero.
    """
    if not curve.points:
        return 0.0
    rec = np.array([p[0] for p in curve.points])
    prec = np.array([p[1] for p in curve.points])
    suffix_max = np.maximum.accumulate(prec[::-1])[::-1]
    grid = np.arange(101) / 100.0
    idx = np.searchsorted(rec, grid, side="left")
    hit = idx < len(rec)
    return float(suffix_max[idx[hit]].sum() / 101.0)


def map_range(samples, width: int = NATIVE_WIDTH, height: int = NATIVE_HEIGHT,
              thresholds: tuple[float, ...] = MAP_THRESHOLDS):
    """AP at each IoU threshold plus the 0.50 and 0.50:0.95 summaries.

    Returns (map50, map50_95, ap_per_iou). Raises ConfigError when the
    samples contain neither ground truths nor predictions, because a
    mean over nothing is meaningless.
    """
    samples = list(samples)
    n_gts = sum(len(gts) for _, gts in samples)
    n_preds = sum(len(preds) for preds, _ in samples)
    if n_gts == 0 and n_preds == 0:
        raise ConfigError("no ground truths and no predictions to score")
    aps = tuple(average_precision(pr_curve(samples, t, width, height))
                for t in thresholds)
    return aps[0], sum(aps) / len(aps), aps


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    map50: float
    map50_95: float
    ap_per_iou: tuple[float, ...]
    counts: dict
    operating_tau: float

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "map50": self.map50,
            "map50_95": self.map50_95,
            "ap_per_iou": list(self.ap_per_iou),
            "counts": dict(self.counts),
            "operating_tau": self.operating_tau,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def load_samples(records: list[ManifestRecord], preds_dir: str,
                 manifest_path: str):
    """Pair each record's predictions with its ground truths.

    Ground truth comes from the record's label file (a null label path
    means no objects). Predictions come from preds_dir/<frame stem>.txt;
    a missing file means zero predictions, anything unparseable is a
    hard error. Duplicate frame stems would silently share one
    prediction file, so they are rejected.
    """
    stems = [os.path.splitext(os.path.basename(r.frame))[0] for r in records]
    if len(set(stems)) != len(stems):
        raise ConfigError("manifest contains duplicate frame stems")
    samples = []
    for rec, stem in zip(records, stems):
        gts = []
        if rec.labels is not None:
            with open(resolve(manifest_path, rec.labels), encoding="utf-8") as fh:
                gts = parse_labels(fh.read())
        pred_path = os.path.join(preds_dir, stem + ".txt")
        preds = []
        if os.path.exists(pred_path):
            with open(pred_path, encoding="utf-8") as fh:
                preds = parse_predictions(fh.read())
        samples.append((preds, gts))
    return samples


def evaluate(records: list[ManifestRecord], preds_dir: str,
             manifest_path: str, operating_tau: float = 0.9,
             width: int = NATIVE_WIDTH,
             height: int = NATIVE_HEIGHT) -> EvalReport:
    """Score a prediction directory against a manifest.

    Precision/recall and the confusion counts are taken at the
    operating confidence threshold with IoU 0.5; the mAP figures sweep
    every prediction regardless of the operating threshold.
    """
    if not (0.0 <= operating_tau <= 1.0):
        raise ConfigError(f"operating tau must lie in [0, 1], got {operating_tau}")
    if not records:
        raise ConfigError("manifest holds no records to evaluate")
    samples = load_samples(records, preds_dir, manifest_path)
    tp = fp = fn = 0
    kept = 0
    for preds, gts in samples:
        admitted = [d for d in preds if d.confidence >= operating_tau]
        result = match_detections(admitted, gts, 0.5, width, height)
        tp += result.tp
        fp += result.fp
        fn += result.fn
        kept += len(admitted)
    precision, recall = precision_recall(tp, fp, fn)
    map50, map50_95, aps = map_range(samples, width, height)
    counts = {
        "images": len(samples),
        "gts": sum(len(g) for _, g in samples),
        "preds": kept,
        "tp": tp,
        "fp": fp,
        "fn": fn,
    }
    return EvalReport(precision, recall, map50, map50_95, aps,
                      counts, operating_tau)
