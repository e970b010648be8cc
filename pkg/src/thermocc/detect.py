"""Warm-blob occupant detector.

A frame is thresholded at a fixed Celsius contour, the warm mask is
split into 4-connected components, and each component is scored by
three membership functions (mean temperature ramp, bounding-box area
fraction trapezoid, bounding-box aspect trapezoid) whose product is
the detection confidence. Greedy NMS then drops overlapping boxes.
The whole pass is arithmetic on the raw frame, so identical frames
always produce identical detections.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .annot import Detection, PixelBox, from_pixel_box, to_pixel_box
from .errors import ConfigError
from .frame import ThermalFrame, read_frame
from .manifest import ManifestRecord, resolve
from .metrics import iou
from .util import clamp

# 4-connectivity: blobs touching only at corners stay separate.
_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class DetectorConfig:
    """Tuning knobs for the blob detector.

    warm_threshold seeds the mask. The temperature score ramps from 0
    at t_warm to 1 at t_face. Area and aspect scores are trapezoids
    (a, b, c, d): zero outside (a, d), one on [b, c], linear between.
    Area is the box's fraction of the frame, aspect is box height over
    width in pixels.
    """

    warm_threshold: float = 30.0
    t_warm: float = 28.0
    t_face: float = 34.0
    area_knots: tuple[float, float, float, float] = (0.005, 0.02, 0.25, 0.60)
    aspect_knots: tuple[float, float, float, float] = (0.6, 0.8, 1.6, 2.2)
    nms_iou: float = 0.5

    def __post_init__(self):
        if not (self.t_warm < self.t_face):
            raise ConfigError(
                f"need t_warm < t_face, got {self.t_warm} >= {self.t_face}")
        for name, knots in (("area", self.area_knots),
                            ("aspect", self.aspect_knots)):
            a, b, c, d = knots
            if not (a <= b <= c <= d and a < b and c < d):
                raise ConfigError(f"{name} knots must satisfy a < b <= c < d, "
                                  f"got {knots}")
        if not (0.0 <= self.nms_iou <= 1.0):
            raise ConfigError(f"nms_iou must lie in [0, 1], got {self.nms_iou}")


DEFAULT_CONFIG = DetectorConfig()


def _trapezoid(x: float, knots: tuple[float, float, float, float]) -> float:
    a, b, c, d = knots
    if x <= a or x >= d:
        return 0.0
    if x < b:
        return (x - a) / (b - a)
    if x <= c:
        return 1.0
    return (d - x) / (d - c)


def score_blob(mean_temp: float, area_frac: float, aspect: float,
               config: DetectorConfig = DEFAULT_CONFIG) -> float:
    """Confidence of one blob: product of the three membership scores."""
    f_temp = clamp((mean_temp - config.t_warm)
                   / (config.t_face - config.t_warm), 0.0, 1.0)
    f_area = _trapezoid(area_frac, config.area_knots)
    f_aspect = _trapezoid(aspect, config.aspect_knots)
    return f_temp * f_area * f_aspect


def nms(dets: list[Detection], iou_thresh: float,
        width: int, height: int) -> list[Detection]:
    """Greedy non-maximum suppression.

    Detections are visited in descending confidence (ties by pixel y0
    then x0); each is kept only if its IoU with every previously kept
    box stays below iou_thresh. The result preserves that visit order,
    is a subset of the input, and is idempotent.
    """
    boxes = [to_pixel_box(d.box, width, height) for d in dets]
    order = sorted(range(len(dets)),
                   key=lambda i: (-dets[i].confidence,
                                  boxes[i].y0, boxes[i].x0))
    kept: list[int] = []
    for i in order:
        if all(iou(boxes[i], boxes[j]) < iou_thresh for j in kept):
            kept.append(i)
    return [dets[i] for i in kept]


def threshold_filter(dets: list[Detection], tau: float) -> list[Detection]:
    """Keep detections whose confidence is at least tau (inclusive)."""
    if not (0.0 <= tau <= 1.0):
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    return [d for d in dets if d.confidence >= tau]


def detect_blobs(frame: ThermalFrame,
                 config: DetectorConfig = DEFAULT_CONFIG) -> list[Detection]:
    """Detect warm blobs in one frame.

    Returns detections sorted by descending confidence (ties by pixel
    y0, x0), already thinned by NMS. Boxes are the tight pixel
    bounding boxes of the components, converted to normalized
    coordinates; zero-score components are dropped.
    """
    temps = frame.temps_celsius()
    mask = temps >= config.warm_threshold
    if not mask.any():
        return []
    labels, _ = ndimage.label(mask, structure=_CROSS)
    frame_area = float(frame.width * frame.height)
    dets = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        region = labels[sl] == k
        member_temps = temps[sl][region]
        y0, y1 = sl[0].start, sl[0].stop
        x0, x1 = sl[1].start, sl[1].stop
        pixel_box = PixelBox(float(x0), float(y0), float(x1), float(y1))
        conf = score_blob(float(member_temps.mean()),
                          pixel_box.area() / frame_area,
                          (y1 - y0) / (x1 - x0), config)
        if conf <= 0.0:
            continue
        dets.append(Detection(0, from_pixel_box(pixel_box, frame.width,
                                                frame.height), conf))
    dets = nms(dets, config.nms_iou, frame.width, frame.height)
    return dets


def detect_manifest(records: list[ManifestRecord], manifest_path: str,
                    config: DetectorConfig = DEFAULT_CONFIG,
                    threads: int = 1) -> list[list[Detection]]:
    """Run the detector over every manifest frame, in manifest order.

    threads caps worker parallelism; results are collected by index so
    the output is identical for any thread count.
    """
    if threads < 1:
        raise ConfigError(f"threads must be at least 1, got {threads}")

    def work(rec: ManifestRecord) -> list[Detection]:
        return detect_blobs(read_frame(resolve(manifest_path, rec.frame)),
                            config)

    if threads == 1:
        return [work(rec) for rec in records]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, records))


def prediction_filename(frame_path: str) -> str:
    """Prediction file name for a frame: its stem plus .txt."""
    return os.path.splitext(os.path.basename(frame_path))[0] + ".txt"
