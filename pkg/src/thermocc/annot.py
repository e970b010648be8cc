"""Annotation boxes and their on-disk text format.

Label files carry one `class cx cy w h` line per object; prediction
files append a confidence column. All geometry is normalized to the
unit square with (cx, cy) the box center. A blank or empty file means
the frame has no objects, which is how unoccupied frames are stored.
Only class id 0 (a person's head) exists in this task; anything else
in a file is treated as corruption rather than silently carried along.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AnnotationParseError, BoxRangeError, DegenerateBoxError
from .util import clamp


@dataclass(frozen=True)
class NormalizedBox:
    """Center/size box in unit coordinates."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.cx <= 1.0):
            raise BoxRangeError(f"cx must lie in [0, 1], got {self.cx}")
        if not (0.0 <= self.cy <= 1.0):
            raise BoxRangeError(f"cy must lie in [0, 1], got {self.cy}")
        if not (0.0 < self.w <= 1.0):
            raise BoxRangeError(f"w must lie in (0, 1], got {self.w}")
        if not (0.0 < self.h <= 1.0):
            raise BoxRangeError(f"h must lie in (0, 1], got {self.h}")


@dataclass(frozen=True)
class GroundTruthBox:
    class_id: int
    box: NormalizedBox

    def __post_init__(self):
        if self.class_id != 0:
            raise BoxRangeError(
                f"only class 0 exists in this task, got {self.class_id}")


@dataclass(frozen=True)
class Detection:
    class_id: int
    box: NormalizedBox
    confidence: float

    def __post_init__(self):
        if self.class_id != 0:
            raise BoxRangeError(
                f"only class 0 exists in this task, got {self.class_id}")
        if not (0.0 <= self.confidence <= 1.0):
            raise BoxRangeError(
                f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class PixelBox:
    """Corner box in continuous pixel coordinates, x1/y1 exclusive-ish.

    Coordinates stay unrounded floats; rounding before overlap math
    would shift IoU values on images this small.
    """

    x0: float
    y0: float
    x1: float
    y1: float

    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


def to_pixel_box(box: NormalizedBox, width: int, height: int) -> PixelBox:
    """Scale a normalized box onto a width x height grid, clamped to it."""
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be at least 1x1")
    x0 = clamp((box.cx - box.w / 2.0) * width, 0.0, float(width))
    x1 = clamp((box.cx + box.w / 2.0) * width, 0.0, float(width))
    y0 = clamp((box.cy - box.h / 2.0) * height, 0.0, float(height))
    y1 = clamp((box.cy + box.h / 2.0) * height, 0.0, float(height))
    if not (x1 > x0 and y1 > y0):
        raise DegenerateBoxError(
            f"box collapses to zero area on a {width}x{height} grid")
    return PixelBox(x0, y0, x1, y1)


def from_pixel_box(pbox: PixelBox, width: int, height: int) -> NormalizedBox:
    """Inverse of to_pixel_box for boxes already inside the grid."""
    return NormalizedBox(
        cx=(pbox.x0 + pbox.x1) / 2.0 / width,
        cy=(pbox.y0 + pbox.y1) / 2.0 / height,
        w=(pbox.x1 - pbox.x0) / width,
        h=(pbox.y1 - pbox.y0) / height,
    )


def parse_labels(text: str) -> list[GroundTruthBox]:
    """Parse label text; blank and whitespace-only input is an empty list."""
    boxes = []
    for lineno, fields in _annotation_lines(text, 5):
        class_id = _parse_class(fields[0], lineno)
        box = _parse_geometry(fields[1:5], lineno)
        try:
            boxes.append(GroundTruthBox(class_id, box))
        except BoxRangeError as exc:
            raise BoxRangeError(f"line {lineno}: {exc}") from exc
    return boxes


def serialize_labels(boxes: list[GroundTruthBox]) -> str:
    lines = [f"{b.class_id} {b.box.cx:.6f} {b.box.cy:.6f} "
             f"{b.box.w:.6f} {b.box.h:.6f}" for b in boxes]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_predictions(text: str) -> list[Detection]:
    """Parse prediction text: label grammar plus a trailing confidence."""
    dets = []
    for lineno, fields in _annotation_lines(text, 6):
        class_id = _parse_class(fields[0], lineno)
        box = _parse_geometry(fields[1:5], lineno)
        conf = _parse_float(fields[5], lineno, "confidence")
        try:
            dets.append(Detection(class_id, box, conf))
        except BoxRangeError as exc:
            raise BoxRangeError(f"line {lineno}: {exc}") from exc
    return dets


def serialize_predictions(dets: list[Detection]) -> str:
    lines = [f"{d.class_id} {d.box.cx:.6f} {d.box.cy:.6f} "
             f"{d.box.w:.6f} {d.box.h:.6f} {d.confidence:.6f}" for d in dets]
    return "\n".join(lines) + ("\n" if lines else "")


def _annotation_lines(text: str, nfields: int):
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != nfields:
            raise AnnotationParseError(
                f"line {lineno}: expected {nfields} fields, got {len(fields)}")
        yield lineno, fields


def _parse_class(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise AnnotationParseError(
            f"line {lineno}: class id {token!r} is not an integer") from None


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise AnnotationParseError(
            f"line {lineno}: {what} {token!r} is not a number") from None


def _parse_geometry(fields, lineno: int) -> NormalizedBox:
    cx = _parse_float(fields[0], lineno, "cx")
    cy = _parse_float(fields[1], lineno, "cy")
    w = _parse_float(fields[2], lineno, "w")
    h = _parse_float(fields[3], lineno, "h")
    try:
        return NormalizedBox(cx, cy, w, h)
    except BoxRangeError as exc:
        raise BoxRangeError(f"line {lineno}: {exc}") from exc
