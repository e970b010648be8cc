"""Thermal frame codec and normalization.

Frames travel as binary PGM (P5) files with a 16-bit big-endian
payload, maxval 65535, and a mandatory `# ts=<integer>` comment line
directly after the magic. Pixel values are centi-kelvin, so a raw
value v maps to (v - 27315) / 100 degrees Celsius and the codec is
lossless at 0.01 degree resolution.
"""

from __future__ import annotations

import os
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (FrameFormatError, FrameIOError, FrameMetadataError,
                     FrameTruncationError, SequenceError)
from .manifest import ManifestRecord

CENTI_KELVIN_OFFSET = 27315  # raw value of 0.00 degrees Celsius
PGM_MAXVAL = 65535

_TS_COMMENT = re.compile(rb"#[ \t]*ts=(-?\d+)[ \t\r]*$")


def celsius_from_raw(raw):
    """Convert raw centi-kelvin counts to degrees Celsius."""
    return (np.asarray(raw, dtype=np.float64) - CENTI_KELVIN_OFFSET) / 100.0


def raw_from_celsius(temp):
    """Quantize Celsius to centi-kelvin counts, clipped to the 16-bit range."""
    raw = np.floor(np.asarray(temp, dtype=np.float64) * 100.0
                   + CENTI_KELVIN_OFFSET + 0.5)
    return np.clip(raw, 0, PGM_MAXVAL).astype(np.uint16)


@dataclass(frozen=True, eq=False)
class ThermalFrame:
    """A single radiometric frame: raw counts plus a capture timestamp."""

    width: int
    height: int
    temps: np.ndarray  # shape (height, width), dtype uint16
    timestamp: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame dimensions must be at least 1x1")
        arr = np.ascontiguousarray(self.temps, dtype=np.uint16)
        if arr.shape != (self.height, self.width):
            raise ValueError(
                f"temps shape {arr.shape} does not match "
                f"{self.height}x{self.width}")
        object.__setattr__(self, "temps", arr)

    def temps_celsius(self) -> np.ndarray:
        return celsius_from_raw(self.temps)

    def __eq__(self, other):
        if not isinstance(other, ThermalFrame):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.timestamp == other.timestamp
                and np.array_equal(self.temps, other.temps))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GrayImage:
    """An 8-bit rendering of a frame, for detectors and previews."""

    width: int
    height: int
    pixels: np.ndarray  # shape (height, width), dtype uint8

    def __post_init__(self):
        arr = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if arr.shape != (self.height, self.width):
            raise ValueError("pixel shape does not match declared size")
        object.__setattr__(self, "pixels", arr)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.pixels, other.pixels))

    __hash__ = None


@dataclass(frozen=True)
class TempRange:
    """Fixed Celsius window used to normalize frames to 8 bits."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def from_frame(cls, frame: ThermalFrame) -> "TempRange":
        """Opt-in per-frame min/max window. Flat frames are rejected."""
        t = frame.temps_celsius()
        return cls(float(t.min()), float(t.max()))


@dataclass(frozen=True)
class FrameSequence:
    """Frames ordered by strictly increasing timestamp."""

    frames: tuple[ThermalFrame, ...]
    nominal_period: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        ts = [f.timestamp for f in self.frames]
        for a, b in zip(ts, ts[1:]):
            if b <= a:
                raise SequenceError(
                    f"timestamps must strictly increase, got {a} then {b}")

    def timestamps(self) -> list[int]:
        return [f.timestamp for f in self.frames]

    def __len__(self):
        return len(self.frames)


def decode_frame(data: bytes) -> ThermalFrame:
    """Parse one binary PGM frame from bytes."""
    if not data.startswith(b"P5"):
        raise FrameFormatError("not a binary PGM: missing P5 magic")
    pos = 2
    pos = _skip_space(data, pos, "after magic")
    if data[pos:pos + 1] != b"#":
        raise FrameMetadataError("expected a '# ts=' comment after the magic")
    eol = data.find(b"\n", pos)
    if eol < 0:
        raise FrameFormatError("comment line is not terminated")
    m = _TS_COMMENT.match(data[pos:eol])
    if m is None:
        raise FrameMetadataError(
            f"comment must read '# ts=<integer>', got {data[pos:eol]!r}")
    timestamp = int(m.group(1))
    pos = eol + 1
    width, pos = _read_uint(data, pos, "width")
    height, pos = _read_uint(data, pos, "height")
    maxval, pos = _read_uint(data, pos, "maxval")
    if maxval != PGM_MAXVAL:
        raise FrameFormatError(f"maxval must be {PGM_MAXVAL}, got {maxval}")
    if width < 1 or height < 1:
        raise FrameFormatError(f"bad dimensions {width}x{height}")
    if pos >= len(data) or data[pos] not in b" \t\r\n":
        raise FrameFormatError("missing whitespace before pixel data")
    pos += 1
    payload = data[pos:]
    expected = width * height * 2
    if len(payload) != expected:
        raise FrameTruncationError(
            f"expected {expected} payload bytes for {width}x{height}, "
            f"got {len(payload)}")
    temps = np.frombuffer(payload, dtype=">u2").astype(np.uint16)
    return ThermalFrame(width, height, temps.reshape(height, width), timestamp)


def encode_frame(frame: ThermalFrame) -> bytes:
    """Serialize a frame; decode(encode(f)) == f byte-for-byte."""
    header = (f"P5\n# ts={frame.timestamp}\n"
              f"{frame.width} {frame.height}\n{PGM_MAXVAL}\n").encode("ascii")
    return header + frame.temps.astype(">u2").tobytes()


def _skip_space(data: bytes, pos: int, where: str) -> int:
    start = pos
    while pos < len(data) and data[pos] in b" \t\r\n":
        pos += 1
    if pos == start:
        raise FrameFormatError(f"expected whitespace {where}")
    if pos >= len(data):
        raise FrameFormatError("header ends prematurely")
    return pos


def _read_uint(data: bytes, pos: int, what: str) -> tuple[int, int]:
    while pos < len(data) and data[pos] in b" \t\r\n":
        pos += 1
    start = pos
    while pos < len(data) and data[pos:pos + 1].isdigit():
        pos += 1
    if pos == start:
        raise FrameFormatError(f"missing or non-numeric {what} in header")
    return int(data[start:pos]), pos


def read_frame(path: str) -> ThermalFrame:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FrameIOError(f"cannot read frame {path}: {exc}") from exc
    return decode_frame(data)


def write_frame(path: str, frame: ThermalFrame) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(encode_frame(frame))
    except OSError as exc:
        raise FrameIOError(f"cannot write frame {path}: {exc}") from exc


def normalize(frame: ThermalFrame, window: TempRange) -> GrayImage:
    """Map Celsius values inside the window to 0..255.

    Values are clamped to the window first, then scaled linearly and
    rounded to the nearest integer (halves away from zero), so equal
    raw values always produce equal gray levels.
    """
    t = frame.temps_celsius()
    frac = np.clip((t - window.lo) / (window.hi - window.lo), 0.0, 1.0)
    pixels = np.floor(frac * 255.0 + 0.5).astype(np.uint8)
    return GrayImage(frame.width, frame.height, pixels)


def load_sequence(records: list[ManifestRecord], base_dir: str = ".") -> FrameSequence:
    """Read every manifest frame, check timestamps, sort into a sequence.

    The nominal period is inferred as the most common gap between
    consecutive timestamps (smallest wins a tie); sequences with fewer
    than two frames keep the 10 s default.
    """
    frames = []
    for rec in records:
        path = os.path.join(base_dir, rec.frame)
        frm = read_frame(path)
        if frm.timestamp != rec.ts:
            raise SequenceError(
                f"{rec.frame}: manifest says ts={rec.ts} but the frame "
                f"header says ts={frm.timestamp}")
        frames.append(frm)
    frames.sort(key=lambda f: f.timestamp)
    for a, b in zip(frames, frames[1:]):
        if b.timestamp == a.timestamp:
            raise SequenceError(f"duplicate timestamp {a.timestamp}")
    period = 10.0
    if len(frames) >= 2:
        gaps = Counter(b.timestamp - a.timestamp
                       for a, b in zip(frames, frames[1:]))
        best = max(gaps.values())
        period = float(min(g for g, n in gaps.items() if n == best))
    return FrameSequence(tuple(frames), nominal_period=period)
