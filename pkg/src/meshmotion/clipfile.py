"""Line-oriented anchor clip files.

Format:
    clip <id> <n_frames> <n_anchors> <width> <height>
    frame <index> <x0> <y0> <x1> <y1> ...      (one line per frame)

Coordinates are written with shortest round-trip float formatting, so a
parse/serialize cycle is lossless.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .meshing import AnchorFrame


class ClipFormatError(ValueError):
    """Parse failure carrying the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ClipFile:
    clip_id: str
    frames: tuple[AnchorFrame, ...]

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValueError("clip holds no frames")
        first = self.frames[0]
        prev = None
        for f in self.frames:
            if f.anchor_count != first.anchor_count:
                raise ValueError("anchor count varies across frames")
            if (f.width, f.height) != (first.width, first.height):
                raise ValueError("raster dimensions vary across frames")
            if prev is not None and f.index <= prev:
                raise ValueError("frame indices must be strictly increasing")
            prev = f.index
        object.__setattr__(self, "frames", tuple(self.frames))

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def anchor_count(self) -> int:
        return self.frames[0].anchor_count


def parse_clip(text: str) -> ClipFile:
    lines = text.splitlines()
    if not lines:
        raise ClipFormatError(1, "empty clip file")
    header = lines[0].split()
    if len(header) != 6 or header[0] != "clip":
        raise ClipFormatError(1, "header must be `clip <id> <n_frames> <n_anchors> <width> <height>`")
    clip_id = header[1]
    try:
        n_frames, n_anchors, width, height = (int(h) for h in header[2:])
    except ValueError as exc:
        raise ClipFormatError(1, f"non-integer header field: {exc}") from None
    frames = []
    body = [(i + 2, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != n_frames:
        raise ClipFormatError(1, f"header declares {n_frames} frames, file has {len(body)}")
    for line_no, line in body:
        parts = line.split()
        if not parts or parts[0] != "frame":
            raise ClipFormatError(line_no, "frame lines must start with `frame <index>`")
        if len(parts) != 2 + 2 * n_anchors:
            raise ClipFormatError(
                line_no,
                f"expected {2 * n_anchors} coordinates after the index, got {len(parts) - 2}",
            )
        try:
            index = int(parts[1])
        except ValueError:
            raise ClipFormatError(line_no, f"bad frame index {parts[1]!r}") from None
        try:
            coords = np.array([float(p) for p in parts[2:]]).reshape(n_anchors, 2)
        except ValueError as exc:
            raise ClipFormatError(line_no, f"bad coordinate: {exc}") from None
        try:
            frames.append(AnchorFrame(index, width, height, coords))
        except ValueError as exc:
            raise ClipFormatError(line_no, str(exc)) from None
    try:
        return ClipFile(clip_id, tuple(frames))
    except ValueError as exc:
        raise ClipFormatError(1, str(exc)) from None


def read_clip(path) -> ClipFile:
    with open(path, "r", encoding="ascii") as f:
        return parse_clip(f.read())


def serialize_clip(clip: ClipFile) -> str:
    lines = [
        f"clip {clip.clip_id} {len(clip.frames)} {clip.anchor_count} "
        f"{clip.width} {clip.height}"
    ]
    for frame in clip.frames:
        coords = " ".join(repr(float(c)) for c in frame.anchors.ravel())
        lines.append(f"frame {frame.index} {coords}")
    return "\n".join(lines) + "\n"


def write_clip(clip: ClipFile, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(serialize_clip(clip))
