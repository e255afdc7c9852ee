"""Synthetic face-like fixtures: a 68-anchor layout, clips, frames, masks.

These exist so the library can be exercised end to end without any real
detector or video: the anchor layout mimics the usual 68-landmark scheme
(jawline, brows, nose, eyes, mouth) and clips move it smoothly over time.
"""
from __future__ import annotations

import numpy as np

from .clipfile import ClipFile
from .meshing import AnchorFrame


def canonical_face_anchors(width: int = 512, height: int = 512) -> np.ndarray:
    """A 68-point landmark-style layout scaled to the raster, jittered into
    general position with a fixed seed."""
    pts: list[tuple[float, float]] = []
    cx, cy = 0.5, 0.46

    # Jawline: 17 points on an open ellipse through the chin.
    phi = np.linspace(np.pi - 0.35, 2 * np.pi + 0.35, 17)
    for p in phi:
        pts.append((cx + 0.34 * np.cos(p), cy - 0.40 * np.sin(p)))
    # Brows: 5 points each, arched.
    for side in (-1.0, 1.0):
        xs = np.linspace(0.13, 0.30, 5) * side
        for i, x in enumerate(xs if side > 0 else xs[::-1]):
            arch = 0.018 * np.sin(np.pi * (i + 0.5) / 5)
            pts.append((cx + x, cy - 0.155 - arch))
    # Nose bridge: 4 points down the midline.
    for i in range(4):
        pts.append((cx, cy - 0.10 + 0.05 * i))
    # Nostril row: 5 points in a shallow arc under the nose.
    for i, x in enumerate(np.linspace(-0.055, 0.055, 5)):
        pts.append((cx + x, cy + 0.085 + 0.012 * np.sin(np.pi * (i + 0.5) / 5)))
    # Eyes: 6 points each on small ellipses.
    for side in (-1.0, 1.0):
        ex = cx + 0.185 * side
        ey = cy - 0.095
        for ang in np.linspace(0.0, 2 * np.pi, 6, endpoint=False):
            pts.append((ex + 0.055 * np.cos(ang), ey - 0.028 * np.sin(ang)))
    # Mouth: 12 outer + 8 inner points on ellipses.
    for ang in np.linspace(0.0, 2 * np.pi, 12, endpoint=False):
        pts.append((cx + 0.11 * np.cos(ang), cy + 0.22 - 0.055 * np.sin(ang)))
    for ang in np.linspace(0.0, 2 * np.pi, 8, endpoint=False):
        pts.append((cx + 0.065 * np.cos(ang), cy + 0.22 - 0.028 * np.sin(ang)))

    anchors = np.array(pts)
    rng = np.random.default_rng(981127)
    anchors += rng.uniform(-0.002, 0.002, size=anchors.shape)
    anchors[:, 0] *= width
    anchors[:, 1] *= height
    return anchors


def make_clip(
    clip_id: str,
    n_frames: int,
    width: int = 512,
    height: int = 512,
    seed: int = 0,
    drift: tuple[float, float] = (0.6, 0.25),
    wiggle: float = 1.2,
) -> ClipFile:
    """A clip whose anchors drift globally and wiggle smoothly per anchor."""
    base = canonical_face_anchors(width, height)
    rng = np.random.default_rng(seed)
    amp = rng.uniform(0.3, 1.0, size=base.shape) * wiggle
    phase = rng.uniform(0.0, 2 * np.pi, size=base.shape)
    frames = []
    for i in range(n_frames):
        t = 2 * np.pi * i / max(n_frames, 2)
        offset = np.array(drift) * i + amp * np.sin(t + phase)
        coords = np.clip(base + offset, 0.5, [width - 1.5, height - 1.5])
        frames.append(AnchorFrame(i, width, height, coords))
    return ClipFile(clip_id, tuple(frames))


def render_frames(clip: ClipFile, seed: int = 0) -> list[np.ndarray]:
    """Smooth deterministic RGB rasters for each frame of a clip."""
    rng = np.random.default_rng(seed)
    freq = rng.uniform(0.02, 0.08, size=(3, 2))
    phase = rng.uniform(0.0, 2 * np.pi, size=3)
    h, w = clip.height, clip.width
    ys, xs = np.mgrid[0:h, 0:w]
    frames = []
    for i, _ in enumerate(clip.frames):
        channels = [
            0.5 + 0.5 * np.sin(freq[c, 0] * xs + freq[c, 1] * ys + phase[c] + 0.3 * i)
            for c in range(3)
        ]
        frames.append(np.clip(np.stack(channels, axis=-1), 0.0, 1.0))
    return frames


def rectangle_mask(height: int, width: int, top: int, left: int, h: int, w: int) -> np.ndarray:
    """Binary mask with a filled rectangle; handy as synthetic ground truth."""
    m = np.zeros((height, width))
    m[top : top + h, left : left + w] = 1.0
    return m
