"""Dense piecewise-rigid motion fields, Middlebury .flo I/O, and rendering.

Motion is defined as x - A(x): the displacement from a pixel to its rigidly
transformed image, sampled at integer pixel centers.  Pixels outside every
triangle get (0, 0).  Pixels on shared edges belong to the lowest triangle
index, which makes the raster independent of evaluation order.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from matplotlib.colors import hsv_to_rgb
from PIL import Image

from .geometry import CONTAINMENT_EPSILON, estimate_rigid, is_degenerate
from .meshing import AnchorFrame, TriMesh, triangulate

FLO_MAGIC = 202021.25  # little-endian float32 spelling "PIEH"


@dataclass(frozen=True)
class FlowField:
    """Dense two-channel displacement raster (u horizontal, v vertical)."""

    u: np.ndarray  # (height, width)
    v: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u)
        v = np.asarray(self.v)
        if u.ndim != 2 or u.shape != v.shape:
            raise ValueError("u and v must be 2-D rasters of identical shape")
        if u.size and not (np.isfinite(u).all() and np.isfinite(v).all()):
            raise ValueError("flow values must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]


@dataclass(frozen=True)
class MotionReport:
    field: FlowField
    covered_pixels: int
    degenerate_triangles: tuple[int, ...]


def extract_motion(src: AnchorFrame, dst: AnchorFrame, mesh: TriMesh) -> MotionReport:
    """Rasterize per-triangle rigid transforms into a dense motion field.

    Triangle k takes its vertex positions from src/dst anchors through the
    mesh connectivity; its transform is the least-squares rigid fit.  A pixel
    inside triangle k (lowest k wins on shared edges) gets x - A_k(x).
    """
    if src.anchor_count != dst.anchor_count or src.anchor_count != mesh.vertex_count:
        raise ValueError("src, dst, and mesh must agree on the anchor count")
    if (src.width, src.height) != (dst.width, dst.height):
        raise ValueError("src and dst raster dimensions must match")
    h, w = src.height, src.width
    u = np.zeros((h, w))
    v = np.zeros((h, w))
    claimed = np.zeros((h, w), dtype=bool)
    degenerate: list[int] = []
    for k in range(mesh.triangle_count):
        idx = mesh.connectivity[k]
        s_tri = src.anchors[idx]
        d_tri = dst.anchors[idx]
        transform = estimate_rigid(s_tri, d_tri)
        if transform.degenerate:
            degenerate.append(k)
        if is_degenerate(s_tri):
            continue  # zero-area source triangle claims no pixels
        ax, ay = s_tri[0]
        bx, by = s_tri[1]
        cx, cy = s_tri[2]
        x0 = max(0, int(np.floor(min(ax, bx, cx))) - 1)
        x1 = min(w - 1, int(np.ceil(max(ax, bx, cx))) + 1)
        y0 = max(0, int(np.floor(min(ay, by, cy))) - 1)
        y1 = min(h - 1, int(np.ceil(max(ay, by, cy))) + 1)
        if x0 > x1 or y0 > y1:
            continue
        px = np.arange(x0, x1 + 1, dtype=float)[None, :]
        py = np.arange(y0, y1 + 1, dtype=float)[:, None]
        # Same barycentric arithmetic as geometry.barycentric, vectorized, so
        # containment decisions match the scalar path bit for bit.
        d11 = by - cy
        d12 = cx - bx
        d21 = cy - ay
        d22 = ax - cx
        det = d11 * (ax - cx) + d12 * (ay - cy)
        la = (d11 * (px - cx) + d12 * (py - cy)) / det
        lb = (d21 * (px - cx) + d22 * (py - cy)) / det
        lc = 1.0 - la - lb
        inside = (
            (la >= -CONTAINMENT_EPSILON)
            & (lb >= -CONTAINMENT_EPSILON)
            & (lc >= -CONTAINMENT_EPSILON)
        )
        window = np.s_[y0 : y1 + 1, x0 : x1 + 1]
        take = inside & ~claimed[window]
        r = transform.rotation
        o = transform.translation
        # Mirrors geometry.apply_rigid term for term.
        mu = px - (r[0, 0] * px + r[0, 1] * py + o[0])
        mv = py - (r[1, 0] * px + r[1, 1] * py + o[1])
        u[window][take] = mu[take]
        v[window][take] = mv[take]
        claimed[window] |= take
    field = FlowField(u, v)
    return MotionReport(field, int(claimed.sum()), tuple(degenerate))


def extract_clip_motion(frames: list[AnchorFrame]) -> list[MotionReport]:
    """Motion for every adjacent frame pair; connectivity comes from frame 0."""
    if len(frames) < 2:
        raise ValueError("a clip needs at least 2 frames")
    first = frames[0]
    for f in frames[1:]:
        if f.anchor_count != first.anchor_count:
            raise ValueError("all frames must carry the same anchor count")
        if (f.width, f.height) != (first.width, first.height):
            raise ValueError("all frames must share raster dimensions")
    mesh = triangulate(first)
    return [extract_motion(frames[i], frames[i + 1], mesh) for i in range(len(frames) - 1)]


def write_flo(field: FlowField, sink) -> None:
    """Middlebury format: float32 202021.25, int32 width, int32 height, then
    row-major interleaved (u, v) float32 pairs, all little-endian.

    Values are rounded to 32-bit exactly once, here at the file boundary.
    """
    sink.write(struct.pack("<fii", FLO_MAGIC, field.width, field.height))
    if field.width and field.height:
        data = np.empty((field.height, field.width, 2), dtype="<f4")
        data[..., 0] = field.u
        data[..., 1] = field.v
        sink.write(data.tobytes())


def read_flo(source) -> FlowField:
    """Inverse of write_flo; the returned rasters keep float32 precision."""
    header = source.read(4)
    if len(header) < 4 or struct.unpack("<f", header)[0] != FLO_MAGIC:
        raise ValueError("not a flow file (bad magic)")
    dims = source.read(8)
    if len(dims) < 8:
        raise ValueError("not a flow file (truncated header)")
    w, h = struct.unpack("<ii", dims)
    if w < 0 or h < 0:
        raise ValueError(f"not a flow file (invalid dimensions {w}x{h})")
    expected = 2 * 4 * w * h
    payload = source.read(expected)
    if len(payload) != expected:
        raise ValueError(
            f"truncated flow payload: expected {expected} bytes, got {len(payload)}"
        )
    if w == 0 or h == 0:
        return FlowField(np.zeros((h, w), dtype=np.float32), np.zeros((h, w), dtype=np.float32))
    data = np.frombuffer(payload, dtype="<f4").reshape(h, w, 2)
    return FlowField(data[..., 0].copy(), data[..., 1].copy())


def flow_to_rgb(field: FlowField, max_magnitude: float | None = None) -> np.ndarray:
    """Color-circle rendering: hue from direction, brightness from magnitude.

    max_magnitude=None auto-scales to the field's own maximum; an all-zero
    field renders black.
    """
    u = np.asarray(field.u, dtype=float)
    v = np.asarray(field.v, dtype=float)
    mag = np.hypot(u, v)
    if max_magnitude is None:
        scale = float(mag.max()) if mag.size else 0.0
    else:
        if max_magnitude <= 0:
            raise ValueError("max_magnitude must be positive")
        scale = float(max_magnitude)
    hue = np.mod(np.arctan2(v, u), 2.0 * np.pi) / (2.0 * np.pi)
    value = np.zeros_like(mag) if scale == 0.0 else np.minimum(1.0, mag / scale)
    hsv = np.stack([hue, np.ones_like(hue), value], axis=-1)
    rgb = hsv_to_rgb(hsv)
    return np.rint(rgb * 255.0).astype(np.uint8)


def write_png(image: np.ndarray, path) -> None:
    """Save a uint8 grayscale (h, w) or RGB (h, w, 3) array as PNG."""
    Image.fromarray(image).save(path, format="PNG")


def render_flow_png(field: FlowField, path, max_magnitude: float | None = None) -> None:
    write_png(flow_to_rgb(field, max_magnitude), path)
