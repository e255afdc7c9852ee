"""Exact 2-D triangle primitives and per-triangle rigid transform estimation.

Triangles are ``(3, 2)`` float64 arrays of ``(x, y)`` vertex coordinates and
points are length-2 sequences.  Everything here is a pure function; results
are bit-deterministic for identical inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# |signed area| below this marks a triangle degenerate (pixel^2 units).
AREA_EPSILON = 1e-9
# Barycentric slack so points on edges/vertices count as inside.
CONTAINMENT_EPSILON = 1e-9
# Symmetry / eigenvalue tolerance for the matrix square root.
SYM_EPSILON = 1e-8
# Scale-normalized |det H| below which the rigid fit falls back to
# translation-only.
SINGULAR_DET = 1e-12


@dataclass(frozen=True)
class RigidTransform2D:
    """Proper rotation plus translation; ``degenerate`` flags a fallback fit."""

    rotation: np.ndarray  # (2, 2)
    translation: np.ndarray  # (2,)
    degenerate: bool = field(default=False)

    def __post_init__(self) -> None:
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if r.shape != (2, 2) or t.shape != (2,):
            raise ValueError("rigid transform needs a 2x2 rotation and 2-vector translation")
        if not (np.isfinite(r).all() and np.isfinite(t).all()):
            raise ValueError("rigid transform entries must be finite")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)


def as_triangle(t) -> np.ndarray:
    """Coerce input to a (3, 2) float64 vertex array, rejecting non-finite."""
    a = np.asarray(t, dtype=float)
    if a.shape != (3, 2):
        raise ValueError(f"expected 3 vertices of (x, y), got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("triangle vertices must be finite")
    return a


def signed_area(t) -> float:
    """Signed area ((b-a) x (c-a)) / 2; positive for counter-clockwise vertices."""
    a = as_triangle(t)
    ax, ay = a[0]
    bx, by = a[1]
    cx, cy = a[2]
    return ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) / 2.0


def is_degenerate(t) -> bool:
    return abs(signed_area(t)) < AREA_EPSILON


def barycentric(t, p) -> np.ndarray:
    """Barycentric weights of p, summing to 1 with la*a + lb*b + lc*c = p.

    Raises ValueError for degenerate triangles, whose weights are undefined.
    """
    a = as_triangle(t)
    if is_degenerate(a):
        raise ValueError("barycentric coordinates undefined for a degenerate triangle")
    ax, ay = a[0]
    bx, by = a[1]
    cx, cy = a[2]
    px, py = float(p[0]), float(p[1])
    d11 = by - cy
    d12 = cx - bx
    d21 = cy - ay
    d22 = ax - cx
    det = d11 * (ax - cx) + d12 * (ay - cy)
    la = (d11 * (px - cx) + d12 * (py - cy)) / det
    lb = (d21 * (px - cx) + d22 * (py - cy)) / det
    lc = 1.0 - la - lb
    return np.array([la, lb, lc])


def contains_point(t, p) -> bool:
    """True iff all barycentric weights are >= -CONTAINMENT_EPSILON.

    Boundary points count as inside; degenerate triangles contain nothing.
    """
    a = as_triangle(t)
    if is_degenerate(a):
        return False
    la, lb, lc = barycentric(a, p)
    return la >= -CONTAINMENT_EPSILON and lb >= -CONTAINMENT_EPSILON and lc >= -CONTAINMENT_EPSILON


def centralize(t) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the vertex centroid; returns (centered vertices, centroid)."""
    a = as_triangle(t)
    centroid = a.mean(axis=0)
    return a - centroid, centroid


def cross_covariance(src, dst) -> np.ndarray:
    """H = sum_j s_j d_j^T over corresponding centralized vertex pairs.

    Written as explicit sums so that for src == dst the result is bitwise
    symmetric, which downstream makes exactly-identical frames produce an
    exactly-zero motion field.
    """
    s = as_triangle(src)
    d = as_triangle(dst)
    h00 = s[0, 0] * d[0, 0] + s[1, 0] * d[1, 0] + s[2, 0] * d[2, 0]
    h01 = s[0, 0] * d[0, 1] + s[1, 0] * d[1, 1] + s[2, 0] * d[2, 1]
    h10 = s[0, 1] * d[0, 0] + s[1, 1] * d[1, 0] + s[2, 1] * d[2, 0]
    h11 = s[0, 1] * d[0, 1] + s[1, 1] * d[1, 1] + s[2, 1] * d[2, 1]
    return np.array([[h00, h01], [h10, h11]])


def spd_sqrt_2x2(m) -> np.ndarray:
    """Unique symmetric PSD square root of a symmetric PSD 2x2 matrix.

    Closed form via trace and determinant: sqrt(M) = (M + sqrt(det M) I) / t
    with t = sqrt(trace M + 2 sqrt(det M)).  Raises ValueError when the input
    is not symmetric within SYM_EPSILON or has an eigenvalue below
    -SYM_EPSILON.
    """
    a = np.asarray(m, dtype=float)
    if a.shape != (2, 2) or not np.isfinite(a).all():
        raise ValueError("expected a finite 2x2 matrix")
    if abs(a[0, 1] - a[1, 0]) > SYM_EPSILON:
        raise ValueError("matrix is not symmetric")
    m00 = a[0, 0]
    m11 = a[1, 1]
    m01 = 0.5 * (a[0, 1] + a[1, 0])
    trace = m00 + m11
    det = m00 * m11 - m01 * m01
    lam_min = 0.5 * trace - math.hypot(0.5 * (m00 - m11), m01)
    if lam_min < -SYM_EPSILON:
        raise ValueError("matrix has a negative eigenvalue")
    s = math.sqrt(max(det, 0.0))
    t2 = trace + 2.0 * s
    if t2 <= 0.0:
        return np.zeros((2, 2))
    t = math.sqrt(t2)
    out = np.array([[m00 + s, m01], [m01, m11 + s]]) / t
    return out


def _fallback(src_centroid: np.ndarray, dst_centroid: np.ndarray) -> RigidTransform2D:
    return RigidTransform2D(np.eye(2), dst_centroid - src_centroid, degenerate=True)


def estimate_rigid(src, dst) -> RigidTransform2D:
    """Least-squares rigid transform mapping src vertices toward dst.

    The rotation is the proper-rotation polar factor of the vertex
    cross-covariance, (H^T H)^(1/2) H^(-1), with the reflection case
    corrected to the optimal proper rotation.  In 2-D that factor has a
    closed form: the rotation by (c, s) = (h00 + h11, h01 - h10) normalized,
    which is evaluated directly (it also makes identical src/dst reproduce
    the exact identity).  The translation moves the rotated src centroid
    onto the dst centroid.  Degenerate src or (near-)singular H falls back
    to translation-only with degenerate=True.
    """
    sbar, cs = centralize(src)
    dbar, cd = centralize(dst)
    ns2 = float((sbar * sbar).sum())
    nd2 = float((dbar * dbar).sum())
    if ns2 <= 0.0 or nd2 <= 0.0:
        return _fallback(cs, cd)
    h = cross_covariance(sbar, dbar)
    det_h = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    if abs(det_h) < SINGULAR_DET * ns2 * nd2:
        return _fallback(cs, cd)
    alpha = h[0, 0] + h[1, 1]
    beta = h[0, 1] - h[1, 0]
    norm = math.hypot(alpha, beta)
    if norm == 0.0:
        # Exact reflection shape: every proper rotation scores equally, so
        # the identity is as optimal as any; geometry is not degenerate.
        c, s = 1.0, 0.0
    else:
        c = alpha / norm
        s = beta / norm
    r = np.array([[c, -s], [s, c]])
    o = np.array(
        [
            cd[0] - (c * cs[0] - s * cs[1]),
            cd[1] - (s * cs[0] + c * cs[1]),
        ]
    )
    return RigidTransform2D(r, o)


def apply_rigid(transform: RigidTransform2D, p) -> np.ndarray:
    """R p + O for a single point."""
    r = transform.rotation
    o = transform.translation
    x, y = float(p[0]), float(p[1])
    return np.array(
        [
            r[0, 0] * x + r[0, 1] * y + o[0],
            r[1, 0] * x + r[1, 1] * y + o[1],
        ]
    )
