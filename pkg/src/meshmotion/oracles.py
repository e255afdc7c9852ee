"""Brute-force reference implementations used by the tests.

Deliberately slow and simple: exhaustive scans and scalar loops that restate
the definitions directly.  They duplicate primitive arithmetic instead of
reusing the vectorized code paths they exist to check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import AREA_EPSILON, CONTAINMENT_EPSILON, RigidTransform2D, estimate_rigid
from .meshing import AnchorFrame, TriMesh
from .motionfield import FlowField


@dataclass(frozen=True)
class OracleConfig:
    angle_resolution: float = 1e-5  # radians between scanned rotation angles

    def __post_init__(self) -> None:
        if self.angle_resolution <= 0:
            raise ValueError("angle_resolution must be positive")


_TRIG_CACHE: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _angle_grid(resolution: float) -> tuple[np.ndarray, np.ndarray]:
    cached = _TRIG_CACHE.get(resolution)
    if cached is None:
        angles = np.arange(0.0, 2.0 * math.pi, resolution)
        cached = (np.cos(angles), np.sin(angles))
        _TRIG_CACHE[resolution] = cached
    return cached


def vertex_residual(transform: RigidTransform2D, src, dst) -> float:
    """Sum of squared vertex errors of dst - (R src + O)."""
    r = transform.rotation
    o = transform.translation
    total = 0.0
    for (sx, sy), (dx, dy) in zip(np.asarray(src, dtype=float), np.asarray(dst, dtype=float)):
        ex = r[0, 0] * sx + r[0, 1] * sy + o[0] - dx
        ey = r[1, 0] * sx + r[1, 1] * sy + o[1] - dy
        total += ex * ex + ey * ey
    return total


def rigid_grid_search(src, dst, config: OracleConfig = OracleConfig()) -> RigidTransform2D:
    """Exhaustive rotation-angle scan with centroid-difference translation.

    Every angle on the [0, 2*pi) grid is scored by the summed squared vertex
    error after matching centroids; the best grid angle wins (first index on
    ties).
    """
    s = np.asarray(src, dtype=float)
    d = np.asarray(dst, dtype=float)
    cs = s.mean(axis=0)
    cd = d.mean(axis=0)
    sb = s - cs
    db = d - cd
    cos_g, sin_g = _angle_grid(config.angle_resolution)
    # Scratch buffers keep the exhaustive scan memory-bound, not
    # allocation-bound; the arithmetic is still one residual per grid angle.
    total = np.zeros_like(cos_g)
    t1 = np.empty_like(cos_g)
    t2 = np.empty_like(cos_g)
    for (sx, sy), (dx, dy) in zip(sb, db):
        np.multiply(cos_g, sx, out=t1)
        np.multiply(sin_g, sy, out=t2)
        np.subtract(t1, t2, out=t1)
        t1 -= dx
        np.multiply(t1, t1, out=t1)
        np.add(total, t1, out=total)
        np.multiply(sin_g, sx, out=t1)
        np.multiply(cos_g, sy, out=t2)
        np.add(t1, t2, out=t1)
        t1 -= dy
        np.multiply(t1, t1, out=t1)
        np.add(total, t1, out=total)
    best = int(np.argmin(total))
    theta = best * config.angle_resolution
    c, s_ = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s_], [s_, c]])
    return RigidTransform2D(rot, cd - rot @ cs)


def per_pixel_motion_oracle(src: AnchorFrame, dst: AnchorFrame, mesh: TriMesh) -> FlowField:
    """Naive motion extraction: per pixel, test triangles in index order.

    The first triangle containing the pixel supplies its rigid transform and
    the motion value x - A(x); uncontained pixels stay (0, 0).
    """
    h, w = src.height, src.width
    u = np.zeros((h, w))
    v = np.zeros((h, w))
    coeffs = []
    for k in range(mesh.triangle_count):
        idx = mesh.connectivity[k]
        s_tri = src.anchors[idx]
        d_tri = dst.anchors[idx]
        ax, ay = float(s_tri[0, 0]), float(s_tri[0, 1])
        bx, by = float(s_tri[1, 0]), float(s_tri[1, 1])
        cx, cy = float(s_tri[2, 0]), float(s_tri[2, 1])
        area = ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) / 2.0
        if abs(area) < AREA_EPSILON:
            continue  # degenerate triangles contain nothing
        t = estimate_rigid(s_tri, d_tri)
        r = t.rotation
        o = t.translation
        d11 = by - cy
        d12 = cx - bx
        d21 = cy - ay
        d22 = ax - cx
        det = d11 * (ax - cx) + d12 * (ay - cy)
        coeffs.append(
            (
                cx,
                cy,
                d11,
                d12,
                d21,
                d22,
                det,
                float(r[0, 0]),
                float(r[0, 1]),
                float(r[1, 0]),
                float(r[1, 1]),
                float(o[0]),
                float(o[1]),
            )
        )
    eps = CONTAINMENT_EPSILON
    for y in range(h):
        py = float(y)
        for x in range(w):
            px = float(x)
            for cx, cy, d11, d12, d21, d22, det, r00, r01, r10, r11, o0, o1 in coeffs:
                la = (d11 * (px - cx) + d12 * (py - cy)) / det
                if la < -eps:
                    continue
                lb = (d21 * (px - cx) + d22 * (py - cy)) / det
                if lb < -eps:
                    continue
                if 1.0 - la - lb < -eps:
                    continue
                u[y, x] = px - (r00 * px + r01 * py + o0)
                v[y, x] = py - (r10 * px + r11 * py + o1)
                break
    return FlowField(u, v)


def naive_attention(qtok, ktok, vtok, qn, kn, vn) -> np.ndarray:
    """Scalar-loop scaled dot-product attention (projection, logits, softmax,
    weighted sum)."""
    qtok = np.asarray(qtok, dtype=float)
    ktok = np.asarray(ktok, dtype=float)
    vtok = np.asarray(vtok, dtype=float)
    qn = np.asarray(qn, dtype=float)
    kn = np.asarray(kn, dtype=float)
    vn = np.asarray(vn, dtype=float)
    if qtok.shape[1] != qn.shape[0] or ktok.shape[1] != kn.shape[0] or vtok.shape[1] != vn.shape[0]:
        raise ValueError("projection shapes do not match token channels")
    if qtok.shape[0] != ktok.shape[0] or ktok.shape[0] != vtok.shape[0]:
        raise ValueError("token counts must agree")
    t = qtok.shape[0]
    d = qn.shape[1]

    def project(tokens, weights):
        rows, cols = tokens.shape[0], weights.shape[1]
        out = [[0.0] * cols for _ in range(rows)]
        for i in range(rows):
            for j in range(cols):
                acc = 0.0
                for m in range(tokens.shape[1]):
                    acc += tokens[i, m] * weights[m, j]
                out[i][j] = acc
        return out

    qp = project(qtok, qn)
    kp = project(ktok, kn)
    vp = project(vtok, vn)
    scale = 1.0 / math.sqrt(d)
    result = np.zeros((t, d))
    for i in range(t):
        logits = []
        for j in range(t):
            acc = 0.0
            for m in range(d):
                acc += qp[i][m] * kp[j][m]
            logits.append(acc * scale)
        peak = max(logits)
        weights = [math.exp(z - peak) for z in logits]
        norm = sum(weights)
        for j in range(t):
            wj = weights[j] / norm
            for m in range(d):
                result[i, m] += wj * vp[j][m]
    return result


def naive_fusion(xf, xm, params) -> np.ndarray:
    """Scalar-loop composition of the whole fusion mapping.

    Tokenization, per-head naive attention, channel concatenation, and the
    GELU MLP are all restated with explicit loops.
    """
    xf = np.asarray(xf, dtype=float)
    xm = np.asarray(xm, dtype=float)
    h, w, c = xf.shape
    t = h * w
    qt = np.zeros((t, c))
    kt = np.zeros((t, c))
    for i in range(h):
        for j in range(w):
            for m in range(c):
                qt[i * w + j, m] = xm[i, j, m]
                kt[i * w + j, m] = xf[i, j, m]
    d = c // params.heads
    concat = np.zeros((t, c))
    for n in range(params.heads):
        head = naive_attention(qt, kt, kt, params.q[n], params.k[n], params.v[n])
        for i in range(t):
            for m in range(d):
                concat[i, n * d + m] = head[i, m]
    hidden = params.w1.shape[1]
    out = np.zeros((h, w, c))
    sqrt2 = math.sqrt(2.0)
    for i in range(t):
        acts = []
        for j in range(hidden):
            z = params.b1[j]
            for m in range(c):
                z += concat[i, m] * params.w1[m, j]
            acts.append(z * 0.5 * (1.0 + math.erf(z / sqrt2)))
        for m in range(c):
            z = params.b2[m]
            for j in range(hidden):
                z += acts[j] * params.w2[j, m]
            out[i // w, i % w, m] = z
    return out


def finite_diff(func, point: np.ndarray, step: float) -> np.ndarray:
    """Central-difference gradient estimate of a scalar function."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.array(point, dtype=float)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        fp = func(x)
        flat[i] = orig - step
        fm = func(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * step)
    return grad
