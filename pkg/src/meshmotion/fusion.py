"""Cross-attention fusion of motion features into image features.

Queries come from the motion branch, keys and values from the image branch.
N heads of scaled dot-product attention run on d = C/N channel slices; the
concatenated head outputs pass through a one-hidden-layer MLP with GELU and
are reshaped back to the spatial grid.  The reverse-mode gradients here are
hand-derived and validated against central finite differences in the tests.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .tensorcore import gelu, gelu_grad, matmul, row_softmax

PARAMS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FusionParams:
    """Per-head projection matrices plus the output MLP."""

    heads: int
    channels: int
    hidden: int
    q: np.ndarray  # (heads, channels, head_dim)
    k: np.ndarray
    v: np.ndarray
    w1: np.ndarray  # (channels, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, channels)
    b2: np.ndarray  # (channels,)

    def __post_init__(self) -> None:
        if self.heads < 1 or self.channels < 1 or self.hidden < 1:
            raise ValueError("heads, channels, and hidden must be positive")
        if self.channels % self.heads != 0:
            raise ValueError(
                f"channels ({self.channels}) must be divisible by heads ({self.heads})"
            )
        d = self.channels // self.heads
        expected = {
            "q": (self.heads, self.channels, d),
            "k": (self.heads, self.channels, d),
            "v": (self.heads, self.channels, d),
            "w1": (self.channels, self.hidden),
            "b1": (self.hidden,),
            "w2": (self.hidden, self.channels),
            "b2": (self.channels,),
        }
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, arr)

    @property
    def head_dim(self) -> int:
        return self.channels // self.heads


@dataclass(frozen=True)
class FusionOutput:
    fused: np.ndarray  # (h, w, channels)
    per_head: tuple[np.ndarray, ...]  # each (tokens, head_dim)


@dataclass(frozen=True)
class FusionGradients:
    xf: np.ndarray
    xm: np.ndarray
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


def _uniform_limit(fan_in: int, fan_out: int) -> float:
    return math.sqrt(6.0 / (fan_in + fan_out))


def init_fusion_params(
    channels: int, heads: int = 16, hidden: int = 512, seed: int = 0
) -> FusionParams:
    """Seeded scaled-uniform initialization (+-sqrt(6/(fan_in+fan_out)))."""
    if channels % heads != 0:
        raise ValueError(f"channels ({channels}) must be divisible by heads ({heads})")
    d = channels // heads
    rng = np.random.default_rng(seed)

    def draw(fan_in, fan_out, shape):
        a = _uniform_limit(fan_in, fan_out)
        return rng.uniform(-a, a, size=shape)

    q = np.empty((heads, channels, d))
    k = np.empty((heads, channels, d))
    v = np.empty((heads, channels, d))
    for n in range(heads):
        q[n] = draw(channels, d, (channels, d))
        k[n] = draw(channels, d, (channels, d))
        v[n] = draw(channels, d, (channels, d))
    w1 = draw(channels, hidden, (channels, hidden))
    b1 = np.zeros(hidden)
    w2 = draw(hidden, channels, (hidden, channels))
    b2 = np.zeros(channels)
    return FusionParams(heads, channels, hidden, q, k, v, w1, b1, w2, b2)


def tokenize(x) -> np.ndarray:
    """Flatten an (h, w, c) feature block to (h*w, c) tokens, row-major."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 3:
        raise ValueError(f"expected an (h, w, c) block, got shape {x.shape}")
    return x.reshape(x.shape[0] * x.shape[1], x.shape[2])


def untokenize(tokens, h: int, w: int) -> np.ndarray:
    """Inverse of tokenize for a known spatial grid."""
    t = np.asarray(tokens, dtype=float)
    if t.ndim != 2 or t.shape[0] != h * w:
        raise ValueError(f"cannot arrange {t.shape} tokens on a {h}x{w} grid")
    return t.reshape(h, w, t.shape[1])


def attention_weights(qtok, ktok, qn, kn) -> np.ndarray:
    """Row-stochastic attention matrix softmax((X Q)(Y K)^T / sqrt(d))."""
    qp = matmul(qtok, qn)
    kp = matmul(ktok, kn)
    d = qn.shape[1]
    return row_softmax(matmul(qp, kp.T) / math.sqrt(d))


def attention_head(qtok, ktok, vtok, qn, kn, vn) -> np.ndarray:
    """One head of cross-attention; queries from qtok, keys/values from ktok/vtok."""
    qtok = np.asarray(qtok, dtype=float)
    ktok = np.asarray(ktok, dtype=float)
    vtok = np.asarray(vtok, dtype=float)
    if qtok.shape[0] != ktok.shape[0] or ktok.shape[0] != vtok.shape[0]:
        raise ValueError("token counts must agree across query/key/value inputs")
    attn = attention_weights(qtok, ktok, qn, kn)
    return matmul(attn, matmul(vtok, vn))


def _check_pair(xf: np.ndarray, xm: np.ndarray, params: FusionParams) -> None:
    if xf.ndim != 3 or xf.shape != xm.shape:
        raise ValueError("feature blocks must be 3-D and share a shape")
    if xf.shape[2] != params.channels:
        raise ValueError(
            f"feature channels ({xf.shape[2]}) must equal params.channels ({params.channels})"
        )


def fusion_forward(xf, xm, params: FusionParams) -> FusionOutput:
    """Fuse image features xf with motion features xm.

    Motion tokens form the queries; image tokens form keys and values.  Head
    outputs are concatenated along channels and projected by the MLP.
    """
    xf = np.asarray(xf, dtype=float)
    xm = np.asarray(xm, dtype=float)
    _check_pair(xf, xm, params)
    h, w, _ = xf.shape
    qt = tokenize(xm)
    kt = tokenize(xf)
    heads = tuple(
        attention_head(qt, kt, kt, params.q[n], params.k[n], params.v[n])
        for n in range(params.heads)
    )
    concat = np.concatenate(heads, axis=1)
    z1 = matmul(concat, params.w1) + params.b1
    out = matmul(gelu(z1), params.w2) + params.b2
    return FusionOutput(untokenize(out, h, w), heads)


def fusion_gradient(xf, xm, params: FusionParams, upstream) -> FusionGradients:
    """Gradients of sum(upstream * fusion_forward(xf, xm)) by reverse mode."""
    xf = np.asarray(xf, dtype=float)
    xm = np.asarray(xm, dtype=float)
    up = np.asarray(upstream, dtype=float)
    _check_pair(xf, xm, params)
    if up.shape != xf.shape:
        raise ValueError("upstream must match the feature block shape")
    n_heads = params.heads
    d = params.head_dim
    scale = 1.0 / math.sqrt(d)

    # Forward pass with caches.
    qt = tokenize(xm)
    kt = tokenize(xf)
    qps, kps, vps, attns, head_outs = [], [], [], [], []
    for n in range(n_heads):
        qp = qt @ params.q[n]
        kp = kt @ params.k[n]
        vp = kt @ params.v[n]
        attn = row_softmax((qp @ kp.T) * scale)
        qps.append(qp)
        kps.append(kp)
        vps.append(vp)
        attns.append(attn)
        head_outs.append(attn @ vp)
    concat = np.concatenate(head_outs, axis=1)
    z1 = concat @ params.w1 + params.b1
    g = gelu(z1)

    # Backward pass.
    d_out = tokenize(up)
    d_w2 = g.T @ d_out
    d_b2 = d_out.sum(axis=0)
    d_g = d_out @ params.w2.T
    d_z1 = d_g * gelu_grad(z1)
    d_w1 = concat.T @ d_z1
    d_b1 = d_z1.sum(axis=0)
    d_concat = d_z1 @ params.w1.T

    d_qt = np.zeros_like(qt)
    d_kt = np.zeros_like(kt)
    d_q = np.zeros_like(params.q)
    d_k = np.zeros_like(params.k)
    d_v = np.zeros_like(params.v)
    for n in range(n_heads):
        d_head = d_concat[:, n * d : (n + 1) * d]
        attn = attns[n]
        d_attn = d_head @ vps[n].T
        d_vp = attn.T @ d_head
        # Softmax Jacobian applied row-wise.
        d_logits = attn * (d_attn - (d_attn * attn).sum(axis=1, keepdims=True))
        d_qp = (d_logits @ kps[n]) * scale
        d_kp = (d_logits.T @ qps[n]) * scale
        d_q[n] = qt.T @ d_qp
        d_k[n] = kt.T @ d_kp
        d_v[n] = kt.T @ d_vp
        d_qt += d_qp @ params.q[n].T
        d_kt += d_kp @ params.k[n].T + d_vp @ params.v[n].T

    h, w, _ = xf.shape
    return FusionGradients(
        xf=untokenize(d_kt, h, w),
        xm=untokenize(d_qt, h, w),
        q=d_q,
        k=d_k,
        v=d_v,
        w1=d_w1,
        b1=d_b1,
        w2=d_w2,
        b2=d_b2,
    )


def save_fusion_params(params: FusionParams, sink) -> None:
    """Flat binary record: version byte, int32 dims, then float64 payload.

    Payload order: q, k, v (per head, row-major), w1, b1, w2, b2; all
    little-endian.
    """
    sink.write(struct.pack("<B", PARAMS_FORMAT_VERSION))
    sink.write(struct.pack("<iii", params.heads, params.channels, params.hidden))
    for arr in (params.q, params.k, params.v, params.w1, params.b1, params.w2, params.b2):
        sink.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_fusion_params(source) -> FusionParams:
    head = source.read(1)
    if len(head) != 1 or head[0] != PARAMS_FORMAT_VERSION:
        raise ValueError("unsupported fusion parameter record")
    dims = source.read(12)
    if len(dims) != 12:
        raise ValueError("truncated fusion parameter record")
    heads, channels, hidden = struct.unpack("<iii", dims)
    if heads < 1 or channels < 1 or hidden < 1 or channels % heads != 0:
        raise ValueError("invalid fusion parameter dimensions")
    d = channels // heads

    def take(shape):
        count = int(np.prod(shape))
        raw = source.read(8 * count)
        if len(raw) != 8 * count:
            raise ValueError("truncated fusion parameter record")
        return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(float)

    q = take((heads, channels, d))
    k = take((heads, channels, d))
    v = take((heads, channels, d))
    w1 = take((channels, hidden))
    b1 = take((hidden,))
    w2 = take((hidden, channels))
    b2 = take((channels,))
    return FusionParams(heads, channels, hidden, q, k, v, w1, b1, w2, b2)
