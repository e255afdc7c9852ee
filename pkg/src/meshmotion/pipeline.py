"""Desk-scale detection/localization pipeline around the fusion module.

The encoders, decoder, and classifier are deliberately tiny stand-ins with
seeded fixed weights: average pooling plus dense projections.  They keep
every interface shape honest so the fusion module and the joint loss are
exercised exactly as in the full design; only the fusion module carries
validated gradients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .fusion import FusionParams, fusion_forward
from .meshing import AnchorFrame, triangulate
from .motionfield import extract_motion
from .tensorcore import bce, gelu

DEFAULT_PATCH = 32
DEFAULT_CHANNELS = 32


@dataclass(frozen=True)
class FaceClip:
    """Aligned face frames plus their per-frame anchors."""

    frames: tuple[np.ndarray, ...]  # each (H, W, 3), values in [0, 1]
    anchors: tuple[AnchorFrame, ...]

    def __post_init__(self) -> None:
        frames = tuple(np.asarray(f, dtype=float) for f in self.frames)
        if len(frames) != len(self.anchors):
            raise ValueError("frame count must equal anchor frame count")
        if not frames:
            raise ValueError("clip is empty")
        shape = frames[0].shape
        for f in frames:
            if f.ndim != 3 or f.shape[2] != 3 or f.shape != shape:
                raise ValueError("frames must all be (H, W, 3) with equal dims")
            if f.min() < 0.0 or f.max() > 1.0:
                raise ValueError("frame values must lie in [0, 1]")
        for a in self.anchors:
            if (a.height, a.width) != shape[:2]:
                raise ValueError("anchor raster dims must match the frames")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "anchors", tuple(self.anchors))

    @property
    def frame_count(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class PipelineOutput:
    localization: np.ndarray  # (H, W) probabilities
    score: float


@dataclass(frozen=True)
class GroundTruth:
    mask: np.ndarray  # (H, W) binary
    label: int

    def __post_init__(self) -> None:
        m = np.asarray(self.mask)
        if m.ndim != 2:
            raise ValueError("mask must be 2-D")
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        object.__setattr__(self, "mask", m.astype(float))


@dataclass(frozen=True)
class ToyNets:
    """Seeded fixed weights for the toy encoder/decoder/classifier."""

    patch: int
    channels: int
    rgb_proj: np.ndarray  # (3, channels)
    motion_proj: np.ndarray  # (2, channels)
    decode_w: np.ndarray  # (channels,)
    decode_b: float
    cls_w1: np.ndarray  # (channels, hidden)
    cls_b1: np.ndarray  # (hidden,)
    cls_w2: np.ndarray  # (hidden,)
    cls_b2: float


def build_toy_nets(
    seed: int,
    patch: int = DEFAULT_PATCH,
    channels: int = DEFAULT_CHANNELS,
    classifier_hidden: int = 64,
) -> ToyNets:
    """Draw all toy weights from one seeded generator, in a fixed order."""
    rng = np.random.default_rng(seed)

    def draw(fan_in, fan_out, shape):
        a = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, size=shape)

    return ToyNets(
        patch=patch,
        channels=channels,
        rgb_proj=draw(3, channels, (3, channels)),
        motion_proj=draw(2, channels, (2, channels)),
        decode_w=draw(channels, 1, (channels,)),
        decode_b=0.0,
        cls_w1=draw(channels, classifier_hidden, (channels, classifier_hidden)),
        cls_b1=np.zeros(classifier_hidden),
        cls_w2=draw(classifier_hidden, 1, (classifier_hidden,)),
        cls_b2=0.0,
    )


def average_pool(raster, patch: int) -> np.ndarray:
    """Mean over non-overlapping patch x patch blocks of an (H, W, C) raster."""
    x = np.asarray(raster, dtype=float)
    if x.ndim != 3:
        raise ValueError("expected an (H, W, C) raster")
    h, w, c = x.shape
    if h % patch or w % patch:
        raise ValueError(f"raster dims {h}x{w} not divisible by patch size {patch}")
    return x.reshape(h // patch, patch, w // patch, patch, c).mean(axis=(1, 3))


def toy_encode(raster, projection, patch: int) -> np.ndarray:
    """Patch-average the raster, then project channels with a dense matrix."""
    pooled = average_pool(raster, patch)
    proj = np.asarray(projection, dtype=float)
    if proj.ndim != 2 or proj.shape[0] != pooled.shape[2]:
        raise ValueError("projection rows must match raster channels")
    return pooled @ proj


def toy_decode(features, weights, bias: float, patch: int) -> np.ndarray:
    """Collapse channels, upsample by the patch factor, squash to [0, 1]."""
    x = np.asarray(features, dtype=float)
    logits = x @ np.asarray(weights, dtype=float) + bias
    up = np.repeat(np.repeat(logits, patch, axis=0), patch, axis=1)
    return expit(up)


def toy_classify(features, w1, b1, w2, b2: float) -> float:
    """Global average pooling, one GELU hidden layer, logistic probability."""
    x = np.asarray(features, dtype=float)
    pooled = x.mean(axis=(0, 1))
    hidden = gelu(pooled @ np.asarray(w1, dtype=float) + b1)
    return float(expit(hidden @ np.asarray(w2, dtype=float) + b2))


def joint_loss(out: PipelineOutput, gt: GroundTruth) -> float:
    """Negated BCE of the score plus the per-pixel mean; always >= 0."""
    loc = np.asarray(out.localization, dtype=float)
    if loc.shape != gt.mask.shape:
        raise ValueError(f"localization {loc.shape} does not match mask {gt.mask.shape}")
    cls_term = bce(out.score, gt.label)
    pix_term = bce(loc, gt.mask).mean()
    return float(-cls_term - pix_term)


def forward_clip(
    clip: FaceClip,
    params: FusionParams,
    seed: int,
    patch: int = DEFAULT_PATCH,
) -> list[PipelineOutput]:
    """Run every adjacent frame pair through motion, fusion, and heads.

    Pair i uses frame i's pixels and the motion from frame i to i+1; the
    motion raster is scaled by 1/patch before encoding to keep magnitudes
    order-1.
    """
    if clip.frame_count < 2:
        raise ValueError("a clip needs at least 2 frames")
    nets = build_toy_nets(seed, patch=patch, channels=params.channels)
    mesh = triangulate(clip.anchors[0])
    outputs = []
    for i in range(clip.frame_count - 1):
        report = extract_motion(clip.anchors[i], clip.anchors[i + 1], mesh)
        motion = np.stack([report.field.u, report.field.v], axis=-1) / patch
        xf = toy_encode(clip.frames[i], nets.rgb_proj, patch)
        xm = toy_encode(motion, nets.motion_proj, patch)
        xa = fusion_forward(xf, xm, params).fused
        loc = toy_decode(xa, nets.decode_w, nets.decode_b, patch)
        score = toy_classify(xa, nets.cls_w1, nets.cls_b1, nets.cls_w2, nets.cls_b2)
        outputs.append(PipelineOutput(loc, score))
    return outputs


def clip_label(masks: Sequence[np.ndarray]) -> int:
    """Video-level label: 1 iff any frame mask is nonempty."""
    return int(any(np.asarray(m).astype(bool).any() for m in masks))
