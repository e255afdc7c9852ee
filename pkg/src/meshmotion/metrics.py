"""Detection and localization metrics: F1, rank AUC, pixel F1/IoU.

Video-level scores are the mean of per-frame probabilities; pixel metrics
are computed per frame and averaged over frames.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata


def f1(tp: int, fp: int, fn: int) -> float:
    """F1 = 2tp / (2tp + fp + fn); 0.0 when the denominator is empty."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def auc(scores: Sequence[tuple[float, int]]) -> float:
    """Probability a random positive outscores a random negative.

    Mann-Whitney rank statistic with ties counting one half.  Raises
    ValueError unless both classes are present.
    """
    probs = np.array([s for s, _ in scores], dtype=float)
    labels = np.array([l for _, l in scores], dtype=int)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(probs)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def pixel_scores(pred, gt, threshold: float = 0.5) -> tuple[float, float]:
    """(F1, IoU) of a predicted probability raster against a binary mask.

    The prediction is binarized at the threshold.  IoU of two empty masks is
    1.0 (a correct rejection); F1 follows the empty-count convention of f1().
    """
    p = np.asarray(pred, dtype=float)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {g.shape}")
    pb = p >= threshold
    gb = g.astype(bool)
    tp = int(np.logical_and(pb, gb).sum())
    fp = int(np.logical_and(pb, ~gb).sum())
    fn = int(np.logical_and(~pb, gb).sum())
    union = tp + fp + fn
    iou = 1.0 if union == 0 else tp / union
    return f1(tp, fp, fn), iou


@dataclass(frozen=True)
class FrameRecord:
    """One evaluated frame: video id, frame probability, masks."""

    video: str
    score: float
    pred_mask: np.ndarray
    gt_mask: np.ndarray


@dataclass(frozen=True)
class VideoSummary:
    video: str
    score: float
    label: int
    p_f1: float
    p_iou: float


@dataclass(frozen=True)
class EvalReport:
    v_f1: float
    v_auc: float
    p_f1: float
    p_iou: float
    videos: tuple[VideoSummary, ...]


def evaluate(
    records: Sequence[FrameRecord],
    labels: Mapping[str, int],
    threshold: float = 0.5,
) -> EvalReport:
    """Aggregate frame records into video- and pixel-level scores.

    Video score is the mean of its frame probabilities; the video is called
    fake when that mean reaches the threshold.  Pixel F1/IoU are averaged
    over all frames; per-video breakdowns average that video's frames.
    """
    if not records:
        raise ValueError("no records to evaluate")
    by_video: dict[str, list[FrameRecord]] = {}
    for rec in records:
        by_video.setdefault(rec.video, []).append(rec)
    missing = sorted(set(by_video) - set(labels))
    if missing:
        raise ValueError(f"missing labels for videos: {', '.join(missing)}")

    summaries = []
    all_f1: list[float] = []
    all_iou: list[float] = []
    for video in sorted(by_video):
        frames = by_video[video]
        score = float(np.mean([f.score for f in frames]))
        per_frame = [pixel_scores(f.pred_mask, f.gt_mask, threshold) for f in frames]
        v_pf1 = float(np.mean([s[0] for s in per_frame]))
        v_piou = float(np.mean([s[1] for s in per_frame]))
        all_f1.extend(s[0] for s in per_frame)
        all_iou.extend(s[1] for s in per_frame)
        summaries.append(VideoSummary(video, score, int(labels[video]), v_pf1, v_piou))

    tp = sum(1 for s in summaries if s.score >= threshold and s.label == 1)
    fp = sum(1 for s in summaries if s.score >= threshold and s.label == 0)
    fn = sum(1 for s in summaries if s.score < threshold and s.label == 1)
    return EvalReport(
        v_f1=f1(tp, fp, fn),
        v_auc=auc([(s.score, s.label) for s in summaries]),
        p_f1=float(np.mean(all_f1)),
        p_iou=float(np.mean(all_iou)),
        videos=tuple(summaries),
    )


def format_report(report: EvalReport) -> str:
    """Stable-order text rendering: summary keys first, then per-video lines."""
    lines = [
        f"v_f1 {report.v_f1:.6f}",
        f"v_auc {report.v_auc:.6f}",
        f"p_f1 {report.p_f1:.6f}",
        f"p_iou {report.p_iou:.6f}",
    ]
    for s in report.videos:
        lines.append(
            f"video {s.video} score {s.score:.6f} label {s.label} "
            f"p_f1 {s.p_f1:.6f} p_iou {s.p_iou:.6f}"
        )
    return "\n".join(lines) + "\n"
