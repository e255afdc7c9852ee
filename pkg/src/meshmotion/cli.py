"""Batch command-line surface over the library.

Subcommands: mesh, motion, viz, bound, fa-check, pipeline, metrics.  Every
command is idempotent: unchanged inputs produce byte-identical outputs.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image

from . import fusion, metrics, oracles
from .clipfile import ClipFile, read_clip
from .meshing import convex_hull_vertex_count, evaluate_bound, reposition, triangulate, write_mesh
from .motionfield import extract_clip_motion, read_flo, render_flow_png, write_flo, write_png
from .pipeline import DEFAULT_CHANNELS, DEFAULT_PATCH, FaceClip, forward_clip


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_mesh(args) -> int:
    try:
        clip = read_clip(args.landmarks)
        mesh = triangulate(clip.frames[0])
        hull = convex_hull_vertex_count(clip.frames[0].anchors)
        with open(args.out, "w", encoding="ascii") as f:
            write_mesh(mesh, f)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(f"K {mesh.triangle_count} n {mesh.vertex_count} hull {hull}")
    if args.expect_k is not None and mesh.triangle_count != args.expect_k:
        print(
            f"warning: emergent K={mesh.triangle_count} differs from expected K={args.expect_k}",
            file=sys.stderr,
        )
    return 0


def cmd_motion(args) -> int:
    try:
        clip = read_clip(args.landmarks)
        reports = extract_clip_motion(list(clip.frames))
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, report in enumerate(reports):
            with open(out / f"motion_{i:06d}.flo", "wb") as f:
                write_flo(report.field, f)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    for i, report in enumerate(reports):
        total = report.field.width * report.field.height
        print(f"pair {i:06d} covered {report.covered_pixels}/{total}")
        if report.degenerate_triangles:
            ids = " ".join(str(k) for k in report.degenerate_triangles)
            print(f"warning: pair {i:06d} degenerate triangles: {ids}", file=sys.stderr)
    return 0


def cmd_viz(args) -> int:
    if args.max_mag == "auto":
        max_mag = None
    else:
        try:
            max_mag = float(args.max_mag)
        except ValueError:
            return _fail(f"--max-mag must be a number or 'auto', got {args.max_mag!r}")
    try:
        with open(args.flo, "rb") as f:
            field = read_flo(f)
        render_flow_png(field, args.out, max_mag)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    return 0


def cmd_bound(args) -> int:
    try:
        clip = read_clip(args.landmarks)
        mesh = triangulate(clip.frames[0])
        contour = args.contour_count if args.contour_count is not None else clip.anchor_count
        lines = [f"bound lambda {args.lam:.10g} contour_count {contour} pairs {len(clip.frames) - 1}"]
        for i in range(len(clip.frames) - 1):
            src_mesh = reposition(mesh, clip.frames[i])
            dst_mesh = reposition(mesh, clip.frames[i + 1])
            rep = evaluate_bound(src_mesh, dst_mesh, args.lam, contour)
            lines.append(
                f"pair {i:06d} mesh_area {rep.mesh_area:.10g} longest_side {rep.longest_side:.10g} "
                f"term1 {rep.term1:.10g} term2 {rep.term2:.10g} bound {rep.bound:.10g}"
            )
        with open(args.report, "w", encoding="ascii") as f:
            f.write("\n".join(lines) + "\n")
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(lines[0])
    return 0


def _parse_shape(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise ValueError(f"--shape must look like HxWxC, got {text!r}")
    h, w, c = (int(p) for p in parts)
    if h < 1 or w < 1 or c < 1:
        raise ValueError("shape dimensions must be positive")
    return h, w, c


def cmd_fa_check(args) -> int:
    try:
        h, w, c = _parse_shape(args.shape)
    except ValueError as exc:
        return _fail(str(exc))
    if c % args.heads != 0:
        return _fail(f"channels ({c}) must be divisible by heads ({args.heads})")
    rng = np.random.default_rng(args.seed)
    params = fusion.init_fusion_params(c, heads=args.heads, hidden=args.hidden, seed=args.seed)
    xf = rng.standard_normal((h, w, c))
    xm = rng.standard_normal((h, w, c))
    ok = True

    def report(name: str, passed: bool, detail: str) -> None:
        nonlocal ok
        ok = ok and passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    out = fusion.fusion_forward(xf, xm, params)
    report("shape", out.fused.shape == (h, w, c), f"output {out.fused.shape} for input {(h, w, c)}")

    qt = fusion.tokenize(xm)
    kt = fusion.tokenize(xf)
    worst_row = 0.0
    for n in range(params.heads):
        attn = fusion.attention_weights(qt, kt, params.q[n], params.k[n])
        worst_row = max(worst_row, float(np.abs(attn.sum(axis=1) - 1.0).max()))
    report("softmax-rows", worst_row <= 1e-12, f"max |row sum - 1| = {worst_row:.3e}")

    naive = oracles.naive_fusion(xf, xm, params)
    diff = float(np.abs(out.fused - naive).max())
    report("oracle-equivalence", diff <= 1e-10, f"max |fast - naive| = {diff:.3e}")

    upstream = rng.standard_normal((h, w, c))
    grads = fusion.fusion_gradient(xf, xm, params, upstream)
    worst_rel = _max_grad_error(xf, xm, params, upstream, grads)
    report("finite-difference", worst_rel < 1e-4, f"max relative error = {worst_rel:.3e}")

    if args.params_out:
        with open(args.params_out, "wb") as f:
            fusion.save_fusion_params(params, f)
    return 0 if ok else 1


def _max_grad_error(xf, xm, params, upstream, grads) -> float:
    """Compare analytic gradients to central differences over every input."""

    def loss_for(name):
        if name == "xf":
            return lambda a: float((upstream * fusion.fusion_forward(a, xm, params).fused).sum())
        if name == "xm":
            return lambda a: float((upstream * fusion.fusion_forward(xf, a, params).fused).sum())
        return lambda a: float(
            (upstream * fusion.fusion_forward(xf, xm, replace(params, **{name: a})).fused).sum()
        )

    worst = 0.0
    for name in ("xf", "xm", "q", "k", "v", "w1", "b1", "w2", "b2"):
        point = xf if name == "xf" else xm if name == "xm" else getattr(params, name)
        numeric = oracles.finite_diff(loss_for(name), np.asarray(point, dtype=float), 1e-5)
        analytic = getattr(grads, name)
        rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1.0)
        worst = max(worst, float(rel.max()))
    return worst


def _read_frame_png(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=float)
    return arr / 255.0


def cmd_pipeline(args) -> int:
    try:
        clip = read_clip(args.landmarks)
        frames_dir = Path(args.frames)
        rasters = []
        for frame in clip.frames:
            path = frames_dir / f"frame_{frame.index:06d}.png"
            if not path.exists():
                return _fail(f"missing frame raster {path}")
            raster = _read_frame_png(path)
            if raster.shape[:2] != (clip.height, clip.width):
                return _fail(
                    f"{path} is {raster.shape[1]}x{raster.shape[0]}, clip declares "
                    f"{clip.width}x{clip.height}"
                )
            rasters.append(raster)
        face_clip = FaceClip(tuple(rasters), clip.frames)
        if args.fa_params:
            with open(args.fa_params, "rb") as f:
                params = fusion.load_fusion_params(f)
        else:
            params = fusion.init_fusion_params(
                args.channels, heads=args.heads, hidden=args.hidden, seed=args.seed
            )
        outputs = forward_clip(face_clip, params, args.seed, patch=args.patch)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        score_lines = []
        for i, result in enumerate(outputs):
            gray = np.rint(result.localization * 255.0).astype(np.uint8)
            write_png(gray, out / f"loc_{i:06d}.png")
            score_lines.append(f"{i:06d} {result.score:.10f}")
        (out / "scores.txt").write_text("\n".join(score_lines) + "\n", encoding="ascii")
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    for line in score_lines:
        print(line)
    return 0


def _read_gray(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=float)


def cmd_metrics(args) -> int:
    try:
        pred_root = Path(args.pred)
        gt_root = Path(args.gt)
        videos = sorted(p.name for p in pred_root.iterdir() if p.is_dir())
        if not videos:
            return _fail(f"no video directories under {pred_root}")
        records = []
        labels = {}
        for video in videos:
            gt_dir = gt_root / video
            if not gt_dir.is_dir():
                return _fail(f"prediction video {video} has no ground-truth directory")
            labels[video] = int((gt_dir / "label.txt").read_text().strip())
            scores_path = pred_root / video / "scores.txt"
            for line in scores_path.read_text().strip().splitlines():
                idx_s, score_s = line.split()
                idx = int(idx_s)
                pred_mask = _read_gray(pred_root / video / f"loc_{idx:06d}.png") / 255.0
                gt_mask = _read_gray(gt_dir / f"mask_{idx:06d}.png") >= 128.0
                records.append(
                    metrics.FrameRecord(video, float(score_s), pred_mask, gt_mask)
                )
        report = metrics.evaluate(records, labels)
        text = metrics.format_report(report)
        with open(args.report, "w", encoding="ascii") as f:
            f.write(text)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshmotion",
        description="Anchor-mesh motion fields, fusion checks, and forensic metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="triangulate a clip's reference frame")
    p.add_argument("--landmarks", required=True, help="anchor clip file")
    p.add_argument("--out", required=True, help="mesh connectivity output path")
    p.add_argument("--expect-k", type=int, default=None, help="warn if emergent K differs")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("motion", help="extract per-pair motion fields")
    p.add_argument("--landmarks", required=True)
    p.add_argument("--out", required=True, help="directory for motion_%%06d.flo files")
    p.set_defaults(func=cmd_motion)

    p = sub.add_parser("viz", help="render a .flo file to a color PNG")
    p.add_argument("--flo", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-mag", default="auto", help="magnitude mapped to full brightness, or 'auto'")
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("bound", help="evaluate the approximation bound per frame pair")
    p.add_argument("--landmarks", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="bound constant (no default exists)")
    p.add_argument("--contour-count", type=int, default=None, help="contour anchor count (default: all anchors)")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("fa-check", help="self-check the fusion attention module")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", default="4x4x8", help="feature block as HxWxC")
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--params-out", default=None, help="optionally dump the seeded parameters")
    p.set_defaults(func=cmd_fa_check)

    p = sub.add_parser("pipeline", help="run the toy detection/localization pipeline")
    p.add_argument("--frames", required=True, help="directory of frame_%%06d.png rasters")
    p.add_argument("--landmarks", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--patch", type=int, default=DEFAULT_PATCH)
    p.add_argument("--channels", type=int, default=DEFAULT_CHANNELS)
    p.add_argument("--heads", type=int, default=16)
    p.add_argument("--hidden", type=int, default=512)
    p.add_argument("--fa-params", default=None, help="load fusion parameters instead of seeding")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("metrics", help="score predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
