"""meshmotion: piecewise-rigid motion fields from anchor meshes.

Triangulates anchor points, fits a least-squares rigid transform per
corresponded triangle pair, and rasterizes the displacements into dense
motion fields, alongside a toy cross-attention detection pipeline, the
matching evaluation metrics, and the brute-force oracles that verify it all.
"""
from .clipfile import ClipFile, ClipFormatError, parse_clip, read_clip, serialize_clip, write_clip
from .fusion import (
    FusionGradients,
    FusionOutput,
    FusionParams,
    attention_head,
    attention_weights,
    fusion_forward,
    fusion_gradient,
    init_fusion_params,
    load_fusion_params,
    save_fusion_params,
    tokenize,
    untokenize,
)
from .geometry import (
    RigidTransform2D,
    apply_rigid,
    barycentric,
    centralize,
    contains_point,
    cross_covariance,
    estimate_rigid,
    is_degenerate,
    signed_area,
    spd_sqrt_2x2,
)
from .meshing import (
    AnchorFrame,
    BoundReport,
    TriMesh,
    centroid_subdivide,
    convex_hull_vertex_count,
    evaluate_bound,
    longest_side,
    mesh_area,
    read_mesh,
    reposition,
    triangulate,
    write_mesh,
)
from .metrics import EvalReport, FrameRecord, VideoSummary, auc, evaluate, f1, format_report, pixel_scores
from .motionfield import (
    FlowField,
    MotionReport,
    extract_clip_motion,
    extract_motion,
    flow_to_rgb,
    read_flo,
    render_flow_png,
    write_flo,
    write_png,
)
from .pipeline import (
    FaceClip,
    GroundTruth,
    PipelineOutput,
    ToyNets,
    average_pool,
    build_toy_nets,
    clip_label,
    forward_clip,
    joint_loss,
    toy_classify,
    toy_decode,
    toy_encode,
)
from .tensorcore import BCE_EPS, bce, gelu, gelu_grad, matmul, row_softmax

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
