"""Anchor frames, triangle meshes over them, and the approximation bound.

The mesh connectivity is computed once on a reference frame (Delaunay) and
repositioned onto later frames so triangle k always corresponds to triangle k.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .geometry import signed_area


@dataclass(frozen=True)
class AnchorFrame:
    """One frame's anchor coordinates plus the raster they live in.

    Anchor order is the correspondence: anchor j of frame i matches anchor j
    of frame i+1.
    """

    index: int
    width: int
    height: int
    anchors: np.ndarray  # (n, 2) float64

    def __post_init__(self) -> None:
        a = np.asarray(self.anchors, dtype=float)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError(f"anchors must be an (n, 2) array, got shape {a.shape}")
        if a.shape[0] < 3:
            raise ValueError("a frame needs at least 3 anchors")
        if not np.isfinite(a).all():
            raise ValueError("anchor coordinates must be finite")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("raster dimensions must be positive")
        if (
            (a[:, 0] < 0).any()
            or (a[:, 0] >= self.width).any()
            or (a[:, 1] < 0).any()
            or (a[:, 1] >= self.height).any()
        ):
            raise ValueError("anchors must lie within [0, width) x [0, height)")
        object.__setattr__(self, "anchors", a)

    @property
    def anchor_count(self) -> int:
        return self.anchors.shape[0]


@dataclass(frozen=True)
class TriMesh:
    """Triangle connectivity (vertex index triples) plus vertex positions."""

    connectivity: np.ndarray  # (K, 3) int
    positions: np.ndarray  # (n, 2) float64

    def __post_init__(self) -> None:
        conn = np.asarray(self.connectivity, dtype=int)
        pos = np.asarray(self.positions, dtype=float)
        if conn.ndim != 2 or conn.shape[1] != 3:
            raise ValueError("connectivity must be a (K, 3) index array")
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        if conn.size and (conn.min() < 0 or conn.max() >= pos.shape[0]):
            raise ValueError("connectivity indexes out of range")
        object.__setattr__(self, "connectivity", conn)
        object.__setattr__(self, "positions", pos)

    @property
    def triangle_count(self) -> int:
        return self.connectivity.shape[0]

    @property
    def vertex_count(self) -> int:
        return self.positions.shape[0]

    def triangle(self, k: int) -> np.ndarray:
        """Vertex coordinates of triangle k as a (3, 2) array."""
        return self.positions[self.connectivity[k]]


def _duplicate_indices(points: np.ndarray) -> list[tuple[int, int]]:
    seen: dict[tuple[float, float], int] = {}
    dups = []
    for i, (x, y) in enumerate(points):
        key = (float(x), float(y))
        if key in seen:
            dups.append((seen[key], i))
        else:
            seen[key] = i
    return dups


def _all_collinear(points: np.ndarray) -> bool:
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return s[1] <= max(s[0], 1.0) * 1e-12


def _canonical_connectivity(simplices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Deterministic triangle list: CCW orientation, min index first, sorted rows."""
    out = np.empty_like(simplices)
    for i, tri in enumerate(simplices):
        if signed_area(points[tri]) < 0:
            tri = tri[[0, 2, 1]]
        roll = int(np.argmin(tri))
        out[i] = np.roll(tri, -roll)
    order = np.lexsort((out[:, 2], out[:, 1], out[:, 0]))
    return out[order]


def triangulate(reference: AnchorFrame) -> TriMesh:
    """Delaunay triangulation of the reference anchors.

    For n anchors in general position with h of them on the convex hull the
    triangle count satisfies K = 2n - 2 - h.
    """
    points = reference.anchors
    dups = _duplicate_indices(points)
    if dups:
        pairs = ", ".join(f"{i}=={j}" for i, j in dups)
        raise ValueError(f"duplicate anchors: {pairs}")
    if _all_collinear(points):
        raise ValueError("anchors are all collinear; triangulation undefined")
    try:
        tri = Delaunay(points)
    except QhullError as exc:  # pragma: no cover - guarded by the checks above
        raise ValueError(f"triangulation failed: {exc}") from exc
    conn = _canonical_connectivity(tri.simplices, points)
    return TriMesh(conn, points.copy())


def reposition(mesh: TriMesh, frame: AnchorFrame) -> TriMesh:
    """Same connectivity over the frame's anchor positions."""
    if frame.anchor_count != mesh.vertex_count:
        raise ValueError(
            f"frame has {frame.anchor_count} anchors but mesh expects {mesh.vertex_count}"
        )
    return TriMesh(mesh.connectivity, frame.anchors)


def mesh_area(mesh: TriMesh) -> float:
    """Total area: sum of |signed area| over all triangles."""
    total = 0.0
    for k in range(mesh.triangle_count):
        total += abs(signed_area(mesh.triangle(k)))
    return total


def longest_side(mesh: TriMesh) -> float:
    """Longest Euclidean edge over all triangles (0.0 for an empty mesh)."""
    if mesh.triangle_count == 0:
        return 0.0
    pts = mesh.positions[mesh.connectivity]  # (K, 3, 2)
    edges = np.concatenate(
        [pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 1], pts[:, 0] - pts[:, 2]]
    )
    return float(np.sqrt((edges * edges).sum(axis=1)).max())


def centroid_subdivide(mesh: TriMesh) -> TriMesh:
    """Split every triangle into three at its centroid (K -> 3K)."""
    n = mesh.vertex_count
    centroids = mesh.positions[mesh.connectivity].mean(axis=1)
    positions = np.vstack([mesh.positions, centroids])
    conn = np.empty((3 * mesh.triangle_count, 3), dtype=int)
    for k, (i, j, l) in enumerate(mesh.connectivity):
        g = n + k
        conn[3 * k] = (i, j, g)
        conn[3 * k + 1] = (j, l, g)
        conn[3 * k + 2] = (l, i, g)
    return TriMesh(conn, positions)


@dataclass(frozen=True)
class BoundReport:
    """Terms of the approximation bound 2*lam/contour_count^2 + longest*area."""

    lam: float
    contour_count: int
    mesh_area: float
    longest_side: float
    term1: float
    term2: float
    bound: float


def evaluate_bound(
    src_mesh: TriMesh, dst_mesh: TriMesh, lam: float, contour_count: int
) -> BoundReport:
    """Evaluate both bound terms for a source/destination mesh pair.

    term1 = 2*lam / contour_count^2 shrinks with more contour anchors;
    term2 = longest_side(dst) * mesh_area(src) shrinks with a finer mesh.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if contour_count < 1:
        raise ValueError("contour_count must be >= 1")
    area = mesh_area(src_mesh)
    longest = longest_side(dst_mesh)
    term1 = 2.0 * lam / float(contour_count) ** 2
    term2 = longest * area
    return BoundReport(
        lam=float(lam),
        contour_count=int(contour_count),
        mesh_area=area,
        longest_side=longest,
        term1=term1,
        term2=term2,
        bound=term1 + term2,
    )


def convex_hull_vertex_count(points) -> int:
    """Number of points on the convex hull of the input set."""
    hull = ConvexHull(np.asarray(points, dtype=float))
    return len(hull.vertices)


def write_mesh(mesh: TriMesh, sink: io.TextIOBase) -> None:
    """Text export: one line `K n`, then K lines of three vertex indices."""
    sink.write(f"{mesh.triangle_count} {mesh.vertex_count}\n")
    for i, j, k in mesh.connectivity:
        sink.write(f"{i} {j} {k}\n")


def read_mesh(source: io.TextIOBase, positions) -> TriMesh:
    """Parse the write_mesh format onto the given vertex positions."""
    header = source.readline().split()
    if len(header) != 2:
        raise ValueError("mesh header must be `K n`")
    k, n = int(header[0]), int(header[1])
    pos = np.asarray(positions, dtype=float)
    if pos.shape[0] != n:
        raise ValueError(f"mesh declares {n} vertices but {pos.shape[0]} positions given")
    conn = np.empty((k, 3), dtype=int)
    for row in range(k):
        parts = source.readline().split()
        if len(parts) != 3:
            raise ValueError(f"mesh row {row} must hold three indices")
        conn[row] = [int(p) for p in parts]
    return TriMesh(conn, pos)
