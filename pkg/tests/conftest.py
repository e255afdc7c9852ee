"""Shared test helpers: independent brute-force geometry references.

These deliberately avoid the library's own code paths (and scipy) so they
can serve as oracles for hull counts, hull areas, and the Delaunay property.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def hull_indices(points) -> list[int]:
    """Andrew's monotone chain; strict turns only, so collinear boundary
    points are not counted as hull vertices.  Returns CCW order."""
    pts = np.asarray(points, dtype=float)
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))

    def cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (
            pts[a, 1] - pts[o, 1]
        ) * (pts[b, 0] - pts[o, 0])

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def shoelace_area(points) -> float:
    """Polygon area from ordered vertices."""
    pts = np.asarray(points, dtype=float)
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def hull_area(points) -> float:
    idx = hull_indices(points)
    return shoelace_area(np.asarray(points, dtype=float)[idx])


def point_in_hull(points, p, tol: float = 1e-9) -> bool:
    """Half-plane containment against the CCW hull of the point set."""
    pts = np.asarray(points, dtype=float)
    idx = hull_indices(points)
    for a, b in zip(idx, idx[1:] + idx[:1]):
        ax, ay = pts[a]
        bx, by = pts[b]
        if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) < -tol:
            return False
    return True


def in_circumcircle(a, b, c, p) -> float:
    """Incircle determinant; positive when p is strictly inside the
    circumcircle of CCW triangle (a, b, c)."""
    m = np.array(
        [
            [a[0] - p[0], a[1] - p[1], (a[0] - p[0]) ** 2 + (a[1] - p[1]) ** 2],
            [b[0] - p[0], b[1] - p[1], (b[0] - p[0]) ** 2 + (b[1] - p[1]) ** 2],
            [c[0] - p[0], c[1] - p[1], (c[0] - p[0]) ** 2 + (c[1] - p[1]) ** 2],
        ]
    )
    return float(np.linalg.det(m))


def random_triangle(rng, scale: float = 10.0, min_area: float = 0.5) -> np.ndarray:
    """A uniformly drawn triangle rejected until it is comfortably non-thin."""
    while True:
        t = rng.uniform(0.0, scale, (3, 2))
        area = abs(
            (t[1, 0] - t[0, 0]) * (t[2, 1] - t[0, 1])
            - (t[1, 1] - t[0, 1]) * (t[2, 0] - t[0, 0])
        ) / 2.0
        if area >= min_area:
            return t


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def angle_of(rotation: np.ndarray) -> float:
    return float(np.arctan2(rotation[1, 0], rotation[0, 0]))


def angle_distance(a: float, b: float) -> float:
    """Shortest circular distance between two angles."""
    d = (a - b) % (2.0 * np.pi)
    return min(d, 2.0 * np.pi - d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240619)
