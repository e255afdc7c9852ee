"""Minimal dense numeric kernels: matmul, row softmax, GELU, and BCE.

Thin, shape-checked wrappers over numpy; everything computes in float64.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

# Probabilities are clamped into [BCE_EPS, 1 - BCE_EPS] before taking logs.
BCE_EPS = 1e-7

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def matmul(a, b) -> np.ndarray:
    """Matrix product of two 2-D arrays with an explicit shape check."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def row_softmax(a) -> np.ndarray:
    """Numerically stable softmax over each row; rows sum to 1."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("row_softmax expects a 2-D array")
    shifted = a - a.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def gelu(x):
    """Exact GELU x * Phi(x) using the Gaussian error function."""
    x = np.asarray(x, dtype=float)
    return x * 0.5 * (1.0 + erf(x / _SQRT2))


def gelu_grad(x):
    """d/dx of gelu: Phi(x) + x * phi(x)."""
    x = np.asarray(x, dtype=float)
    phi = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return 0.5 * (1.0 + erf(x / _SQRT2)) + x * phi


def bce(x, y):
    """Binary cross-entropy term y log x + (1-y) log(1-x); non-positive.

    x is clamped into [BCE_EPS, 1 - BCE_EPS] so saturated predictions stay
    finite.  Works elementwise on arrays.
    """
    x = np.clip(np.asarray(x, dtype=float), BCE_EPS, 1.0 - BCE_EPS)
    y = np.asarray(y, dtype=float)
    return y * np.log(x) + (1.0 - y) * np.log(1.0 - x)
