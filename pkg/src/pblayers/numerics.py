"""Small shared numerical kernels: panel quadrature, Hermite evaluation,
finite differences on nonuniform grids."""

from __future__ import annotations

import numpy as np

# 5-point Gauss-Legendre rule on [-1, 1]
_GL5_X = np.array([
    -0.906179845938663992797626878299,
    -0.538469310105683091036314420700,
    0.0,
    0.538469310105683091036314420700,
    0.906179845938663992797626878299,
])
_GL5_W = np.array([
    0.236926885056189087514264040720,
    0.478628670499366468041291514836,
    0.568888888888888888888888888889,
    0.478628670499366468041291514836,
    0.236926885056189087514264040720,
])


def gauss_panels(a: np.ndarray, b: np.ndarray):
    """Gauss-Legendre nodes/weights for the panels [a_i, b_i].

    Returns (x, w) of shape (len(a), 5); sum(fn(x) * w, axis=1) integrates
    each panel.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _GL5_X[None, :]
    w = half[:, None] * _GL5_W[None, :]
    return x, w


def panel_integrals(fn, a, b):
    """Integral of fn over each panel [a_i, b_i] by 5-point Gauss."""
    x, w = gauss_panels(a, b)
    return np.sum(fn(x.ravel()).reshape(x.shape) * w, axis=1)


def cumulative_panel_integral(fn, nodes):
    """Cumulative integral of fn from nodes[0] along a node sequence."""
    nodes = np.asarray(nodes, dtype=float)
    seg = panel_integrals(fn, nodes[:-1], nodes[1:])
    out = np.empty(nodes.shape, dtype=float)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


def hermite_eval(tq, t, y, dy):
    """Evaluate the piecewise cubic Hermite interpolant of (t, y, dy) at tq.

    Matches values and first derivatives at the nodes exactly.  Returns
    (value, derivative) arrays of tq's shape.  tq must lie inside [t[0], t[-1]].
    """
    tq = np.asarray(tq, dtype=float)
    idx = np.clip(np.searchsorted(t, tq, side="right") - 1, 0, len(t) - 2)
    h = t[idx + 1] - t[idx]
    s = (tq - t[idx]) / h
    y0, y1 = y[idx], y[idx + 1]
    d0, d1 = dy[idx], dy[idx + 1]
    # standard Hermite basis
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    val = h00 * y0 + h * h10 * d0 + h01 * y1 + h * h11 * d1
    dh00 = (6 * s2 - 6 * s) / h
    dh10 = 3 * s2 - 4 * s + 1
    dh01 = (-6 * s2 + 6 * s) / h
    dh11 = 3 * s2 - 2 * s
    der = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1
    return val, der


def second_difference(t, y):
    """Three-point second derivative on a nonuniform grid (interior nodes).

    Exact for quadratics; second order on smoothly graded grids.  Returns an
    array of len(t) - 2 values for nodes 1..n-2.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    hl = t[1:-1] - t[:-2]
    hr = t[2:] - t[1:-1]
    return 2.0 * (hl * y[2:] - (hl + hr) * y[1:-1] + hr * y[:-2]) / (
        hl * hr * (hl + hr)
    )


def stencil_derivative(t, y, order=1, width=5):
    """Derivative at every node by local polynomial fits of `width` points.

    Solves one small Vandermonde system per node (vectorized); fourth-order
    accurate for width=5 on smooth grids.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(t)
    if n < width:
        raise ValueError("grid too short for stencil width")
    half = width // 2
    start = np.clip(np.arange(n) - half, 0, n - width)
    cols = start[:, None] + np.arange(width)[None, :]
    dt = t[cols] - t[:, None]
    # Vandermonde rows: p(dt) = sum c_k dt^k;  c_order * order! is the derivative
    powers = dt[:, :, None] ** np.arange(width)[None, None, :]
    coef = np.linalg.solve(powers, y[cols][:, :, None])[:, :, 0]
    fact = 1.0
    for k in range(2, order + 1):
        fact *= k
    return coef[:, order] * fact


def chebyshev_nodes(n: int, t_max: float):
    """n Chebyshev-extrema nodes on [0, t_max], clustered at both ends."""
    j = np.arange(n, dtype=float)
    return 0.5 * t_max * (1.0 - np.cos(np.pi * j / (n - 1)))


def boundary_clustered_nodes(n: int, t_max: float, blend: float = 0.9):
    """n cosine-graded nodes on [0, t_max], clustered at t = 0 only.

    The cosine map concentrates resolution where the layer curvature lives;
    the uniform blend keeps the minimum spacing at (1-blend)*t_max/(n-1), so
    second differences of sampled values stay above the rounding-noise floor
    and exponentially close tail samples remain distinct doubles.
    """
    xi = np.linspace(0.0, 1.0, n)
    return t_max * ((1.0 - blend) * xi + blend * (1.0 - np.cos(0.5 * np.pi * xi)))
