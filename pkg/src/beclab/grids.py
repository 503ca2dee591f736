"""One-dimensional meshes and the finite-difference stencils shared by
every assembly in the package.

Graded grids use a sinh map: with u uniform on [0, 1], nodes are placed at
x(u) = c + A*sinh(beta*(u - u_c)). The map clusters nodes around the
declared center while bounding the spacing quotient of adjacent cells by
exp(beta/(n-1)), so a user-facing `ratio` translates directly into the map
strength beta = (n-1)*log(ratio).

Derivatives are second-order three-point stencils: for a node with
neighbours, the derivative of the local interpolating quadratic; at the two
boundary nodes, the same quadratic evaluated one-sidedly. On smoothly
graded meshes (spacing varying by O(h) between cells) the second-difference
stencil retains second-order accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RATIO_CAP",
    "Uniform",
    "Graded",
    "Grid",
    "make_grid",
    "beta_for_half_window",
    "beta_for_center_spacing",
    "ratio_from_beta",
    "differentiate",
    "second_difference_weights",
    "first_difference_weights",
    "edge_first_weights",
]

# Hard bound on the adjacent-cell spacing quotient of graded grids.
RATIO_CAP = 1.2


@dataclass(frozen=True)
class Uniform:
    """Equally spaced nodes."""


@dataclass(frozen=True)
class Graded:
    """Sinh-graded spacing, finest at ``center``.

    ``ratio`` is the bound on the spacing quotient of adjacent cells and
    must lie in (1, RATIO_CAP].
    """

    center: float
    ratio: float


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    grading: Uniform | Graded

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)


def _sinh_nodes(a: float, b: float, n: int, center: float, beta: float) -> np.ndarray:
    # Solve for the map parameters so that x(0)=a, x(1)=b, x(u_c)=center.
    # The center equation reduces to a one-dimensional root find for u_c.
    u = np.linspace(0.0, 1.0, n)
    if abs((center - a) - (b - center)) <= 1e-14 * (b - a):
        u_c = 0.5
    else:
        lo, hi = 0.0, 1.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            g = (center - a) * math.sinh(beta * (1.0 - mid)) - (b - center) * math.sinh(
                beta * mid
            )
            if g > 0.0:
                lo = mid
            else:
                hi = mid
        u_c = 0.5 * (lo + hi)
    amp = (b - center) / math.sinh(beta * (1.0 - u_c))
    nodes = center + amp * np.sinh(beta * (u - u_c))
    nodes[0] = a
    nodes[-1] = b
    return nodes


def make_grid(a: float, b: float, n: int, grading: Uniform | Graded = Uniform()) -> Grid:
    """Build a grid on [a, b] with n nodes.

    Raises ValueError for a >= b, n < 16, or a grading descriptor violating
    its constraints (center outside (a, b), ratio outside (1, RATIO_CAP]).
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if n < 16:
        raise ValueError(f"need n >= 16, got n={n}")
    if isinstance(grading, Uniform):
        nodes = np.linspace(a, b, n)
    elif isinstance(grading, Graded):
        if not (a < grading.center < b):
            raise ValueError(f"grading center {grading.center} outside ({a}, {b})")
        if not (1.0 < grading.ratio <= RATIO_CAP + 1e-12):
            raise ValueError(
                f"grading ratio {grading.ratio} outside (1, {RATIO_CAP}]"
            )
        beta = (n - 1) * math.log(grading.ratio)
        if beta > 50.0:
            raise ValueError(
                f"grading too strong: beta={beta:.1f} would degenerate the map"
            )
        nodes = _sinh_nodes(a, b, n, grading.center, beta)
    else:
        raise ValueError(f"unknown grading descriptor {grading!r}")
    if not np.all(np.diff(nodes) > 0.0):
        raise ValueError("grid construction produced non-increasing nodes")
    return Grid(nodes=nodes, grading=grading)


def beta_for_half_window(length: float, half_width: float) -> float:
    """Map strength that puts half the nodes of a symmetric grid on
    [-length, length] inside |x| <= half_width.

    The middle half of the u-interval maps to |x| <= A*sinh(beta/4); setting
    that equal to half_width gives cosh(beta/4) = length/(2*half_width).
    Returns 0 when the window already covers half the domain or more.
    """
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    arg = length / (2.0 * half_width)
    if arg <= 1.0:
        return 0.0
    return 4.0 * math.acosh(arg)


def beta_for_center_spacing(length: float, n: int, h_center: float) -> float:
    """Map strength giving center spacing ~ h_center on a symmetric grid
    [-length, length] with n nodes.

    Solves length*beta / (sinh(beta/2)*(n-1)) = h_center for beta
    (monotone decreasing left side). Returns 0 when the uniform spacing is
    already at or below the target.
    """
    if h_center <= 0.0:
        raise ValueError("h_center must be positive")
    if 2.0 * length / (n - 1) <= h_center:
        return 0.0

    def center_h(beta: float) -> float:
        return length * beta / (math.sinh(0.5 * beta) * (n - 1))

    lo, hi = 1e-8, 60.0
    if center_h(hi) > h_center:
        return hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if center_h(mid) > h_center:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ratio_from_beta(beta: float, n: int) -> float:
    """Adjacent-cell ratio of the sinh map, capped at RATIO_CAP."""
    return min(math.exp(beta / (n - 1)), RATIO_CAP)


def _lagrange3_first(x0, x1, x2, at):
    # Derivative at `at` of the quadratic through x0, x1, x2 (array-capable).
    w0 = (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2))
    w1 = (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2))
    w2 = (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1))
    return w0, w1, w2


def first_difference_weights(grid: Grid):
    """Interior first-derivative weights (w_lo, w_mid, w_hi), index k=1..n-2."""
    x = grid.nodes
    return _lagrange3_first(x[:-2], x[1:-1], x[2:], x[1:-1])


def second_difference_weights(grid: Grid):
    """Interior second-derivative weights (w_lo, w_mid, w_hi), index k=1..n-2."""
    x = grid.nodes
    x0, x1, x2 = x[:-2], x[1:-1], x[2:]
    w0 = 2.0 / ((x0 - x1) * (x0 - x2))
    w1 = 2.0 / ((x1 - x0) * (x1 - x2))
    w2 = 2.0 / ((x2 - x0) * (x2 - x1))
    return w0, w1, w2


def edge_first_weights(x0: float, x1: float, x2: float):
    """One-sided first-derivative weights at x0 from nodes x0, x1, x2."""
    return _lagrange3_first(x0, x1, x2, x0)


def differentiate(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Nodal first derivative, second order everywhere (one-sided at ends)."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.nodes.shape:
        raise ValueError("values and grid node counts differ")
    x = grid.nodes
    out = np.empty_like(values)
    w0, w1, w2 = first_difference_weights(grid)
    out[1:-1] = w0 * values[:-2] + w1 * values[1:-1] + w2 * values[2:]
    wl = edge_first_weights(x[0], x[1], x[2])
    out[0] = wl[0] * values[0] + wl[1] * values[1] + wl[2] * values[2]
    wr = edge_first_weights(x[-1], x[-2], x[-3])
    out[-1] = wr[0] * values[-1] + wr[1] * values[-2] + wr[2] * values[-3]
    return out
