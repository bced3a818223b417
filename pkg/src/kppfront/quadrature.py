"""Composite Simpson quadrature with panel doubling.

All flow-derived integrals in this package run through these routines so
that every quantity carries the same, certified quadrature error
(<1e-12 absolute or <1e-10 relative between successive refinements).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

ABS_TOL = 1e-12
REL_TOL = 1e-10


class QuadratureError(RuntimeError):
    pass


def simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
            abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL,
            n0: int = 8, max_doublings: int = 22) -> float:
    """Integrate f over [a, b], doubling the panel count until converged.

    f must accept a numpy array of nodes and return the values array.
    """
    if b == a:
        return 0.0
    n = n0
    prev = _simpson_fixed(f, a, b, n)
    for _ in range(max_doublings):
        n *= 2
        cur = _simpson_fixed(f, a, b, n)
        if abs(cur - prev) <= max(abs_tol, rel_tol * abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(
        f"Simpson rule did not converge on [{a}, {b}] after {max_doublings} doublings"
    )


def _simpson_fixed(f, a: float, b: float, n: int) -> float:
    """Composite Simpson with n panels (n even by construction)."""
    x = np.linspace(a, b, 2 * n + 1)
    y = np.asarray(f(x), dtype=float)
    h = (b - a) / (2 * n)
    return (h / 3.0) * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def simpson_fixed(f, a: float, b: float, panels: int) -> float:
    """Fixed-panel composite Simpson, for oscillatory integrands where the
    caller scales the panel count with the oscillation frequency."""
    return _simpson_fixed(f, a, b, panels)


def cumulative(f: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
               abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> np.ndarray:
    """Antiderivative of f at the given grid nodes, F[i] = int_{grid[0]}^{grid[i]} f.

    Each panel is integrated adaptively, then accumulated, so node values do
    not inherit a global O(h^2) composite error.
    """
    grid = np.asarray(grid, dtype=float)
    out = np.zeros_like(grid)
    acc = 0.0
    for i in range(1, grid.size):
        acc += simpson(f, grid[i - 1], grid[i], abs_tol=abs_tol, rel_tol=rel_tol, n0=2)
        out[i] = acc
    return out


class Antiderivative:
    """Callable F(y) = int_{lo}^{y} f, backed by a cached node table.

    Evaluation adds an adaptive panel integral from the nearest cached node,
    keeping each call cheap while preserving the quadrature tolerance.
    """

    def __init__(self, f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 n_cache: int = 256):
        self._f = f
        self._lo = lo
        self._hi = hi
        self._nodes = np.linspace(lo, hi, n_cache + 1)
        self._values = cumulative(f, self._nodes)

    def __call__(self, y):
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(ys)
        for idx, yy in enumerate(ys):
            j = int(np.clip(np.searchsorted(self._nodes, yy, side="right") - 1,
                            0, self._nodes.size - 2))
            base = self._values[j]
            out[idx] = base + (simpson(self._f, self._nodes[j], yy, n0=2)
                               if yy != self._nodes[j] else 0.0)
        return out if np.ndim(y) else float(out[0])
