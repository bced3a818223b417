"""Zero-mean shear profiles on the unit channel cross-section.

Built-in profiles are the linear shear alpha(y) = y - 1/2 ("couette") and the
parabolic shear alpha(y) = -2y^2 + 2y - 1/3 ("poiseuille"); both have zero
mean and the same half-channel mean strain rate. Tabulated profiles are
interpolated with a cubic spline and re-centered to zero mean.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .quadrature import Antiderivative, simpson, simpson_fixed

MEAN_TOL = 1e-10
_EDGE_TOL = 1e-9


class FlowError(ValueError):
    pass


class TrivialFlowError(FlowError):
    """Raised when an operation needs a nontrivial flow but alpha == 0."""


@dataclass(frozen=True)
class FlowProfile:
    """A zero-mean shear profile alpha: [0,1] -> R."""

    kind: str
    alpha: Callable[[np.ndarray], np.ndarray]
    dalpha: Optional[Callable[[np.ndarray], np.ndarray]] = None
    n_samples: int = 0
    mean_shift: float = 0.0  # constant subtracted to re-center tabulated data

    def __post_init__(self):
        mean = simpson(self.alpha, 0.0, 1.0)
        if abs(mean) > MEAN_TOL:
            raise FlowError(
                f"profile '{self.kind}' is not mean-free: integral = {mean:.3e}"
            )

    def __call__(self, y):
        return eval_flow(self, y)


@dataclass(frozen=True)
class FlowExtrema:
    alpha_max: float
    y_max: float
    alpha_min: float
    second_derivative_at_max: Optional[float]
    boundary_max: bool
    degenerate: bool = False


@dataclass(frozen=True)
class FlowIntegrals:
    """Tabulated antiderivatives a(y) = int_0^y alpha and phi(y) = int_0^y a."""

    grid: np.ndarray
    a: np.ndarray
    phi: np.ndarray

    @property
    def alpha_tilde(self) -> np.ndarray:
        # same double integral as phi, alternative name used in the
        # homogenized-diffusivity context
        return self.phi

    @property
    def phi_mean(self) -> float:
        return float(np.trapezoid(self.phi, self.grid))


def couette() -> FlowProfile:
    return FlowProfile(
        kind="couette",
        alpha=lambda y: np.asarray(y, dtype=float) - 0.5,
        dalpha=lambda y: np.ones_like(np.asarray(y, dtype=float)),
    )


def poiseuille() -> FlowProfile:
    def f(y):
        y = np.asarray(y, dtype=float)
        return -2.0 * y * y + 2.0 * y - 1.0 / 3.0

    def df(y):
        y = np.asarray(y, dtype=float)
        return -4.0 * y + 2.0

    return FlowProfile(kind="poiseuille", alpha=f, dalpha=df)


def zero_flow() -> FlowProfile:
    return FlowProfile(
        kind="zero",
        alpha=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        dalpha=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
    )


def from_callable(fn: Callable[[np.ndarray], np.ndarray],
                  dfn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                  kind: str = "custom") -> FlowProfile:
    return FlowProfile(kind=kind, alpha=fn, dalpha=dfn)


def tabulated(y: np.ndarray, alpha: np.ndarray) -> FlowProfile:
    """Cubic-spline profile through (y, alpha) samples, re-centered to zero mean."""
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if y.ndim != 1 or y.size < 4:
        raise FlowError("tabulated profile needs at least 4 samples")
    if np.any(np.diff(y) <= 0):
        raise FlowError("tabulated y values must be strictly increasing")
    if y[0] < -_EDGE_TOL or y[-1] > 1 + _EDGE_TOL:
        raise FlowError("tabulated y values must lie in [0, 1]")
    if abs(y[0]) > _EDGE_TOL or abs(y[-1] - 1) > _EDGE_TOL:
        raise FlowError("tabulated profile must cover y = 0 and y = 1")
    spline = CubicSpline(y, alpha)
    shift = float(spline.integrate(0.0, 1.0))
    centered = CubicSpline(y, alpha - shift)
    return FlowProfile(
        kind="tabulated",
        alpha=lambda s: centered(np.asarray(s, dtype=float)),
        dalpha=lambda s: centered(np.asarray(s, dtype=float), 1),
        n_samples=int(y.size),
        mean_shift=shift,
    )


def from_file(path: str) -> FlowProfile:
    """Parse the plain-text flow format:

    comment lines start with '#'; the first data line is ``n <count>``,
    followed by <count> lines of ``<y> <alpha>`` with y strictly increasing.
    """
    tokens: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.split("#", 1)[0].strip()
            if stripped:
                tokens.extend(stripped.split())
    if len(tokens) < 2 or tokens[0] != "n":
        raise FlowError(f"{path}: expected header 'n <count>'")
    try:
        count = int(tokens[1])
    except ValueError as exc:
        raise FlowError(f"{path}: bad sample count {tokens[1]!r}") from exc
    data = tokens[2:]
    if len(data) != 2 * count:
        raise FlowError(
            f"{path}: expected {2 * count} numbers for {count} samples, got {len(data)}"
        )
    try:
        values = np.array(data, dtype=float)
    except ValueError as exc:
        raise FlowError(f"{path}: non-numeric sample data") from exc
    pairs = values.reshape(count, 2)
    return tabulated(pairs[:, 0], pairs[:, 1])


def resolve(name: str) -> FlowProfile:
    """Map a CLI flow argument to a profile: builtin name or a file path."""
    key = name.strip().lower()
    if key == "couette":
        return couette()
    if key == "poiseuille":
        return poiseuille()
    if key in ("zero", "trivial"):
        return zero_flow()
    if os.path.exists(name):
        return from_file(name)
    raise FlowError(f"unknown flow {name!r} (not a builtin and not a file)")


def eval_flow(profile: FlowProfile, y):
    """alpha(y) for y in [0, 1]; raises FlowError outside the channel."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr < -_EDGE_TOL) or np.any(arr > 1 + _EDGE_TOL):
        raise FlowError(f"y = {y} outside the channel [0, 1]")
    val = profile.alpha(np.clip(arr, 0.0, 1.0))
    return float(val) if np.ndim(y) == 0 else np.asarray(val, dtype=float)


def is_trivial(profile: FlowProfile, n_probe: int = 2049, tol: float = 1e-12) -> bool:
    ys = np.linspace(0.0, 1.0, n_probe)
    return bool(np.max(np.abs(profile.alpha(ys))) <= tol)


def flow_extrema(profile: FlowProfile, n_scan: int = 8193) -> FlowExtrema:
    """Locate sup/inf of alpha; the maximum location is refined to ~1e-12.

    Interior maxima additionally report alpha''(y_max); a boundary or
    non-concave maximum is flagged rather than rejected, and downstream
    large-k asymptotics then refuse to emit the sqrt(k) correction term.
    """
    if is_trivial(profile):
        raise TrivialFlowError("trivial flow: alpha == 0 has no signed extrema")
    ys = np.linspace(0.0, 1.0, n_scan)
    vals = np.asarray(profile.alpha(ys), dtype=float)
    i_max = int(np.argmax(vals))
    i_min = int(np.argmin(vals))
    h = ys[1] - ys[0]

    if i_max in (0, n_scan - 1):
        y_max, a_max = float(ys[i_max]), float(vals[i_max])
    else:
        lo, hi = ys[i_max] - h, ys[i_max] + h
        res = minimize_scalar(lambda t: -float(profile.alpha(t)),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        y_max, a_max = float(res.x), float(-res.fun)

    if i_min in (0, n_scan - 1):
        a_min = float(vals[i_min])
    else:
        lo, hi = ys[i_min] - h, ys[i_min] + h
        res = minimize_scalar(lambda t: float(profile.alpha(t)),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        a_min = float(res.fun)

    boundary = y_max < _EDGE_TOL * 10 or y_max > 1 - _EDGE_TOL * 10
    second = None
    degenerate = False
    if not boundary:
        second = _second_derivative(profile, y_max)
        if second > -1e-6:
            degenerate = True
    return FlowExtrema(
        alpha_max=a_max,
        y_max=y_max,
        alpha_min=a_min,
        second_derivative_at_max=second,
        boundary_max=boundary,
        degenerate=degenerate,
    )


def _second_derivative(profile: FlowProfile, y: float, h: float = 1e-4) -> float:
    lo = max(y - h, 0.0)
    hi = min(y + h, 1.0)
    if profile.dalpha is not None:
        return float((profile.dalpha(hi) - profile.dalpha(lo)) / (hi - lo))
    mid = 0.5 * (lo + hi)
    hh = 0.5 * (hi - lo)
    return float((profile.alpha(lo) - 2.0 * profile.alpha(mid) + profile.alpha(hi)) / hh**2)


def flow_integrals(profile: FlowProfile, n_grid: int = 257) -> FlowIntegrals:
    """Tabulate a = int alpha and phi = int a on a uniform grid.

    Node values accumulate per-panel adaptive integrals, so a(1) = 0 holds to
    the quadrature tolerance for any admissible profile.
    """
    if n_grid < 16:
        raise FlowError("n_grid must be at least 16")
    grid = np.linspace(0.0, 1.0, n_grid)
    a_fn = Antiderivative(profile.alpha, 0.0, 1.0)
    a_vals = np.asarray(a_fn(grid))

    def a_array(ys):
        return np.asarray(a_fn(ys))

    phi_vals = np.zeros_like(grid)
    acc = 0.0
    for i in range(1, n_grid):
        acc += simpson(a_array, grid[i - 1], grid[i], n0=2)
        phi_vals[i] = acc
    return FlowIntegrals(grid=grid, a=a_vals, phi=phi_vals)


def effective_delta(profile: FlowProfile) -> float:
    """Shear-dispersion constant Delta = int_0^1 (int_0^y alpha)^2 dy.

    1/120 for the linear builtin, 1/1890 for the parabolic one.
    """
    a_fn = Antiderivative(profile.alpha, 0.0, 1.0)

    def integrand(ys):
        vals = np.asarray(a_fn(ys))
        return vals * vals

    return simpson(integrand, 0.0, 1.0)


def fourier_coeffs(profile: FlowProfile, L: float = 1.0, n_max: int = 64) -> np.ndarray:
    """Cosine coefficients of the channel-rescaled profile on [0, L].

    Returns [alpha_1, ..., alpha_n_max] with
    alpha_n = (2/L) int_0^L alpha(s/L) cos(n pi s / L) ds; after substituting
    s = L y this is 2 int_0^1 alpha(y) cos(n pi y) dy, independent of L.
    """
    if L <= 0:
        raise FlowError("L must be positive")
    if n_max < 1:
        raise FlowError("n_max must be >= 1")
    coeffs = np.empty(n_max)
    for n in range(1, n_max + 1):
        panels = max(1024, 64 * n)
        coeffs[n - 1] = 2.0 * simpson_fixed(
            lambda y, n=n: np.asarray(profile.alpha(y)) * np.cos(n * np.pi * y),
            0.0, 1.0, panels,
        )
    return coeffs
