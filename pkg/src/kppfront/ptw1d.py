"""Advectionless cut-off front: speed v*(u_c) and profile U(xi).

The wave solves U'' + v U' + f_c(U) = 0 with U(-inf) = 1, U(inf) = 0 and
U(0) = u_c. For xi >= 0 the cut-off makes the solution exactly
u_c exp(-v xi); the xi <= 0 side is integrated leftward from the matching
data U(0) = u_c, U'(0) = -v u_c, and bisection on v isolates the unique
speed at which the trajectory connects to the reacted state (1, 0).

Low trial speeds make U' turn back before the reacted state is reached, high
ones overshoot U = 1; the outcome flips exactly at v*, so bisection converges
at its nominal rate however closely any single trajectory skirts the saddle.
The integrators are compiled kernels: an adaptive embedded 4(5) scheme with
event-based termination for classification, and a fine fixed-step RK4 pass
for the stored profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.interpolate import CubicSpline

from .reaction import ReactionSpec, require_valid

OVERSHOOT_TOL = 1e-6
BALL_RADIUS = 1e-8

_OUT_NONE, _OUT_OVERSHOOT, _OUT_TURN, _OUT_BALL = 0, 1, 2, 3


class ShootingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Ptw1dSolution:
    v_star: float
    xi: np.ndarray          # nonpositive grid, xi[0] most negative, xi[-1] = 0
    u: np.ndarray           # U(xi) on that grid
    u_c: float
    fprime_at_one: float
    shooting_residual: float  # distance of the stored trajectory from (1, 0)
    bracket: float            # final bisection interval width
    lambda_plus: float

    def tail(self, xi):
        return self.u_c * np.exp(-self.v_star * np.asarray(xi, dtype=float))


def decay_rate_lambda_plus(v: float, fprime_at_one: float) -> float:
    """Decay exponent of 1 - U toward the reacted state."""
    if fprime_at_one >= 0:
        raise ValueError("fprime_at_one must be negative")
    q = abs(fprime_at_one)
    return 0.5 * (np.sqrt(v * v + 4.0 * q) - v)


def vstar_asymptotic(u_c: float, fprime_at_one: float = -1.0,
                     regime: str = "small_uc") -> tuple[float, str]:
    """Closed-form speed approximations with their error order."""
    if not 0 < u_c < 1:
        raise ValueError("u_c must lie in (0, 1)")
    if regime == "small_uc":
        return 2.0 - np.pi**2 / np.log(u_c) ** 2, "O(1/|ln u_c|^3)"
    if regime == "large_uc":
        return (1.0 - u_c) * np.sqrt(abs(fprime_at_one)), "O((1-u_c)^2)"
    raise ValueError(f"unknown regime {regime!r}")


@njit(cache=True, inline="always")
def _fcut(V, coeffs, u_c):
    if V <= u_c:
        return 0.0
    acc = 0.0
    for m in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * V + coeffs[m]
    return acc * V


@njit(cache=True)
def _classify_kernel(v, u_c, coeffs, rtol, atol, s_max):
    """Adaptive Cash-Karp RK4(5), terminating on overshoot / turn / ball.

    Returns (outcome, s, V, P) at termination.
    """
    V = u_c
    P = v * u_c
    s = 0.0
    h = 1e-4
    ball2 = BALL_RADIUS * BALL_RADIUS
    while s < s_max:
        if h > s_max - s:
            h = s_max - s
        # Cash-Karp stages for V' = P, P' = vP - f_c(V)
        k1V = P
        k1P = v * P - _fcut(V, coeffs, u_c)

        V2 = V + h * 0.2 * k1V
        P2 = P + h * 0.2 * k1P
        k2V = P2
        k2P = v * P2 - _fcut(V2, coeffs, u_c)

        V3 = V + h * (0.075 * k1V + 0.225 * k2V)
        P3 = P + h * (0.075 * k1P + 0.225 * k2P)
        k3V = P3
        k3P = v * P3 - _fcut(V3, coeffs, u_c)

        V4 = V + h * (0.3 * k1V - 0.9 * k2V + 1.2 * k3V)
        P4 = P + h * (0.3 * k1P - 0.9 * k2P + 1.2 * k3P)
        k4V = P4
        k4P = v * P4 - _fcut(V4, coeffs, u_c)

        V5 = V + h * (-11.0 / 54.0 * k1V + 2.5 * k2V - 70.0 / 27.0 * k3V
                      + 35.0 / 27.0 * k4V)
        P5 = P + h * (-11.0 / 54.0 * k1P + 2.5 * k2P - 70.0 / 27.0 * k3P
                      + 35.0 / 27.0 * k4P)
        k5V = P5
        k5P = v * P5 - _fcut(V5, coeffs, u_c)

        V6 = V + h * (1631.0 / 55296.0 * k1V + 175.0 / 512.0 * k2V
                      + 575.0 / 13824.0 * k3V + 44275.0 / 110592.0 * k4V
                      + 253.0 / 4096.0 * k5V)
        P6 = P + h * (1631.0 / 55296.0 * k1P + 175.0 / 512.0 * k2P
                      + 575.0 / 13824.0 * k3P + 44275.0 / 110592.0 * k4P
                      + 253.0 / 4096.0 * k5P)
        k6V = P6
        k6P = v * P6 - _fcut(V6, coeffs, u_c)

        V_new = V + h * (37.0 / 378.0 * k1V + 250.0 / 621.0 * k3V
                         + 125.0 / 594.0 * k4V + 512.0 / 1771.0 * k6V)
        P_new = P + h * (37.0 / 378.0 * k1P + 250.0 / 621.0 * k3P
                         + 125.0 / 594.0 * k4P + 512.0 / 1771.0 * k6P)
        V_err = h * ((37.0 / 378.0 - 2825.0 / 27648.0) * k1V
                     + (250.0 / 621.0 - 18575.0 / 48384.0) * k3V
                     + (125.0 / 594.0 - 13525.0 / 55296.0) * k4V
                     + (0.0 - 277.0 / 14336.0) * k5V
                     + (512.0 / 1771.0 - 0.25) * k6V)
        P_err = h * ((37.0 / 378.0 - 2825.0 / 27648.0) * k1P
                     + (250.0 / 621.0 - 18575.0 / 48384.0) * k3P
                     + (125.0 / 594.0 - 13525.0 / 55296.0) * k4P
                     + (0.0 - 277.0 / 14336.0) * k5P
                     + (512.0 / 1771.0 - 0.25) * k6P)

        scale_V = atol + rtol * abs(V_new)
        scale_P = atol + rtol * abs(P_new)
        err = max(abs(V_err) / scale_V, abs(P_err) / scale_P)
        if err <= 1.0:
            s += h
            V, P = V_new, P_new
            if V > 1.0 + OVERSHOOT_TOL:
                return _OUT_OVERSHOOT, s, V, P
            if P <= 0.0:
                return _OUT_TURN, s, V, P
            if (V - 1.0) * (V - 1.0) + P * P <= ball2:
                return _OUT_BALL, s, V, P
            grow = 0.9 * err ** -0.2 if err > 1e-12 else 5.0
            h *= min(5.0, grow)
        else:
            h *= max(0.1, 0.9 * err ** -0.25)
        if h < 1e-14:
            return _OUT_NONE, s, V, P
    return _OUT_NONE, s, V, P


@njit(cache=True)
def _profile_kernel(v, u_c, coeffs, h, n_max, V_out, P_out):
    """Fixed-step RK4 storing the trajectory; stops on the classify events.

    Returns the number of stored nodes (including s = 0).
    """
    V = u_c
    P = v * u_c
    V_out[0] = V
    P_out[0] = P
    n = 1
    ball2 = BALL_RADIUS * BALL_RADIUS
    while n < n_max:
        k1V = P
        k1P = v * P - _fcut(V, coeffs, u_c)
        V2 = V + 0.5 * h * k1V
        P2 = P + 0.5 * h * k1P
        k2V = P2
        k2P = v * P2 - _fcut(V2, coeffs, u_c)
        V3 = V + 0.5 * h * k2V
        P3 = P + 0.5 * h * k2P
        k3V = P3
        k3P = v * P3 - _fcut(V3, coeffs, u_c)
        V4 = V + h * k3V
        P4 = P + h * k3P
        k4V = P4
        k4P = v * P4 - _fcut(V4, coeffs, u_c)
        V += h / 6.0 * (k1V + 2.0 * k2V + 2.0 * k3V + k4V)
        P += h / 6.0 * (k1P + 2.0 * k2P + 2.0 * k3P + k4P)
        V_out[n] = V
        P_out[n] = P
        n += 1
        if V > 1.0 + OVERSHOOT_TOL or P <= 0.0:
            break
        if (V - 1.0) * (V - 1.0) + P * P <= ball2:
            break
    return n


def _classify(spec_coeffs: np.ndarray, u_c: float, v: float,
              rtol: float = 1e-10, atol: float = 1e-13) -> str:
    s_max = 200.0
    for _ in range(8):
        code, s, V, P = _classify_kernel(v, u_c, spec_coeffs, rtol, atol, s_max)
        if code == _OUT_OVERSHOOT:
            return "overshoot"
        if code == _OUT_TURN:
            return "turn"
        if code == _OUT_BALL:
            return "ball"
        s_max *= 4.0
    raise ShootingError(
        f"no terminating event by s = {s_max} at v = {v}; state ({V}, {P})"
    )


def solve_vstar(spec: ReactionSpec, tol: float = 1e-10,
                store_step: float = 1e-3) -> Ptw1dSolution:
    """Bisection for the unique front speed, initial bracket (0, 2]."""
    require_valid(spec)
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    coeffs = np.asarray(spec.coeffs, dtype=float)
    u_c = spec.u_c

    v_lo, v_hi = 1e-9, 2.0
    out_lo = _classify(coeffs, u_c, v_lo)
    out_hi = _classify(coeffs, u_c, v_hi)
    if out_lo == out_hi or {out_lo, out_hi} - {"turn", "overshoot", "ball"}:
        raise ShootingError(
            f"bracket failure on (0, 2]: outcomes {out_lo!r} / {out_hi!r}"
        )
    while v_hi - v_lo > tol:
        v_mid = 0.5 * (v_lo + v_hi)
        outcome = _classify(coeffs, u_c, v_mid)
        if outcome == "ball":
            v_lo = v_hi = v_mid
            break
        if outcome == out_lo:
            v_lo = v_mid
        else:
            v_hi = v_mid
    v_star = 0.5 * (v_lo + v_hi)

    n_max = 400_000
    V_buf = np.empty(n_max)
    P_buf = np.empty(n_max)
    n = _profile_kernel(v_star, u_c, coeffs, store_step, n_max, V_buf, P_buf)
    V, P = V_buf[:n], P_buf[:n]
    dist2 = (V - 1.0) ** 2 + P**2
    i_best = int(np.argmin(dist2))
    if i_best < 8:
        raise ShootingError("stored trajectory collapsed; decrease store_step")
    V = V[: i_best + 1]
    if np.any(np.diff(V) <= 0):
        raise ShootingError("non-monotone profile on the reacted side")

    s_grid = store_step * np.arange(i_best + 1)
    xi = -s_grid[::-1]
    u = V[::-1].copy()
    return Ptw1dSolution(
        v_star=v_star,
        xi=xi,
        u=u,
        u_c=u_c,
        fprime_at_one=spec.fprime_at_one,
        shooting_residual=float(np.sqrt(dist2[i_best])),
        bracket=float(v_hi - v_lo),
        lambda_plus=decay_rate_lambda_plus(v_star, spec.fprime_at_one),
    )


def fit_tail_amplitude(solution: Ptw1dSolution) -> float:
    """Diagnostic fit of the left-tail amplitude in 1 - U ~ A exp(lambda+ xi).

    The constant is not pinned by theory; the fitted value is reported only
    as a consistency diagnostic.
    """
    w = 1.0 - solution.u
    mask = (w > 1e-4) & (w < 1e-1)
    if mask.sum() < 10:
        raise ShootingError("trajectory too short to fit the decay tail")
    logw = np.log(w[mask])
    return float(np.exp(np.mean(logw - solution.lambda_plus * solution.xi[mask])))


def ptw_profile(solution: Ptw1dSolution, xi_grid) -> np.ndarray:
    """Evaluate U on an arbitrary grid.

    xi >= 0 uses the exact exponential tail; xi < 0 interpolates the stored
    trajectory; points left of the stored range fall back to the fitted
    exponential approach to 1 when that regime is established, otherwise
    they are an extrapolation error.
    """
    xi_grid = np.asarray(xi_grid, dtype=float)
    scalar = xi_grid.ndim == 0
    xs = np.atleast_1d(xi_grid).astype(float)
    out = np.empty_like(xs)

    right = xs >= 0
    out[right] = solution.tail(xs[right])

    interior = (~right) & (xs >= solution.xi[0])
    if interior.any():
        spline = CubicSpline(solution.xi, solution.u)
        out[interior] = spline(xs[interior])

    left = xs < solution.xi[0]
    if left.any():
        if 1.0 - solution.u[0] > 1e-3:
            raise ShootingError(
                f"xi below stored range [{solution.xi[0]:.2f}, 0] and tail not "
                "yet exponential: cannot extrapolate"
            )
        amp = fit_tail_amplitude(solution)
        out[left] = 1.0 - amp * np.exp(solution.lambda_plus * xs[left])

    return float(out[0]) if scalar else out
