"""Cut-off KPP reaction rates.

A reaction is a polynomial f(u) = sum_k c_k u^k (no constant term) together
with a cut-off threshold u_c in (0, 1): the effective rate is f(u) for
u > u_c and exactly zero for u <= u_c. Keeping reactions polynomial makes
derivatives exact and the config interchange trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly


class ReactionError(ValueError):
    pass


@dataclass(frozen=True)
class KppReport:
    passed: bool
    violations: tuple[str, ...]
    n_samples: int

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class ReactionSpec:
    """KPP rate f with cut-off threshold u_c.

    coeffs are ascending powers starting at u^1, so Fisher u(1-u) is (1, -1).
    """

    coeffs: tuple[float, ...]
    u_c: float
    name: str = "poly"

    def __post_init__(self):
        if not 0.0 < self.u_c < 1.0:
            raise ReactionError(f"u_c must lie in (0, 1), got {self.u_c}")
        if not self.coeffs or all(c == 0 for c in self.coeffs):
            raise ReactionError("reaction polynomial must be nonzero")

    # ascending coefficients including the (zero) constant term
    @property
    def _c(self) -> np.ndarray:
        return np.concatenate(([0.0], np.asarray(self.coeffs, dtype=float)))

    @property
    def _dc(self) -> np.ndarray:
        return npoly.polyder(self._c)

    def f(self, u):
        val = npoly.polyval(np.asarray(u, dtype=float), self._c)
        return float(val) if np.ndim(u) == 0 else val

    def fprime(self, u):
        val = npoly.polyval(np.asarray(u, dtype=float), self._dc)
        return float(val) if np.ndim(u) == 0 else val

    @property
    def fprime_at_one(self) -> float:
        return float(self.fprime(1.0))

    @property
    def f_c_plus(self) -> float:
        """Limiting rate from above at the threshold, f(u_c)."""
        return float(self.f(self.u_c))


def fisher(u_c: float) -> ReactionSpec:
    return ReactionSpec(coeffs=(1.0, -1.0), u_c=u_c, name="fisher")


def from_config(kind: str, u_c: float, poly_coeffs: Sequence[float] | None = None) -> ReactionSpec:
    kind = kind.strip().lower()
    if kind == "fisher":
        return fisher(u_c)
    if kind == "poly":
        if not poly_coeffs:
            raise ReactionError("poly reaction requires poly_coeffs")
        return ReactionSpec(coeffs=tuple(float(c) for c in poly_coeffs), u_c=u_c)
    raise ReactionError(f"unknown reaction {kind!r}")


def eval_fc(spec: ReactionSpec, u):
    """Cut-off rate: f(u) above the threshold, 0 at and below it."""
    arr = np.asarray(u, dtype=float)
    val = np.where(arr > spec.u_c, npoly.polyval(arr, spec._c), 0.0)
    return float(val) if np.ndim(u) == 0 else val


def validate_kpp(spec: ReactionSpec, n_samples: int = 1000) -> KppReport:
    """Check the structural KPP conditions on a sample grid.

    Conditions: f(0) = f(1) = 0, f'(0) = 1, f'(1) < 0, 0 < f(u) <= u on
    (0, 1), and f(u) < 0 on (1, inf). Endpoint derivatives use central
    differences (the polynomial is defined on all of R).
    """
    if n_samples < 100:
        raise ReactionError("n_samples must be >= 100")
    violations: list[str] = []
    tol = 1e-9
    if abs(spec.f(0.0)) > tol:
        violations.append(f"f(0) = {spec.f(0.0):.3e} != 0")
    if abs(spec.f(1.0)) > tol:
        violations.append(f"f(1) = {spec.f(1.0):.3e} != 0")
    h = 1e-6
    d0 = (spec.f(h) - spec.f(-h)) / (2 * h)
    if abs(d0 - 1.0) > 1e-4:
        violations.append(f"f'(0) = {d0:.6f} != 1")
    d1 = (spec.f(1.0 + h) - spec.f(1.0 - h)) / (2 * h)
    if d1 >= 0.0:
        violations.append(f"f'(1) = {d1:.6f} not negative")
    interior = np.linspace(0.0, 1.0, n_samples + 2)[1:-1]
    fi = spec.f(interior)
    bad_pos = interior[fi <= 0]
    if bad_pos.size:
        violations.append(f"f(u) <= 0 inside (0,1), e.g. at u = {bad_pos[0]:.4f}")
    bad_bound = interior[fi > interior + tol]
    if bad_bound.size:
        violations.append(f"f(u) > u inside (0,1), e.g. at u = {bad_bound[0]:.4f}")
    beyond = 1.0 + np.linspace(0.0, 4.0, n_samples + 1)[1:]
    fb = spec.f(beyond)
    bad_neg = beyond[fb >= 0]
    if bad_neg.size:
        violations.append(f"f(u) >= 0 beyond u = 1, e.g. at u = {bad_neg[0]:.4f}")
    return KppReport(passed=not violations, violations=tuple(violations),
                     n_samples=n_samples)


def require_valid(spec: ReactionSpec) -> None:
    """Gate used by solvers: reject reactions that fail the KPP conditions."""
    report = validate_kpp(spec, 1000)
    if not report.passed:
        raise ReactionError("reaction rejected: " + "; ".join(report.violations))
