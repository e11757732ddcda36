"""Marcenko-Pastur log-determinant functional over sample-based distributions.

For a nonnegative random variable A and load ratio beta,

    V(A, beta) = beta * E log2(1 + eta A) - log2(eta) + (eta - 1) log2(e)

where eta in (0, 1] solves beta * (1 - E[1 / (1 + eta A)]) = 1 - eta.
V is the almost-sure limit of (1/N) log2|I + M diag(A/N) M^H| for an
N x (beta N) matrix M with i.i.d. unit-variance entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError

LOG2E = np.log2(np.e)
ETA_FLOOR = 1e-12
DEFAULT_TOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class EmpiricalDistribution:
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float).ravel()
        if s.size < 1:
            raise DomainError("distribution needs at least one sample")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise DomainError("samples must be finite and nonnegative")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    def mean(self, f=None) -> float:
        return float(np.mean(self.samples if f is None else f(self.samples)))


@dataclass(frozen=True)
class MpResult:
    eta: float
    value_bits: float
    residual: float


def _as_samples(dist) -> np.ndarray:
    if isinstance(dist, EmpiricalDistribution):
        return dist.samples
    return EmpiricalDistribution(dist).samples


def fixed_point_defect(a: np.ndarray, beta: float, eta: float) -> float:
    """g(eta) = beta (1 - E[1/(1+eta A)]) - (1 - eta); increasing in eta."""
    return beta * (1.0 - np.mean(1.0 / (1.0 + eta * a))) - (1.0 - eta)


def _solve(a: np.ndarray, beta: float, tolerance: float, guess: float | None = None,
           newton: bool = False) -> tuple[float, float]:
    """Bracketing root search of g on [ETA_FLOOR, 1].

    With ``newton`` the midpoint is replaced by a Newton step from the
    current iterate whenever that step stays inside the bracket; the bracket
    is still shrunk every iteration, so the bisection guarantee holds.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    if not np.any(a):
        return 1.0, 0.0
    g_hi = fixed_point_defect(a, beta, 1.0)
    if g_hi <= tolerance:
        return 1.0, float(abs(g_hi))
    lo, hi = ETA_FLOOR, 1.0
    g_lo = fixed_point_defect(a, beta, lo)
    if g_lo > tolerance:
        # root below the floor; only happens for absurdly large A
        raise NumericalError("fixed point lies below the eta floor", bracket=(lo, hi))
    if g_lo >= -tolerance:
        return lo, float(abs(g_lo))
    x = 0.5 * (lo + hi) if guess is None or not lo < guess < hi else guess
    for _ in range(MAX_ITER):
        r = 1.0 / (1.0 + x * a)
        mr = np.mean(r)
        g = beta * (1.0 - mr) - (1.0 - x)
        if abs(g) <= tolerance:
            return x, float(abs(g))
        if g > 0:
            hi = x
        else:
            lo = x
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        nxt = 0.5 * (lo + hi)
        if newton:
            # g'(eta) = 1 + beta E[A r^2] = 1 + beta E[(1 - r) r] / eta
            slope = 1.0 + beta * (mr - np.mean(r * r)) / x
            step = x - g / slope
            if lo < step < hi:
                nxt = step
        x = nxt
    raise NumericalError(f"root search did not reach |g| <= {tolerance:g}", bracket=(lo, hi))


def solve_eta(dist, beta: float, tolerance: float = DEFAULT_TOL) -> float:
    """Root of the fixed-point equation in (0, 1] by bisection."""
    return _solve(_as_samples(dist), beta, tolerance)[0]


def mp_terms(a: np.ndarray, beta: float, tolerance: float = DEFAULT_TOL):
    """(eta, V, residual, per-sample terms beta*log2(1+eta*A)).

    Because dV/deta vanishes at the fixed point, the sampling error of V is,
    to first order, that of the mean of the per-sample terms.  Callers use
    them for delta-method standard errors.
    """
    eta, res = _solve(a, beta, tolerance)
    if eta == 1.0 and not np.any(a):
        return 1.0, 0.0, 0.0, np.zeros_like(a)
    terms = beta * np.log2(1.0 + eta * a)
    value = float(terms.mean()) - np.log2(eta) + (eta - 1.0) * LOG2E
    # V >= 0 analytically; clip only rounding-level negatives
    return eta, max(float(value), 0.0), res, terms


def mp_value(dist, beta: float, tolerance: float = DEFAULT_TOL) -> MpResult:
    eta, value, res, _ = mp_terms(_as_samples(dist), beta, tolerance)
    return MpResult(eta=eta, value_bits=value, residual=res)


def point_mass_eta(a: float, beta: float) -> float:
    """Closed-form eta for A = a almost surely (positive root of a quadratic)."""
    if a == 0:
        return 1.0
    # a eta^2 + (1 - a (1 - beta)) eta - 1 = 0
    qb = 1.0 - a * (1.0 - beta)
    return (-qb + np.sqrt(qb * qb + 4.0 * a)) / (2.0 * a)
