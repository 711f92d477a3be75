"""Two-parameter Mittag-Leffler function E_{a,b}(z) on the real line.

Three regimes, switched per argument:
  * plain float series when the largest series term stays small enough
    that cancellation cannot eat the target accuracy,
  * the same series in extended precision (mpmath, digits scaled to the
    largest-term magnitude) for moderately negative arguments,
  * the algebraic asymptotic expansion -sum z^{-m} / Gamma(b - a m)
    for z below the asymptotic cutoff.

On the negative axis with a <= 1, b >= a the function is completely
monotone, so returned values there are positive and decreasing in |z|.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import gamma as _gamma, rgamma as _rgamma

ASYMPTOTIC_CUTOFF = -30.0
ASYMPTOTIC_TERMS = 5
# float series on the negative axis loses ~e^{2s} eps relative accuracy
# (max term e^s against a result ~e^{-s}); keep that below ~1e-12
_FLOAT_SERIES_MAX_EXPONENT = 4.0


def _asymptotic_valid(alpha: float, beta: float, z: float) -> bool:
    """Whether the algebraic expansion is usable at z.

    For alpha <= 1 the exponential branch is absent on the negative axis.
    For 1 < alpha < 2 it oscillates with damping exp(|z|^{1/a} cos(pi/a));
    we require that to be below ~1e-15. At alpha = 2 there is no damping
    (E_{2,1}(-x^2) = cos x), so the series is always used instead. When
    every algebraic term vanishes (integer beta - alpha m <= 0, e.g. the
    exponential itself at alpha = beta = 1), only the series sees the
    exponentially small remainder.
    """
    if z >= ASYMPTOTIC_CUTOFF:
        return False
    if all(_rgamma(beta - alpha * m) == 0.0
           for m in range(1, ASYMPTOTIC_TERMS + 1)):
        return False
    if alpha <= 1.0:
        return True
    damping = -math.cos(math.pi / alpha)
    return damping > 0 and abs(z) ** (1.0 / alpha) * damping > 35.0


class MittagLefflerError(ArithmeticError):
    """Raised when no evaluation regime converges."""


def _max_term_exponent(alpha: float, z: float) -> float:
    """ln of the largest series-term magnitude, about |z|^(1/alpha).

    Governs the cancellation loss on the negative axis and hence the
    extended-precision digit count.
    """
    return abs(z) ** (1.0 / alpha) if z != 0 else 0.0


def _series_float(alpha: float, beta: float, z: float,
                  tol: float, k_max: int) -> float:
    total = 0.0
    zk = 1.0
    for k in range(k_max):
        term = zk * _rgamma(alpha * k + beta)
        total += term
        zk *= z
        # run the tail well below eps so small results keep relative accuracy
        if abs(term) < min(tol, 1e-22) and alpha * k + beta > abs(z) + 2:
            return total
    raise MittagLefflerError(
        f"series did not converge for alpha={alpha}, beta={beta}, z={z}")


def _series_mp(alpha: float, beta: float, z: float, tol: float,
               k_max: int) -> float:
    s = _max_term_exponent(alpha, z)
    dps = 25 + int(math.ceil(s / math.log(10.0)))
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        za = mpmath.mpf(z)
        zk = mpmath.mpf(1)
        am = mpmath.mpf(alpha)
        bm = mpmath.mpf(beta)
        for k in range(k_max):
            # gamma argument must carry full precision: its float rounding
            # would be amplified by the huge pre-cancellation terms
            term = zk / mpmath.gamma(am * k + bm)
            total += term
            zk *= za
            # stop well below the result scale; for small alpha the term
            # count to reach 10^{5-dps} explodes, so fall back to the
            # cancellation noise floor 10^{-25} there
            stop_exp = 5 - dps if alpha >= 0.5 else max(5 - dps, -25)
            if (abs(term) < mpmath.mpf(10) ** stop_exp
                    and alpha * k + beta > abs(z) + 2):
                return float(total)
    raise MittagLefflerError(
        f"extended-precision series did not converge for z={z}")


def _asymptotic(alpha: float, beta: float, z: float,
                n_terms: int = ASYMPTOTIC_TERMS) -> float:
    total = 0.0
    for m in range(1, n_terms + 1):
        total -= z ** (-m) * _rgamma(beta - alpha * m)
    return total


# beyond this digit count the extended-precision series is hopeless; the
# optimally-truncated asymptotic expansion takes over instead
_MP_DPS_CAP = 300


def _asymptotic_adaptive(alpha: float, beta: float, z: float,
                         tol: float = 1e-13, m_max: int = 400):
    """Optimally truncated algebraic expansion with its error estimate.

    Terms shrink by roughly (alpha m)^alpha / |z| each step, so for small
    alpha with moderately negative z this converges far below float
    precision long before the divergent turnaround. Magnitudes are not
    monotone (the reflected-gamma sine factor oscillates), so divergence is
    detected against the first term's scale, and the error estimate is the
    smallest term seen.
    """
    total = 0.0
    first = None
    best = math.inf
    for m in range(1, m_max + 1):
        term = -z ** (-m) * _rgamma(beta - alpha * m)
        mag = abs(term)
        if mag == 0.0:                 # rgamma zero, not convergence
            continue
        if first is None:
            first = mag
        if mag > 10.0 * first:         # past the divergent turnaround
            return total, best
        total += term
        best = min(best, mag)
        if mag < tol * max(abs(total), 1e-300):
            return total, mag
    return total, best


def mittag_leffler(alpha: float, beta: float, z: float,
                   tol: float = 1e-15, k_max: int = 10_000) -> float:
    """E_{alpha,beta}(z) for real z."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must be in (0, 2]")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    z = float(z)
    if z == 0.0:
        return float(_rgamma(beta))
    if _asymptotic_valid(alpha, beta, z):
        return _asymptotic(alpha, beta, z)
    s = _max_term_exponent(alpha, z)
    if z > 0 or s <= _FLOAT_SERIES_MAX_EXPONENT:
        return _series_float(alpha, beta, z, tol, k_max)
    if 25 + s / math.log(10.0) <= _MP_DPS_CAP:
        return _series_mp(alpha, beta, z, tol, k_max)
    # the series needs absurd precision here; the expansion must carry it,
    # which requires the oscillatory branch (alpha > 1) to be damped away
    if alpha <= 1.0 or -math.cos(math.pi / alpha) * s > 35.0:
        val, err = _asymptotic_adaptive(alpha, beta, z)
        if err <= 1e-10 * max(abs(val), 1e-300):
            return val
    raise MittagLefflerError(
        f"no regime converges for alpha={alpha}, beta={beta}, z={z}")


def mittag_leffler_series(alpha: float, beta: float, z: float,
                          tol: float = 1e-15, k_max: int = 10_000) -> float:
    """Series regime only (extended precision as needed); for cross-checks."""
    s = _max_term_exponent(alpha, z)
    if z >= 0 or s <= _FLOAT_SERIES_MAX_EXPONENT:
        return _series_float(alpha, beta, z, tol, k_max)
    return _series_mp(alpha, beta, z, tol, k_max)


def mittag_leffler_asymptotic(alpha: float, beta: float, z: float,
                              n_terms: int = ASYMPTOTIC_TERMS) -> float:
    """Asymptotic regime only; for cross-checks on the overlap window."""
    if z >= 0:
        raise ValueError("asymptotic form applies to negative z")
    return _asymptotic(alpha, beta, z, n_terms)


def mittag_leffler_neg(alpha: float, beta: float, u) -> np.ndarray:
    """Vectorized E_{alpha,beta}(-u) for u >= 0 (solver hot path).

    Routes each element to the cheapest safe regime.
    """
    u = np.atleast_1d(np.asarray(u, float))
    if np.any(u < 0):
        raise ValueError("u must be >= 0")
    out = np.empty_like(u)
    s = u ** (1.0 / alpha)
    asym = np.array([_asymptotic_valid(alpha, beta, -ui) for ui in u])
    easy = ~asym & (s <= _FLOAT_SERIES_MAX_EXPONENT)
    hard = ~asym & ~easy
    if np.any(asym):
        m = np.arange(1, ASYMPTOTIC_TERMS + 1)
        coef = -_rgamma(beta - alpha * m) * (-1.0) ** m
        out[asym] = (coef * u[asym, None] ** (-m)).sum(axis=1)
    for idx in np.nonzero(easy)[0]:
        out[idx] = _series_float(alpha, beta, -u[idx], 1e-15, 10_000)
    for idx in np.nonzero(hard)[0]:
        if 25 + s[idx] / math.log(10.0) <= _MP_DPS_CAP:
            out[idx] = _series_mp(alpha, beta, -u[idx], 1e-15, 10_000)
        else:
            out[idx] = mittag_leffler(alpha, beta, -u[idx])
    return out
