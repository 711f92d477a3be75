"""Truncated chaos expansions of the sheet, its white noise, and the
compensated-measure white noise, plus the coefficient-level identities
relating them.

All expansions are ChaosCoefficients supported on order-1 multi-indices:
    sheet at x:       c[e^(kappa(i,1))] = m2 * int_{[0,x]} e_i
    sheet noise at x: c[e^(kappa(i,1))] = m2 * e_i(x)
    pnrm noise (x,z): c[e^(kappa(i,j))] = e_i(x) * p_j(z)
"""

from __future__ import annotations

import numpy as np

from .basis import (OrthoPolySystem, TensorBasisOrdering, hermite_functions,
                    kappa)
from .chaos import ChaosCoefficients, MultiIndex
from .quadrature import composite_gauss_legendre


def basis_box_integrals(ordering: TensorBasisOrdering, x, J: int,
                        nodes_per_unit: int = 32) -> np.ndarray:
    """int_{[0,x]} e_i dlambda for i = 1..J, vectorized over i."""
    x = np.atleast_1d(np.asarray(x, float))
    n = ordering.n
    betas = [ordering.multi_index(i) for i in range(1, J + 1)]
    b_max = max(max(b) for b in betas)
    # per-axis integrals of xi_b over [0, x_axis], all b at once
    axis_ints = np.zeros((n, b_max))
    for axis in range(n):
        lo, hi = sorted((0.0, float(x[axis])))
        xs, ws = composite_gauss_legendre(lo, hi, nodes_per_unit)
        if xs.size:
            sign = 1.0 if x[axis] >= 0 else -1.0
            axis_ints[axis] = sign * (hermite_functions(b_max, xs) @ ws)
    out = np.empty(J)
    for idx, beta in enumerate(betas):
        val = 1.0
        for axis, b in enumerate(beta):
            val *= axis_ints[axis, b - 1]
        out[idx] = val
    return out


def _meta(system: OrthoPolySystem, ordering: TensorBasisOrdering) -> dict:
    return dict(measure=system.measure, ordering=ordering, j_nu=system.j_nu)


def sheet_expansion(x, J: int, system: OrthoPolySystem,
                    ordering: TensorBasisOrdering,
                    nodes_per_unit: int = 32) -> ChaosCoefficients:
    """Chaos coefficients of L(x) truncated at i <= J."""
    if J < 1:
        raise ValueError("J must be >= 1")
    ints = basis_box_integrals(ordering, x, J, nodes_per_unit)
    coeffs = {MultiIndex.unit(kappa(i, 1)): system.m2 * ints[i - 1]
              for i in range(1, J + 1)}
    return ChaosCoefficients(coeffs=coeffs, **_meta(system, ordering))


def levy_noise_expansion(x, J: int, system: OrthoPolySystem,
                         ordering: TensorBasisOrdering) -> ChaosCoefficients:
    """Chaos coefficients of the sheet's white noise at x, i <= J."""
    if J < 1:
        raise ValueError("J must be >= 1")
    coeffs = {MultiIndex.unit(kappa(i, 1)): system.m2 * ordering.eval(i, x)
              for i in range(1, J + 1)}
    return ChaosCoefficients(coeffs=coeffs, **_meta(system, ordering))


def pnrm_noise_expansion(x, z: float, J: int, J_prime: int,
                         system: OrthoPolySystem,
                         ordering: TensorBasisOrdering) -> ChaosCoefficients:
    """Compensated-measure white noise at (x, z): coefficients
    e_i(x) p_j(z) for i <= J, j <= min(J_prime, j_nu)."""
    if z == 0.0:
        raise ValueError("z must be nonzero")
    j_cap = min(J_prime, system.j_nu)
    coeffs = {}
    for i in range(1, J + 1):
        ei = ordering.eval(i, x)
        for j in range(1, j_cap + 1):
            coeffs[MultiIndex.unit(kappa(i, j))] = ei * float(system.p_eval(j, z))
    return ChaosCoefficients(coeffs=coeffs, **_meta(system, ordering))


def pnrm_to_levy_reduction(x, J: int, J_prime: int, system: OrthoPolySystem,
                           ordering: TensorBasisOrdering) -> ChaosCoefficients:
    """Integrate the (x, z) noise coefficients against z nu(dz).

    The coefficient at e^(kappa(i,j)) becomes e_i(x) int p_j(z) z nu(dz),
    which is e_i(x) m2 delta_{j,1} because z = m2 p_1(z) and the p_j are
    orthonormal in L^2(nu); the result matches levy_noise_expansion.
    """
    measure = system.measure
    j_cap = min(J_prime, system.j_nu)
    weights = [measure.nu_inner(lambda s, jj=j: np.asarray(
        system.p_eval(jj, s), float), lambda s: s) for j in range(1, j_cap + 1)]
    coeffs = {}
    for i in range(1, J + 1):
        ei = ordering.eval(i, x)
        for j in range(1, j_cap + 1):
            val = ei * weights[j - 1]
            if val != 0.0:
                coeffs[MultiIndex.unit(kappa(i, j))] = val
    return ChaosCoefficients(coeffs=coeffs, **_meta(system, ordering))


def pnrm_box_coefficients(x, intervals, J: int, J_prime: int,
                          system: OrthoPolySystem,
                          ordering: TensorBasisOrdering,
                          nodes_per_unit: int = 32) -> ChaosCoefficients:
    """Chaos coefficients of N~([0,x] x U) for U a union of intervals:
    (int_{[0,x]} e_i) (int_U p_j dnu) at e^(kappa(i,j))."""
    ints = basis_box_integrals(ordering, x, J, nodes_per_unit)
    zs, wz = system.measure.restricted(0.0)
    in_u = np.zeros(zs.size, bool)
    for a, b in intervals:
        if a <= 0.0 <= b:
            raise ValueError("mark set must exclude 0")
        in_u |= (zs > a) & (zs <= b)
    j_cap = min(J_prime, system.j_nu)
    coeffs = {}
    for j in range(1, j_cap + 1):
        pj = float(np.sum(wz[in_u] * np.asarray(
            system.p_eval(j, zs[in_u]), float))) if in_u.any() else 0.0
        for i in range(1, J + 1):
            coeffs[MultiIndex.unit(kappa(i, j))] = ints[i - 1] * pj
    return ChaosCoefficients(coeffs=coeffs, **_meta(system, ordering))


def covariance_partial_sum(x, y, J: int, system: OrthoPolySystem,
                           ordering: TensorBasisOrdering,
                           nodes_per_unit: int = 32) -> float:
    """m2^2 sum_{i<=J} (int_{[0,x]} e_i)(int_{[0,y]} e_i).

    Converges (slowly, like J^{-1/2} for indicator data) to
    M prod_l min(x_l, y_l) as J grows.
    """
    ix = basis_box_integrals(ordering, x, J, nodes_per_unit)
    iy = (ix if np.array_equal(np.atleast_1d(x), np.atleast_1d(y))
          else basis_box_integrals(ordering, y, J, nodes_per_unit))
    return float(system.m2 ** 2 * np.dot(ix, iy))


def covariance_target(x, y, M: float) -> float:
    """M prod_l min(x_l, y_l), the exact sheet covariance."""
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    return float(M * np.prod(np.minimum(x, y)))


def hida_tail_report(coeffs_by_level, q: int = 2) -> dict:
    """Partial sums of a squared ||.||_{-q} norm along truncation levels.

    coeffs_by_level maps level J -> ChaosCoefficients; reports the
    partial-sum sequence and the relative tail beyond each level.
    """
    from .chaos import hida_norm_neg_q
    levels = sorted(coeffs_by_level)
    sums = {J: hida_norm_neg_q(coeffs_by_level[J], q) for J in levels}
    total = sums[levels[-1]]
    rel_tail = {J: (total - sums[J]) / total if total > 0 else 0.0
                for J in levels}
    return {"levels": levels, "partial_sums": sums, "relative_tail": rel_tail,
            "total": total}
