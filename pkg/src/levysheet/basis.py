"""Deterministic function systems.

Hermite polynomials (probabilists') and Hermite functions, the graded
tensor-product basis e_j of L^2(R^n), orthonormal polynomials p_j in
L^2(nu) built by Gram-Schmidt in L^2(rho), the pairing bijection
kappa(i, j) = j + (i+j-2)(i+j-1)/2, and the combined family
theta_{kappa(i,j)}(x, z) = e_i(x) p_j(z).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .measures import DEGENERACY_TOL, LevyMeasure

# Hermite-function index cap. The normalized recurrence is stable far past
# this; the cap only guards against silly inputs. Partial-sum convergence
# checks need indices in the several hundreds.
MAX_HERMITE_INDEX = 2000


def hermite_poly(n: int, x):
    """Probabilists' Hermite polynomial h_n(x); h_2(x) = x^2 - 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x = np.asarray(x, float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for m in range(1, n):
        h, h_prev = x * h - m * h_prev, h
    return h if h.ndim else float(h)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """xi_1..xi_{n_max} evaluated at x, shape (n_max, len(x)).

    xi_n(x) = pi^{-1/4} ((n-1)!)^{-1/2} e^{-x^2/2} h_{n-1}(sqrt(2) x),
    evaluated by the normalized three-term recurrence so no factorial
    ever appears explicitly.
    """
    if not 1 <= n_max <= MAX_HERMITE_INDEX:
        raise ValueError(f"n_max must be in 1..{MAX_HERMITE_INDEX}")
    x = np.atleast_1d(np.asarray(x, float))
    out = np.empty((n_max, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for m in range(1, n_max - 1):
        out[m + 1] = (np.sqrt(2.0 / (m + 1)) * x * out[m]
                      - np.sqrt(m / (m + 1.0)) * out[m - 1])
    return out


def hermite_function(n: int, x):
    """xi_n(x) for a single index n >= 1."""
    vals = hermite_functions(n, x)[n - 1]
    return float(vals[0]) if np.isscalar(x) or np.ndim(x) == 0 else vals


def kappa(i: int, j: int) -> int:
    """Pairing bijection N x N -> N."""
    if i < 1 or j < 1:
        raise ValueError("kappa arguments must be >= 1")
    return j + (i + j - 2) * (i + j - 1) // 2


def kappa_inverse(k: int) -> tuple[int, int]:
    """The unique (i, j) with kappa(i, j) = k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    # diagonal s = i + j: kappa ranges over ((s-2)(s-1)/2, (s-1)s/2]
    s = int((1 + np.sqrt(8.0 * k - 7.0)) / 2) + 1
    while (s - 2) * (s - 1) // 2 >= k:
        s -= 1
    while (s - 1) * s // 2 < k:
        s += 1
    j = k - (s - 2) * (s - 1) // 2
    return s - j, j


def _compositions(total: int, parts: int):
    """Tuples of `parts` integers >= 1 summing to `total`, lex order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class TensorBasisOrdering:
    """Graded-lexicographic ordering of N^n multi-indices (entries >= 1).

    The j-th basis function is e_j(x) = prod_l xi_{beta^(j)_l}(x_l).
    """

    n: int
    _indices: list = field(default_factory=list)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")

    def _extend_to(self, count: int):
        degree = sum(self._indices[-1]) if self._indices else self.n - 1
        while len(self._indices) < count:
            degree += 1
            self._indices.extend(_compositions(degree, self.n))

    def multi_index(self, j: int) -> tuple:
        """beta^(j) for 1-based j."""
        if j < 1:
            raise ValueError("basis index must be >= 1")
        self._extend_to(j)
        return self._indices[j - 1]

    def eval(self, j: int, x) -> float:
        """e_j(x) for a point x in R^n."""
        beta = self.multi_index(j)
        x = np.atleast_1d(np.asarray(x, float))
        if x.shape[-1] != self.n:
            raise ValueError(f"point dimension {x.shape[-1]} != n={self.n}")
        val = 1.0
        for axis, b in enumerate(beta):
            val = val * hermite_function(b, float(x[axis]))
        return float(val)

    def eval_many(self, j: int, pts: np.ndarray) -> np.ndarray:
        """e_j at an array of points, shape (N, n) -> (N,)."""
        beta = self.multi_index(j)
        pts = np.asarray(pts, float).reshape(-1, self.n)
        val = np.ones(pts.shape[0])
        for axis, b in enumerate(beta):
            val = val * hermite_functions(b, pts[:, axis])[b - 1]
        return val


def tensor_basis_eval(ordering: TensorBasisOrdering, j: int, x) -> float:
    return ordering.eval(j, x)


@dataclass(frozen=True)
class OrthoPolySystem:
    """Orthonormal polynomials p_j in L^2(nu) and the eta_j in L^2(rho).

    Coefficient rows are monomial-basis coefficients, ascending degree.
    j_nu is the number of available p_j; it is finite when L^2(rho) is
    finite-dimensional (k atoms support exactly k polynomials).
    """

    measure: LevyMeasure
    j_nu: int
    eta_coeffs: np.ndarray = field(repr=False)   # (j_nu, j_nu) rows eta_0..eta_{j_nu-1}
    p_coeffs: np.ndarray = field(repr=False)     # (j_nu, j_nu + 1) rows p_1..p_{j_nu}
    eta_norms: np.ndarray = field(repr=False)
    m2: float = 0.0

    def p_eval(self, j: int, z):
        """p_j(z), 1-based."""
        if not 1 <= j <= self.j_nu:
            raise ValueError(f"polynomial index {j} outside 1..{self.j_nu}")
        return np.polynomial.polynomial.polyval(np.asarray(z, float),
                                                self.p_coeffs[j - 1])

    def eta_eval(self, j: int, z):
        if not 0 <= j < self.j_nu:
            raise ValueError(f"eta index {j} outside 0..{self.j_nu - 1}")
        return np.polynomial.polynomial.polyval(np.asarray(z, float),
                                                self.eta_coeffs[j])


def build_ortho_polys(measure: LevyMeasure, max_degree: int = 5) -> OrthoPolySystem:
    """Gram-Schmidt of 1, z, z^2, ... in L^2(rho), rho(dz) = z^2 nu(dz),
    then p_j(z) = ||eta_{j-1}||^{-1} z eta_{j-1}(z).

    Stops early when ||eta_j|| falls below the scale-relative degeneracy
    tolerance, i.e. exactly when L^2(rho) runs out of dimensions.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    z = measure.support
    rho_w = measure.weight * z * z
    m2 = float(np.sqrt(measure.moment(2)))

    def rho_dot(a, b):
        return float(np.sum(rho_w * a * b))

    n_cols = max_degree + 1
    monomials = np.vstack([z ** d for d in range(n_cols)])  # values on support
    coeffs, values, norms = [], [], []
    for d in range(n_cols):
        c = np.zeros(n_cols)
        c[d] = 1.0
        v = monomials[d].astype(float).copy()
        # modified Gram-Schmidt with one reorthogonalization pass
        for _ in range(2):
            for ck, vk, nk in zip(coeffs, values, norms):
                proj = rho_dot(v, vk) / (nk * nk)
                v = v - proj * vk
                c = c - proj * ck
        nrm = np.sqrt(max(rho_dot(v, v), 0.0))
        monomial_scale = np.sqrt(rho_dot(monomials[d], monomials[d]))
        if nrm <= DEGENERACY_TOL * monomial_scale:
            break
        coeffs.append(c)
        values.append(v)
        norms.append(nrm)

    j_nu = len(coeffs)
    eta = np.vstack([c[:j_nu] for c in coeffs])
    eta_norms = np.asarray(norms)
    # p_j = ||eta_{j-1}||^{-1} * z * eta_{j-1}: shift coefficients up a degree
    p = np.zeros((j_nu, j_nu + 1))
    for j in range(j_nu):
        p[j, 1:] = eta[j] / eta_norms[j]
    return OrthoPolySystem(measure=measure, j_nu=j_nu, eta_coeffs=eta,
                           p_coeffs=p, eta_norms=eta_norms, m2=m2)


def theta_eval(system: OrthoPolySystem, ordering: TensorBasisOrdering,
               k: int, x, z) -> float:
    """theta_k(x, z) = e_i(x) p_j(z) with (i, j) = kappa_inverse(k)."""
    i, j = kappa_inverse(k)
    if j > system.j_nu:
        raise ValueError(
            f"theta index {k} needs p_{j} but the measure supports only "
            f"{system.j_nu} orthonormal polynomials")
    return float(ordering.eval(i, x) * system.p_eval(j, z))


def compatible_theta_indices(system: OrthoPolySystem, count: int,
                             k_max: int = 10_000) -> list[int]:
    """The first `count` theta indices whose z-part exists for the measure."""
    out = []
    for k in range(1, k_max + 1):
        if kappa_inverse(k)[1] <= system.j_nu:
            out.append(k)
            if len(out) == count:
                return out
    raise ValueError("k_max exhausted while collecting theta indices")
