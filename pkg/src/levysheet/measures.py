"""Jump-size measures with moment, characteristic-exponent and inner-product
access.

A measure here is either a finite list of weighted atoms or a density on
[-C, -eps0] u [eps0, C] carried by a fixed composite Gauss-Legendre rule.
Both variants reduce to weighted point masses (support, weight), so every
integral below is a finite weighted sum. Support bounded away from 0 and
infinity means all moments exist and the exponential-moment condition holds
automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import gauss_legendre

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class LevyMeasure:
    """Finite-activity jump measure on R \\ {0}.

    support and weight are the discrete reduction: atoms themselves, or
    quadrature nodes with weights w_i * density(z_i).
    """

    name: str
    variant: str                      # "atoms" | "density"
    support: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    atoms: tuple = ()                 # original (z, w) pairs for "atoms"
    density_interval: tuple = ()      # (eps0, C) for "density"

    def __post_init__(self):
        z = np.asarray(self.support, float)
        w = np.asarray(self.weight, float)
        if z.size == 0:
            raise ValueError("measure needs at least one support point")
        if np.any(z == 0.0):
            raise ValueError("jump size 0 is not allowed")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "support", z)
        object.__setattr__(self, "weight", w)
        if self.moment(2) <= 0.0:
            raise ValueError("second moment must be strictly positive")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_atoms(cls, atoms, name: str = "atoms") -> "LevyMeasure":
        atoms = tuple((float(z), float(w)) for z, w in atoms)
        z = np.array([a[0] for a in atoms])
        w = np.array([a[1] for a in atoms])
        return cls(name=name, variant="atoms", support=z, weight=w, atoms=atoms)

    @classmethod
    def from_density(cls, density: Callable, eps0: float, C: float,
                     name: str = "density", nodes_per_side: int = 64) -> "LevyMeasure":
        if not (0.0 < eps0 < C < np.inf):
            raise ValueError("need 0 < eps0 < C < inf")
        zs, ws = [], []
        for lo, hi in ((-C, -eps0), (eps0, C)):
            x, w = gauss_legendre(lo, hi, nodes_per_side)
            zs.append(x)
            ws.append(w * np.asarray(density(x), float))
        z = np.concatenate(zs)
        w = np.concatenate(ws)
        keep = w > 0
        return cls(name=name, variant="density", support=z[keep], weight=w[keep],
                   density_interval=(float(eps0), float(C)))

    # -- integrals ---------------------------------------------------------

    def total_mass(self, epsilon: float = 0.0) -> float:
        """nu({|z| >= epsilon})."""
        return float(self.weight[np.abs(self.support) >= epsilon].sum())

    def moment(self, p: int) -> float:
        """int z^p nu(dz), exact on the discrete reduction."""
        if p < 1:
            raise ValueError("p must be >= 1")
        return float(np.sum(self.weight * self.support ** p))

    def psi(self, w: float) -> complex:
        """Characteristic exponent int (e^{iwz} - 1 - iwz) nu(dz)."""
        z = self.support
        return complex(np.sum(self.weight * (np.exp(1j * w * z) - 1.0 - 1j * w * z)))

    def check_exponential_moment(self, epsilon: float, lam: float) -> bool:
        """Finiteness of int_{|z|>=eps} exp(lam|z|) nu(dz)."""
        if epsilon <= 0 or lam <= 0:
            raise ValueError("epsilon and lambda must be positive")
        mask = np.abs(self.support) >= epsilon
        val = float(np.sum(self.weight[mask] * np.exp(lam * np.abs(self.support[mask]))))
        return bool(np.isfinite(val))

    def exponential_moment(self, epsilon: float, lam: float) -> float:
        mask = np.abs(self.support) >= epsilon
        return float(np.sum(self.weight[mask] * np.exp(lam * np.abs(self.support[mask]))))

    def rho_inner(self, f: Callable, g: Callable) -> float:
        """Inner product in L^2(rho), rho(dz) = z^2 nu(dz)."""
        z = self.support
        return float(np.sum(self.weight * z * z
                            * np.asarray(f(z), float) * np.asarray(g(z), float)))

    def nu_inner(self, f: Callable, g: Callable) -> float:
        """Inner product in L^2(nu)."""
        z = self.support
        return float(np.sum(self.weight
                            * np.asarray(f(z), float) * np.asarray(g(z), float)))

    def integrate(self, f: Callable) -> float:
        """int f(z) nu(dz)."""
        return float(np.sum(self.weight * np.asarray(f(self.support), float)))

    def drift_rate(self, epsilon: float = 0.0) -> float:
        """int_{|z|>=eps} z nu(dz), the compensator density per unit volume."""
        mask = np.abs(self.support) >= epsilon
        return float(np.sum(self.weight[mask] * self.support[mask]))

    def restricted(self, epsilon: float):
        """Support/weight arrays of the restriction to {|z| >= epsilon}."""
        mask = np.abs(self.support) >= epsilon
        return self.support[mask], self.weight[mask]

    def small_jump_variance(self, epsilon: float) -> float:
        """Variance mass int_{|z|<eps} z^2 nu(dz) dropped by truncation."""
        mask = np.abs(self.support) < epsilon
        return float(np.sum(self.weight[mask] * self.support[mask] ** 2))


@dataclass(frozen=True)
class MomentTable:
    """Cached moments int z^p nu(dz), p = 1..p_max."""

    measure: LevyMeasure
    p_max: int
    moments: np.ndarray = field(repr=False)
    M: float = 0.0
    m2: float = 0.0

    @classmethod
    def build(cls, measure: LevyMeasure, p_max: int = 12) -> "MomentTable":
        moments = np.array([measure.moment(p) for p in range(1, p_max + 1)])
        M = moments[1]
        if M <= 0:
            raise ValueError("second moment must be positive")
        return cls(measure=measure, p_max=p_max, moments=moments,
                   M=float(M), m2=float(np.sqrt(M)))

    def moment(self, p: int) -> float:
        if not 1 <= p <= self.p_max:
            raise ValueError(f"p out of cached range 1..{self.p_max}")
        return float(self.moments[p - 1])


def two_point_measure(a: float = 1.0, w: float = 0.5) -> LevyMeasure:
    """The symmetric two-atom test measure w*delta_{-a} + w*delta_{a}."""
    return LevyMeasure.from_atoms([(-a, w), (a, w)], name="two_point")
