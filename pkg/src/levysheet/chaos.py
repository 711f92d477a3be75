"""Chaos-expansion machinery.

Multi-indices over the paired basis theta_k(x, z) = e_i(x) p_j(z), exact
pathwise iterated compensated integrals I_m (m <= 3) on finite-activity
realizations, weighted Hida norms, the dual-pairing action, and a
vectorized Monte-Carlo sampler for K_alpha = I_{|alpha|}(theta sym-tensor).

The pathwise I_m expands (N - c)^{x m} over subsets of slots: slots
assigned to N range over *distinct* jumps, the rest are integrated against
c = lambda x nu by quadrature. This is exact per realization, which is
what makes the product-formula and orthogonality checks sharp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .basis import OrthoPolySystem, TensorBasisOrdering, kappa_inverse
from .measures import LevyMeasure
from .mc import RunningMoments, block_reduce
from .quadrature import composite_gauss_legendre
from .sheets import Domain, LevySheetPath, _batch_jump_draws, _segment_sums

MAX_ITERATED_ORDER = 3


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Sparse multi-index alpha: ((position, value), ...), positions
    strictly increasing, values >= 1. The empty tuple is alpha = 0."""

    entries: tuple = ()

    def __post_init__(self):
        ent = tuple((int(p), int(v)) for p, v in self.entries)
        positions = [p for p, _ in ent]
        if any(p < 1 for p in positions) or positions != sorted(set(positions)):
            raise ValueError("positions must be distinct, increasing, >= 1")
        if any(v < 1 for _, v in ent):
            raise ValueError("stored values must be >= 1")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def zero(cls) -> "MultiIndex":
        return cls(())

    @classmethod
    def unit(cls, k: int) -> "MultiIndex":
        """epsilon^(k): 1 at position k."""
        return cls(((k, 1),))

    @classmethod
    def from_positions(cls, positions) -> "MultiIndex":
        counts = {}
        for p in positions:
            counts[p] = counts.get(p, 0) + 1
        return cls(tuple(sorted(counts.items())))

    @property
    def order(self) -> int:
        """|alpha|."""
        return sum(v for _, v in self.entries)

    @property
    def index(self) -> int:
        """Largest active position; 0 for alpha = 0."""
        return self.entries[-1][0] if self.entries else 0

    @property
    def positions(self) -> tuple:
        """Active positions repeated with multiplicity."""
        return tuple(p for p, v in self.entries for _ in range(v))

    def factorial(self) -> int:
        out = 1
        for _, v in self.entries:
            out *= math.factorial(v)
        return out

    def two_n_pow(self, k: int) -> float:
        """(2N)^{k alpha} = prod (2 j)^{k alpha_j}."""
        out = 1.0
        for p, v in self.entries:
            out *= float(2 * p) ** (k * v)
        return out

    def label(self) -> str:
        if not self.entries:
            return "0"
        return "+".join(f"{v}e{p}" if v > 1 else f"e{p}"
                        for p, v in self.entries)


def alpha_factorial(alpha: MultiIndex) -> int:
    return alpha.factorial()


def two_n_pow(alpha: MultiIndex, k: int) -> float:
    return alpha.two_n_pow(k)


@dataclass
class ChaosCoefficients:
    """Sparse map alpha -> coefficient, with basis metadata."""

    coeffs: dict = field(default_factory=dict)
    measure: LevyMeasure = None
    ordering: TensorBasisOrdering = None
    j_nu: int = None

    def __post_init__(self):
        if self.j_nu is not None:
            for alpha in self.coeffs:
                for p, _ in alpha.entries:
                    if kappa_inverse(p)[1] > self.j_nu:
                        raise ValueError(
                            f"alpha position {p} needs p_{kappa_inverse(p)[1]} "
                            f"but measure supports only {self.j_nu}")

    def __getitem__(self, alpha: MultiIndex) -> float:
        return self.coeffs.get(alpha, 0.0)

    def items(self):
        return self.coeffs.items()


def hida_norm_k(F: ChaosCoefficients, k: int) -> float:
    """Squared weighted norm sum_alpha c_alpha^2 alpha! (2N)^{k alpha}.

    Terms are accumulated largest-first for deterministic rounding.
    """
    terms = sorted((c * c * a.factorial() * a.two_n_pow(k)
                    for a, c in F.items()), key=abs, reverse=True)
    return float(sum(terms))


def hida_norm_neg_q(F: ChaosCoefficients, q: int) -> float:
    return hida_norm_k(F, -q)


def action(F: ChaosCoefficients, phi: ChaosCoefficients) -> float:
    """Dual pairing sum_alpha F_alpha phi_alpha alpha!."""
    small, large = (F, phi) if len(F.coeffs) <= len(phi.coeffs) else (phi, F)
    return float(sum(c * large[a] * a.factorial() for a, c in small.items()))


def generalized_expectation(F: ChaosCoefficients) -> float:
    """The coefficient at alpha = 0."""
    return F[MultiIndex.zero()]


# -- theta evaluation ------------------------------------------------------


def theta_eval_many(system: OrthoPolySystem, ordering: TensorBasisOrdering,
                    k: int, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """theta_k on arrays: x (N, n), z (N,)."""
    i, j = kappa_inverse(k)
    if j > system.j_nu:
        raise ValueError(f"theta index {k} incompatible with j_nu={system.j_nu}")
    return ordering.eval_many(i, x) * np.asarray(system.p_eval(j, z), float)


def theta_compensator(system: OrthoPolySystem, ordering: TensorBasisOrdering,
                      k: int, domain: Domain, epsilon: float = 0.0,
                      nodes_per_unit: int = 32) -> float:
    """int_D int theta_k d(lambda x nu) = prod_l int xi dlambda * int p_j dnu."""
    i, j = kappa_inverse(k)
    beta = ordering.multi_index(i)
    val = 1.0
    for axis, b in enumerate(beta):
        xs, ws = composite_gauss_legendre(domain.lower[axis],
                                          domain.upper[axis], nodes_per_unit)
        from .basis import hermite_functions
        val *= float(np.sum(ws * hermite_functions(b, xs)[b - 1]))
    zs, wz = system.measure.restricted(epsilon)
    val *= float(np.sum(wz * np.asarray(system.p_eval(j, zs), float)))
    return val


# -- exact pathwise iterated integrals -------------------------------------


def _comp_nodes(path: LevySheetPath, nodes_per_unit: int):
    """Flattened (x, z, w) nodes of the compensator c = lambda x nu."""
    pts, wts = path.domain.quad_rule(nodes_per_unit)
    z, wz = path.measure.restricted(path.epsilon)
    nx, nz = pts.shape[0], z.size
    xc = np.repeat(pts, nz, axis=0)
    zc = np.tile(z, nx)
    wc = np.repeat(wts, nz) * np.tile(wz, nx)
    return xc, zc, wc


def iterated_integral(path: LevySheetPath, g, m: int,
                      nodes_per_unit: int = 24, chunk: int = 1 << 17) -> float:
    """I_m(g) on a finite-activity realization, exactly.

    g must be symmetric and vectorized: g(X, Z) with X (batch, m, n),
    Z (batch, m) -> (batch,). Slots assigned to the jump measure run over
    distinct jumps; compensated slots are integrated by quadrature.
    """
    if not 1 <= m <= MAX_ITERATED_ORDER:
        raise ValueError(f"m must be in 1..{MAX_ITERATED_ORDER}")
    nj = path.n_jumps
    xc, zc, wc = _comp_nodes(path, nodes_per_unit)
    nc = zc.size
    jump_x = path.locations
    jump_z = path.marks
    total = 0.0
    from itertools import combinations
    for jump_slots in [set(c) for r in range(m + 1)
                       for c in combinations(range(m), r)]:
        comp_slots = [s for s in range(m) if s not in jump_slots]
        sign = (-1.0) ** len(comp_slots)
        r = len(jump_slots)
        if r > nj:
            continue
        slot_list = sorted(jump_slots)
        for jtuple in permutations(range(nj), r):
            # comp slots: tensor over comp nodes, chunked on the flat index
            n_comp_combos = nc ** len(comp_slots) if comp_slots else 1
            partial = 0.0
            for start in range(0, n_comp_combos, chunk):
                stop = min(start + chunk, n_comp_combos)
                batch = stop - start
                X = np.empty((batch, m, path.domain.n))
                Z = np.empty((batch, m))
                W = np.ones(batch)
                flat = np.arange(start, stop)
                rem = flat
                for s in reversed(comp_slots):
                    idx = rem % nc
                    rem = rem // nc
                    X[:, s, :] = xc[idx]
                    Z[:, s] = zc[idx]
                    W *= wc[idx]
                for slot, jidx in zip(slot_list, jtuple):
                    X[:, slot, :] = jump_x[jidx]
                    Z[:, slot] = jump_z[jidx]
                partial += float(np.sum(W * np.asarray(g(X, Z), float)))
            total += sign * partial
    return total


def symmetrized_theta_product(system: OrthoPolySystem,
                              ordering: TensorBasisOrdering,
                              theta_indices) -> callable:
    """The symmetrized tensor of the given theta factors as a batch callable."""
    theta_indices = list(theta_indices)
    m = len(theta_indices)
    perms = sorted(set(permutations(theta_indices)))
    weight = math.factorial(m) / len(perms)  # repeated factors collapse perms

    def g(X, Z):
        out = np.zeros(X.shape[0])
        for perm in perms:
            term = np.ones(X.shape[0])
            for slot, k in enumerate(perm):
                term = term * theta_eval_many(system, ordering, k,
                                              X[:, slot, :], Z[:, slot])
            out += term
        return out * (weight / math.factorial(m))

    return g


def k_alpha_sample(path: LevySheetPath, alpha: MultiIndex,
                   system: OrthoPolySystem, ordering: TensorBasisOrdering,
                   nodes_per_unit: int = 24) -> float:
    """K_alpha evaluated on one realization via the exact I_m machinery."""
    m = alpha.order
    if m == 0:
        return 1.0
    if m > MAX_ITERATED_ORDER:
        raise ValueError(f"|alpha| > {MAX_ITERATED_ORDER} unsupported")
    g = symmetrized_theta_product(system, ordering, alpha.positions)
    return iterated_integral(path, g, m, nodes_per_unit)


# -- fast vectorized K_alpha sampling (|alpha| <= 2) -----------------------


def multi_indices_up_to(theta_ks, max_order: int = 2) -> list[MultiIndex]:
    """0, all epsilon^(k), and all order-2 combinations over theta_ks."""
    ks = list(theta_ks)
    out = [MultiIndex.zero()]
    if max_order >= 1:
        out += [MultiIndex.unit(k) for k in ks]
    if max_order >= 2:
        for a in range(len(ks)):
            for b in range(a, len(ks)):
                out.append(MultiIndex.from_positions((ks[a], ks[b])))
    return out


def k_alpha_samples(measure: LevyMeasure, domain: Domain,
                    system: OrthoPolySystem, ordering: TensorBasisOrdering,
                    alphas, n_seeds: int, seed: int = 0, epsilon: float = 0.0,
                    workers: int = 1, nodes_per_unit: int = 32,
                    extra_fn=None):
    """Vectorized per-seed samples of K_alpha for |alpha| <= 2.

    Uses the closed pathwise forms: with S_t the jump sum of theta_t,
    D_ab the diagonal sum of theta_a theta_b, and c_t the deterministic
    compensator mass of theta_t,
        K_{e_a}       = S_a - c_a
        K_{e_a + e_b} = S_a S_b - D_ab - S_a c_b - S_b c_a + c_a c_b
        K_{2 e_a}     = S_a^2 - D_aa - 2 S_a c_a + c_a^2
    (the a = b case is the same expansion with both slots on theta_a).

    Returns (samples, extra): samples has shape (len(alphas), n_seeds);
    extra are per-seed values of the optional compensated functional
    extra_fn(locations, marks).
    """
    alphas = list(alphas)
    for a in alphas:
        if a.order > 2:
            raise ValueError("fast sampler handles |alpha| <= 2")
    theta_ks = sorted({p for a in alphas for p in a.positions})
    comp = {k: theta_compensator(system, ordering, k, domain, epsilon,
                                 nodes_per_unit) for k in theta_ks}
    extra_comp = 0.0
    if extra_fn is not None:
        pts, wts = domain.quad_rule(nodes_per_unit)
        zs, wz = measure.restricted(epsilon)
        for zk, wk in zip(zs, wz):
            extra_comp += wk * float(np.sum(wts * np.asarray(
                extra_fn(pts, np.full(pts.shape[0], zk)), float)))

    def block_fn(b, n, s):
        counts, locs, marks = _batch_jump_draws(measure, domain, epsilon, n, s, b)
        theta_vals = {k: (theta_eval_many(system, ordering, k, locs, marks)
                          if marks.size else np.empty(0)) for k in theta_ks}
        S = {k: _segment_sums(theta_vals[k], counts) for k in theta_ks}
        D = {}
        for ia, ka in enumerate(theta_ks):
            for kb in theta_ks[ia:]:
                D[(ka, kb)] = _segment_sums(theta_vals[ka] * theta_vals[kb],
                                            counts)
        rows = np.empty((len(alphas), n))
        for r, alpha in enumerate(alphas):
            if alpha.order == 0:
                rows[r] = 1.0
            elif alpha.order == 1:
                (ka,) = alpha.positions
                rows[r] = S[ka] - comp[ka]
            else:
                ka, kb = alpha.positions
                key = (ka, kb) if (ka, kb) in D else (kb, ka)
                rows[r] = (S[ka] * S[kb] - D[key]
                           - S[ka] * comp[kb] - S[kb] * comp[ka]
                           + comp[ka] * comp[kb])
        if extra_fn is None:
            return rows, None
        vals = (np.asarray(extra_fn(locs, marks), float)
                if marks.size else np.empty(0))
        return rows, _segment_sums(vals, counts) - extra_comp

    parts = block_reduce(block_fn, n_seeds, seed, workers)
    samples = np.concatenate([p[0] for p in parts], axis=1)
    extra = (np.concatenate([p[1] for p in parts])
             if extra_fn is not None else None)
    return samples, extra


def chaos_orthogonality_check(measure: LevyMeasure, domain: Domain,
                              system: OrthoPolySystem,
                              ordering: TensorBasisOrdering, alphas,
                              n_seeds: int, seed: int = 0,
                              epsilon: float = 0.0, workers: int = 1) -> dict:
    """Monte-Carlo E[K_a K_b] against delta_ab alpha! with 3-SE envelopes."""
    alphas = list(alphas)
    samples, _ = k_alpha_samples(measure, domain, system, ordering, alphas,
                                 n_seeds, seed, epsilon, workers)
    prod_mean = samples @ samples.T / n_seeds
    sq = samples * samples
    prod_sq_mean = sq @ sq.T / n_seeds
    se = np.sqrt(np.maximum(prod_sq_mean - prod_mean ** 2, 0.0) / n_seeds)
    target = np.diag([float(a.factorial()) for a in alphas])
    dev = np.abs(prod_mean - target)
    envelope = 3.0 * np.maximum(se, 1e-300)
    return {
        "alphas": alphas, "moments": prod_mean, "se": se, "target": target,
        "deviation": dev, "envelope": envelope, "n_seeds": n_seeds,
        "passed": bool(np.all(dev <= envelope)),
        "max_excess": float(np.max(dev - envelope)),
    }


def estimate_coefficient(f_samples: np.ndarray, k_samples: np.ndarray,
                         alpha: MultiIndex) -> tuple[float, float]:
    """(1/alpha!) mean(F * K_alpha) over shared seeds, with its SE."""
    prod = np.asarray(f_samples, float) * np.asarray(k_samples, float)
    fact = alpha.factorial()
    acc = RunningMoments()
    acc.add(prod)
    return acc.mean / fact, acc.se_mean / fact
