"""Simulation of Brownian sheets and finite-activity pure-jump Levy sheets.

A Levy sheet realization is its jump list (uniform locations, marks drawn
from the normalized jump measure) plus the deterministic compensator rate;
sheet values, box increments and compensated integrals are then exact
pathwise sums. Statistical validators compare empirical characteristic
functions against exp(|R| Psi(u)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measures import LevyMeasure
from .mc import RunningMoments, block_reduce, rng_stream
from .quadrature import box_rule

# per-path stream indices
_STREAM_COUNT, _STREAM_LOC, _STREAM_MARK, _STREAM_GAUSS = 0, 1, 2, 3


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box parameter domain in R^n.

    lower defaults to the origin; chaos-orthogonality runs use symmetric
    boxes [-A, A]^n so the Hermite-function mass is covered.
    """

    upper: tuple
    lower: tuple = None

    def __post_init__(self):
        upper = tuple(float(u) for u in np.atleast_1d(self.upper))
        lower = (tuple(0.0 for _ in upper) if self.lower is None
                 else tuple(float(l) for l in np.atleast_1d(self.lower)))
        if len(lower) != len(upper):
            raise ValueError("lower/upper dimension mismatch")
        if any(u <= l for l, u in zip(lower, upper)):
            raise ValueError("domain extents must be positive")
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", lower)

    @property
    def n(self) -> int:
        return len(self.upper)

    @property
    def volume(self) -> float:
        return float(np.prod([u - l for l, u in zip(self.lower, self.upper)]))

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, float))
        return bool(np.all(x >= np.array(self.lower) - 1e-12)
                    and np.all(x <= np.array(self.upper) + 1e-12))

    def quad_rule(self, nodes_per_unit: int = 32):
        return box_rule(self.lower, self.upper, nodes_per_unit)


@dataclass(frozen=True)
class Box:
    """Hyperrectangle (lower, upper] inside a domain."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise ValueError("corner dimension mismatch")
        if any(h < l for l, h in zip(lo, hi)):
            raise ValueError("box needs lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def volume(self) -> float:
        return float(np.prod([h - l for l, h in zip(self.lower, self.upper)]))

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float).reshape(-1, len(self.lower))
        lo = np.array(self.lower)
        hi = np.array(self.upper)
        return np.all((pts > lo) & (pts <= hi), axis=1)


@dataclass(frozen=True)
class LevySheetPath:
    """One finite-activity realization: jump locations, marks, compensator."""

    measure: LevyMeasure
    domain: Domain
    epsilon: float
    locations: np.ndarray = field(repr=False)   # (n_jumps, n)
    marks: np.ndarray = field(repr=False)       # (n_jumps,)
    drift_rate: float = 0.0
    seed: int = 0
    small_jump_variance: float = 0.0

    @property
    def n_jumps(self) -> int:
        return self.marks.size


@dataclass(frozen=True)
class BrownianSheetPath:
    """Gaussian cell increments on a tensor grid; variance = cell volume."""

    domain: Domain
    grid: tuple = ()                       # per-axis partition points
    increments: np.ndarray = field(default=None, repr=False)
    seed: int = 0

    def sheet_value(self, x) -> float:
        """B at a grid point: sum of increments of cells below x."""
        x = np.atleast_1d(np.asarray(x, float))
        idx = []
        for axis, g in enumerate(self.grid):
            k = int(np.searchsorted(g, x[axis] + 1e-12)) - 1
            idx.append(min(max(k, 0), g.size - 1))
        sl = tuple(slice(0, k) for k in idx)
        return float(self.increments[sl].sum())


def simulate_levy_sheet(measure: LevyMeasure, domain: Domain,
                        epsilon: float = 0.0, seed: int = 0) -> LevySheetPath:
    """Compound-Poisson realization of the pure-jump sheet on the domain.

    Jump count ~ Poisson(|domain| * nu({|z| >= eps})), locations i.i.d.
    uniform, marks i.i.d. from the normalized restriction of nu.
    """
    z, w = measure.restricted(epsilon)
    if z.size == 0:
        locations = np.empty((0, domain.n))
        marks = np.empty(0)
    else:
        rate = float(w.sum())
        count = int(rng_stream(seed, _STREAM_COUNT).poisson(rate * domain.volume))
        lo = np.array(domain.lower)
        hi = np.array(domain.upper)
        locations = rng_stream(seed, _STREAM_LOC).uniform(
            lo, hi, size=(count, domain.n))
        marks = z[rng_stream(seed, _STREAM_MARK).choice(
            z.size, size=count, p=w / rate)]
    return LevySheetPath(
        measure=measure, domain=domain, epsilon=float(epsilon),
        locations=locations, marks=marks,
        drift_rate=measure.drift_rate(epsilon), seed=int(seed),
        small_jump_variance=measure.small_jump_variance(epsilon))


def sheet_value(path: LevySheetPath, x) -> float:
    """L(x): marks of jumps <= x componentwise minus the compensator."""
    x = np.atleast_1d(np.asarray(x, float))
    if not path.domain.contains(x):
        raise ValueError(f"point {x} outside domain")
    lo = np.array(path.domain.lower)
    if np.any(x < lo):
        raise ValueError("sheet_value needs x >= domain lower corner")
    vol = float(np.prod(x - lo))
    if path.n_jumps == 0:
        jump_sum = 0.0
    else:
        inside = np.all(path.locations <= x, axis=1)
        jump_sum = float(path.marks[inside].sum())
    return jump_sum - path.drift_rate * vol


def box_increment(path, box: Box) -> float:
    """Increment over the box: 2^n-corner alternating sum of sheet values.

    For a Levy path this collapses to (marks inside) - drift * |box|;
    for a Brownian sheet the corner sum is evaluated on the grid.
    """
    if isinstance(path, LevySheetPath):
        if box.volume == 0.0:
            return 0.0
        inside = box.contains_points(path.locations) if path.n_jumps else \
            np.zeros(0, bool)
        jump_sum = float(path.marks[inside].sum()) if path.n_jumps else 0.0
        return jump_sum - path.drift_rate * box.volume
    # Brownian sheet: inclusion-exclusion over corners
    n = len(box.lower)
    total = 0.0
    for bits in range(1 << n):
        corner = [box.upper[a] if bits >> a & 1 else box.lower[a]
                  for a in range(n)]
        sign = (-1) ** (n - bin(bits).count("1"))
        total += sign * path.sheet_value(corner)
    return total


def jump_count(path: LevySheetPath, box: Box, intervals) -> int:
    """N(R, U) for U a finite union of intervals (a, b] excluding 0."""
    intervals = [(float(a), float(b)) for a, b in intervals]
    for a, b in intervals:
        if a <= 0.0 <= b:
            raise ValueError("mark set U must exclude 0")
    if path.n_jumps == 0:
        return 0
    inside = box.contains_points(path.locations)
    in_u = np.zeros(path.n_jumps, bool)
    for a, b in intervals:
        in_u |= (path.marks > a) & (path.marks <= b)
    return int(np.count_nonzero(inside & in_u))


def compensated_integral(path: LevySheetPath, f, nodes_per_unit: int = 32) -> float:
    """int f d(N - lambda x nu): jump sum minus the quadrature compensator.

    f(x, z) must accept arrays: x of shape (N, n), z of shape (N,).
    """
    jump_sum = 0.0
    if path.n_jumps:
        jump_sum = float(np.sum(np.asarray(f(path.locations, path.marks), float)))
    pts, wts = path.domain.quad_rule(nodes_per_unit)
    z, wz = path.measure.restricted(path.epsilon)
    comp = 0.0
    for zk, wk in zip(z, wz):
        comp += wk * float(np.sum(wts * np.asarray(
            f(pts, np.full(pts.shape[0], zk)), float)))
    return jump_sum - comp


def simulate_brownian_sheet(domain: Domain, grid, seed: int = 0) -> BrownianSheetPath:
    """Independent centered Gaussian cell increments, variance = cell volume."""
    if isinstance(grid, np.ndarray) and grid.ndim == 1:
        grid = (grid,)
    elif np.isscalar(grid[0]):
        grid = (np.asarray(grid, float),)
    grid = tuple(np.asarray(g, float) for g in grid)
    if len(grid) != domain.n:
        raise ValueError("grid must partition every axis")
    for g, lo, hi in zip(grid, domain.lower, domain.upper):
        if g.size < 2 or not np.all(np.diff(g) > 0):
            raise ValueError("each axis grid needs >= 2 increasing points")
    shape = tuple(g.size - 1 for g in grid)
    cell_vols = np.ones(shape)
    for axis, g in enumerate(grid):
        d = np.diff(g)
        cell_vols = cell_vols * d.reshape([-1 if a == axis else 1
                                           for a in range(domain.n)])
    incr = rng_stream(seed, _STREAM_GAUSS).normal(size=shape) * np.sqrt(cell_vols)
    return BrownianSheetPath(domain=domain, grid=grid, increments=incr,
                             seed=int(seed))


# -- statistical validators -----------------------------------------------


def _batch_jump_draws(measure: LevyMeasure, domain: Domain, epsilon: float,
                      n_paths: int, seed: int, block: int):
    """Vectorized jump draws for a block: counts, flat locations, marks."""
    z, w = measure.restricted(epsilon)
    rate = float(w.sum())
    counts = rng_stream(seed, 4 * block + _STREAM_COUNT).poisson(
        rate * domain.volume, size=n_paths)
    total = int(counts.sum())
    lo = np.array(domain.lower)
    hi = np.array(domain.upper)
    locs = rng_stream(seed, 4 * block + _STREAM_LOC).uniform(
        lo, hi, size=(total, domain.n))
    marks = z[rng_stream(seed, 4 * block + _STREAM_MARK).choice(
        z.size, size=total, p=w / rate)]
    return counts, locs, marks


def _segment_sums(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per-path sums of a flat jump-indexed array."""
    out = np.zeros(counts.size)
    if values.size == 0:
        return out
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(int)
    sums = np.add.reduceat(np.concatenate([values, [0.0]]), offsets)
    out[:] = np.where(counts > 0, sums, 0.0)
    return out


def compensated_integral_samples(measure: LevyMeasure, domain: Domain, f,
                                 n_seeds: int, seed: int = 0, epsilon: float = 0.0,
                                 workers: int = 1,
                                 nodes_per_unit: int = 32) -> RunningMoments:
    """Monte-Carlo moments of I_1(f) over independent sheet realizations."""
    pts, wts = domain.quad_rule(nodes_per_unit)
    z, wz = measure.restricted(epsilon)
    comp = 0.0
    for zk, wk in zip(z, wz):
        comp += wk * float(np.sum(wts * np.asarray(
            f(pts, np.full(pts.shape[0], zk)), float)))

    def block_fn(b, n, s):
        counts, locs, marks = _batch_jump_draws(measure, domain, epsilon, n, s, b)
        vals = np.asarray(f(locs, marks), float) if marks.size else np.empty(0)
        acc = RunningMoments()
        acc.add(_segment_sums(vals, counts) - comp)
        return acc

    total = RunningMoments()
    for part in block_reduce(block_fn, n_seeds, seed, workers):
        total.merge(part)
    return total


def box_increment_samples(measure: LevyMeasure, domain: Domain, box: Box,
                          n_seeds: int, seed: int = 0, epsilon: float = 0.0,
                          workers: int = 1) -> np.ndarray:
    """Delta_R L over independent realizations, as a flat array."""
    drift = measure.drift_rate(epsilon)

    def block_fn(b, n, s):
        counts, locs, marks = _batch_jump_draws(measure, domain, epsilon, n, s, b)
        inside = box.contains_points(locs) if marks.size else np.zeros(0, bool)
        vals = np.where(inside, marks, 0.0)
        return _segment_sums(vals, counts) - drift * box.volume

    return np.concatenate(block_reduce(block_fn, n_seeds, seed, workers))


def empirical_cf_check(measure: LevyMeasure, domain: Domain, box: Box,
                       u_grid, n_seeds: int, seed: int = 0,
                       epsilon: float = 0.0, workers: int = 1) -> dict:
    """Empirical E[exp(i u Delta_R L)] against exp(|R| Psi(u)).

    Returns per-u empirical and target values, deviations, and 3-SE
    envelopes (SE from the unit-modulus bound of each component).
    """
    u_grid = np.atleast_1d(np.asarray(u_grid, float))
    incs = box_increment_samples(measure, domain, box, n_seeds, seed,
                                 epsilon, workers)
    phases = np.exp(1j * np.outer(u_grid, incs))
    emp = phases.mean(axis=1)
    se = np.sqrt(np.maximum(
        (np.abs(phases) ** 2).mean(axis=1) - np.abs(emp) ** 2, 0.0) / n_seeds)
    target = np.array([np.exp(box.volume * measure.psi(float(u)))
                       for u in u_grid])
    dev = np.abs(emp - target)
    return {
        "u": u_grid, "empirical": emp, "target": target, "deviation": dev,
        "envelope": 3.0 * np.maximum(se, 1e-300), "n_seeds": n_seeds,
        "max_deviation": float(dev.max()),
        "passed": bool(np.all(dev <= 3.0 * np.maximum(se, 1e-300))),
    }
