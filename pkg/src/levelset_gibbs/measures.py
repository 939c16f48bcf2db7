"""Measure containers and the metrics used by the verification suite.

1D Wasserstein-1 distances are computed exactly as the L1 distance between
CDFs: every supported measure has a CDF that is affine between the merged
breakpoints, so each segment integral has a closed form (with a sign-change
split).  Circular W1 minimizes the same integral over a CDF offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import GridDensity

__all__ = [
    "EmpiricalMeasure",
    "AtomicMeasure",
    "AngleDensity",
    "RateFit",
    "w1_line",
    "w1_circular",
    "tv_histogram",
    "rate_fit",
    "angle_pushforward",
    "nearest_atom_masses",
]

DEDUP_TOL = 1e-6


@dataclass
class EmpiricalMeasure:
    """Unweighted sample cloud; 1D points are kept sorted."""

    points: np.ndarray
    max_norm: float | None = None  # running max of ||iterate|| when chain-produced

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = np.sort(pts)
        self.points = pts
        if self.count < 1:
            raise ValueError("empirical measure needs at least one point")

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return 1 if self.points.ndim == 1 else self.points.shape[1]


@dataclass
class AtomicMeasure:
    """Weighted point masses; weights sum to one, atoms pairwise distinct."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.atoms.shape[0] != self.weights.shape[0]:
            raise ValueError("atoms and weights length mismatch")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        s = self.weights.sum()
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {s!r}, expected 1")
        for i in range(len(self.atoms)):
            for j in range(i + 1, len(self.atoms)):
                gap = np.linalg.norm(np.atleast_1d(self.atoms[i])
                                     - np.atleast_1d(self.atoms[j]))
                if gap <= DEDUP_TOL:
                    raise ValueError("atoms closer than the dedup tolerance")

    @property
    def dim(self) -> int:
        return 1 if self.atoms.ndim == 1 else self.atoms.shape[1]


@dataclass
class AngleDensity:
    """Tabulated density on [-pi, pi), treated as periodic."""

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray = field(default=None)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if np.any(self.density < 0):
            raise ValueError("density must be nonnegative")
        if self.grid[0] < -np.pi - 1e-12 or self.grid[-1] >= np.pi:
            raise ValueError("grid must lie in [-pi, pi)")
        if self.cdf is None:
            self.cdf = self._cumulative()
        else:
            self.cdf = np.asarray(self.cdf, dtype=float)

    @classmethod
    def from_values(cls, grid, values):
        """Normalize raw nonnegative values to a probability density."""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        g = np.concatenate([grid, [grid[0] + 2 * np.pi]])
        d = np.concatenate([values, [values[0]]])
        total = float(np.trapezoid(d, g))
        if not total > 0:
            raise ValueError("density integrates to zero")
        return cls(grid, values / total)

    def _total_mass(self):
        g = np.concatenate([self.grid, [self.grid[0] + 2 * np.pi]])
        d = np.concatenate([self.density, [self.density[0]]])
        return float(np.trapezoid(d, g))

    def _cumulative(self):
        seg = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.grid)
        return np.concatenate([[0.0], np.cumsum(seg)])

    def cdf_at(self, theta):
        """CDF from -pi; periodic closing segment handled implicitly."""
        base = np.interp(theta, self.grid, self.cdf)
        # beyond the last node, extend linearly with the wrap density
        last = self.cdf[-1]
        wrap_rate = 0.5 * (self.density[-1] + self.density[0])
        theta = np.asarray(theta, dtype=float)
        over = theta > self.grid[-1]
        out = np.where(over, last + (theta - self.grid[-1]) * wrap_rate, base)
        return out if out.ndim else float(out)

    def mass_in_bins(self, edges):
        m = np.diff(self.cdf_at(np.asarray(edges, dtype=float)))
        return m

    def quantile(self, q):
        total = self.cdf_at(np.pi)
        return np.interp(np.asarray(q) * total, self.cdf, self.grid)


@dataclass(frozen=True)
class RateFit:
    """OLS fit of log(value) against log(eps)."""

    slope: float
    intercept: float
    r_squared: float
    residuals: tuple
    log_pairs: tuple

    def refit(self):
        le = np.array([p[0] for p in self.log_pairs])
        lv = np.array([p[1] for p in self.log_pairs])
        A = np.stack([le, np.ones_like(le)], axis=1)
        coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
        return float(coef[0]), float(coef[1])


def rate_fit(pairs) -> RateFit:
    """Least squares on (log eps, log value); all inputs must be positive."""
    pairs = [(float(e), float(v)) for e, v in pairs]
    if len(pairs) < 3:
        raise ValueError("need at least 3 pairs")
    if any(e <= 0 or v <= 0 for e, v in pairs):
        raise ValueError("rate_fit requires positive inputs")
    le = np.array([math.log(e) for e, _ in pairs])
    lv = np.array([math.log(v) for _, v in pairs])
    A = np.stack([le, np.ones_like(le)], axis=1)
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    pred = A @ coef
    resid = lv - pred
    ss_tot = float(((lv - lv.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid ** 2).sum()) / ss_tot
    return RateFit(slope=float(coef[0]), intercept=float(coef[1]),
                   r_squared=r2, residuals=tuple(resid),
                   log_pairs=tuple(zip(le, lv)))


# -- exact 1D Wasserstein ------------------------------------------------------

def _cdf_profile(measure):
    """(breaks, left_values, right_values) of the measure's CDF.

    left/right are the CDF just after break i and just before break i+1;
    the CDF is affine in between.  Steps (atoms, samples) are constant on
    open intervals; tabulated densities are continuous piecewise linear.
    """
    if isinstance(measure, GridDensity):
        return measure.grid, measure.cdf, "linear"
    if isinstance(measure, EmpiricalMeasure):
        if measure.dim != 1:
            raise ValueError("w1_line requires one-dimensional measures")
        pts = measure.points
        cdf = np.arange(1, len(pts) + 1) / len(pts)
        return pts, cdf, "step"
    if isinstance(measure, AtomicMeasure):
        if measure.dim != 1:
            raise ValueError("w1_line requires one-dimensional measures")
        order = np.argsort(measure.atoms)
        return measure.atoms[order], np.cumsum(measure.weights[order]), "step"
    raise TypeError(f"unsupported measure type {type(measure).__name__}")


def _eval_profile(breaks, cdf, kind, xs_left, xs_right):
    """CDF value just after xs_left and just before xs_right per segment."""
    if kind == "linear":
        left = np.interp(xs_left, breaks, cdf, left=0.0, right=1.0)
        right = np.interp(xs_right, breaks, cdf, left=0.0, right=1.0)
        return left, right
    # step: value after all jumps at points <= x
    idx_l = np.searchsorted(breaks, xs_left, side="right")
    vals = np.concatenate([[0.0], cdf])
    left = vals[idx_l]
    return left, left.copy()


def _l1_between_affine(width, d0, d1):
    """Integral of |affine segment| running from d0 to d1 over given width."""
    same = d0 * d1 >= 0
    tri = np.where(np.abs(d0) + np.abs(d1) > 0,
                   (d0 * d0 + d1 * d1) / np.maximum(np.abs(d0) + np.abs(d1), 1e-300),
                   0.0)
    trap = 0.5 * (np.abs(d0) + np.abs(d1))
    return width * np.where(same, trap, 0.5 * tri)


def w1_line(mu, nu) -> float:
    """Exact Wasserstein-1 distance between two 1D measures via CDFs."""
    b1, c1, k1 = _cdf_profile(mu)
    b2, c2, k2 = _cdf_profile(nu)
    knots = np.unique(np.concatenate([b1, b2]))
    if len(knots) == 1:
        return 0.0
    xl, xr = knots[:-1], knots[1:]
    l1, r1 = _eval_profile(b1, c1, k1, xl, xr)
    l2, r2 = _eval_profile(b2, c2, k2, xl, xr)
    return float(_l1_between_affine(xr - xl, l1 - l2, r1 - r2).sum())


def _angle_profile(obj):
    if isinstance(obj, AngleDensity):
        # append the virtual wrap node at +pi so the closing segment is exact
        total = obj.cdf_at(np.pi)
        breaks = np.concatenate([obj.grid, [np.pi]])
        cdf = np.concatenate([obj.cdf, [total]])
        return breaks, cdf, "linear", total
    arr = np.sort(np.asarray(obj, dtype=float).ravel())
    if arr.size and (arr[0] < -np.pi or arr[-1] >= np.pi):
        raise ValueError("angles must lie in [-pi, pi)")
    cdf = np.arange(1, arr.size + 1) / arr.size
    return arr, cdf, "step", 1.0


def w1_circular(mu, nu) -> float:
    """Circular W1 on [-pi, pi): min over offsets of the CDF L1 distance."""
    b1, c1, k1, t1 = _angle_profile(mu)
    b2, c2, k2, t2 = _angle_profile(nu)
    knots = np.unique(np.concatenate([b1, b2, [-np.pi], [np.pi]]))
    xl, xr = knots[:-1], knots[1:]
    l1v, r1v = _eval_profile(b1, c1 / t1, k1, xl, xr)
    l2v, r2v = _eval_profile(b2, c2 / t2, k2, xl, xr)
    dl = l1v - l2v
    dr = r1v - r2v
    width = xr - xl

    def cost(c):
        return float(_l1_between_affine(width, dl - c, dr - c).sum())

    lo = float(min(dl.min(), dr.min()))
    hi = float(max(dl.max(), dr.max()))
    if hi - lo < 1e-15:
        return cost(0.5 * (lo + hi))
    # golden-section search; the objective is convex in the offset
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = cost(x1), cost(x2)
    for _ in range(200):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = cost(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = cost(x2)
        if b - a < 1e-14:
            break
    return min(f1, f2)


def tv_histogram(samples, target, bins: int = 40) -> float:
    """Half L1 distance between binned empirical and target masses."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if isinstance(samples, EmpiricalMeasure):
        pts = samples.points
    else:
        pts = np.asarray(samples, dtype=float)
    if isinstance(target, AngleDensity):
        lo, hi = -np.pi, np.pi
    elif isinstance(target, GridDensity):
        lo, hi = float(target.grid[0]), float(target.grid[-1])
    else:
        raise TypeError("target must be GridDensity or AngleDensity")
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(pts, bins=edges)
    emp = counts / pts.size
    escaped = 1.0 - emp.sum()  # sample mass outside the target's support
    tgt = target.mass_in_bins(edges)
    return 0.5 * float(np.abs(emp - tgt).sum() + escaped)


def angle_pushforward(points) -> np.ndarray:
    """atan2 angles of 2D points, in [-pi, pi); rejects points at the origin."""
    if isinstance(points, EmpiricalMeasure):
        pts = points.points
    else:
        pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("angle_pushforward expects 2D points")
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms <= 1e-12):
        raise ValueError("point at the origin has no angle")
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    # atan2 returns +pi for (-1, -0.0); fold onto [-pi, pi)
    ang = np.where(ang >= np.pi, -np.pi, ang)
    return ang


def nearest_atom_masses(samples, atomic: AtomicMeasure) -> np.ndarray:
    """Empirical mass of each atom's nearest-neighbour cell."""
    pts = samples.points if isinstance(samples, EmpiricalMeasure) else np.asarray(samples, float)
    atoms = np.atleast_1d(atomic.atoms)
    if atoms.ndim == 1:
        d = np.abs(pts[:, None] - atoms[None, :])
    else:
        d = np.linalg.norm(pts[:, None, :] - atoms[None, :, :], axis=2)
    idx = np.argmin(d, axis=1)
    return np.bincount(idx, minlength=len(atoms)) / len(pts)


def tv_atoms(samples, atomic: AtomicMeasure) -> float:
    """TV between nearest-atom empirical masses and the atomic weights."""
    emp = nearest_atom_masses(samples, atomic)
    return 0.5 * float(np.abs(emp - atomic.weights).sum())
