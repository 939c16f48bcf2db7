"""Zero-temperature limit objects: zero sets, atomic limit measures,
the minimizer-selection kernel for parametric families, and the two-point
barrier closed forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .catalog import PotentialFamily, SmoothMap, Weight, build_family
from .geometry import JACOBIAN_FLOOR, generalized_jacobian
from .measures import AngleDensity, AtomicMeasure
from .quadrature import integrate_1d
from .samplers import SeededGenerator

__all__ = [
    "ZeroFindingConfig",
    "BarrierSpec",
    "H1ViolationError",
    "SingularHessianError",
    "find_zeros",
    "atomic_limit",
    "conic_limit_density",
    "s0_for_family",
    "prop10_mc",
    "Prop10Result",
    "barrier_w1_point",
    "barrier_w1_mixture",
]


class H1ViolationError(ValueError):
    """The generalized Jacobian vanishes at a located zero."""


class SingularHessianError(ValueError):
    """The second derivative vanishes at a selected minimizer."""


@dataclass(frozen=True)
class ZeroFindingConfig:
    grid_n: int = 512
    newton_tol: float = 1e-12
    max_newton_iters: int = 100
    dedup_tol: float = 1e-6

    def __post_init__(self):
        if not self.newton_tol < self.dedup_tol:
            raise ValueError("newton_tol must be below dedup_tol")


def _norm_f(smooth_map: SmoothMap, x: float) -> float:
    vals = np.asarray(smooth_map.eval([x]), dtype=float)
    return float(np.sqrt((vals * vals).sum()))


def find_zeros(smooth_map: SmoothMap, cfg: ZeroFindingConfig = ZeroFindingConfig(),
               box=None) -> list[float]:
    """Zeros of a scalar-domain map by grid seeding plus Newton on ||F||^2.

    All seeds run Newton in lockstep on s(x) = ||F(x)||^2; a seed is
    accepted when the polished point satisfies ||F|| <= newton_tol.
    Acceptance is by value rather than step size so zeros where Newton is
    only linearly convergent (degenerate JF) are still located and can be
    rejected downstream by the Jacobian check.
    """
    if smooth_map.d != 1:
        raise ValueError("find_zeros handles scalar-domain maps (d = 1)")
    lo, hi = box if box is not None else smooth_map.domain_box[0]
    xs = np.linspace(lo, hi, cfg.grid_n)
    sq = _sq_scalar_map(smooth_map)
    from .jets import seed_jets
    for _ in range(cfg.max_newton_iters):
        out = sq.eval(seed_jets([xs], order=2))[0]
        g = out.partials[0].value
        h = out.partials[0].partials[0]
        ok = np.isfinite(g) & np.isfinite(h) & (h > 0)
        step = np.where(ok, g / np.where(ok, h, 1.0), 0.0)
        xs = np.clip(xs - step, lo - 1.0, hi + 1.0)
        if np.max(np.abs(step)) < cfg.newton_tol:
            break
    vals = np.asarray(smooth_map.eval([xs]), dtype=float)
    norms = np.sqrt((vals * vals).sum(axis=0))
    found = sorted(float(x) for x, v in zip(xs, norms) if v <= cfg.newton_tol
                   and lo <= x <= hi)
    out: list[float] = []
    for x in found:
        if not out or abs(x - out[-1]) > cfg.dedup_tol:
            out.append(x)
        elif _norm_f(smooth_map, x) < _norm_f(smooth_map, out[-1]):
            out[-1] = x
    if smooth_map.p == 1:
        # a sign change with no converged zero nearby is reported, not fatal
        seeds = np.linspace(lo, hi, cfg.grid_n)
        fs = np.asarray(smooth_map.eval([seeds]), dtype=float)[0]
        flips = seeds[:-1][np.sign(fs[:-1]) * np.sign(fs[1:]) < 0]
        cell = (hi - lo) / (cfg.grid_n - 1)
        for a in flips:
            if not any(a - cell <= z <= a + 2 * cell for z in out):
                warnings.warn(
                    f"sign change of {smooth_map.id!r} near {a:.6g} has no "
                    f"converged zero", RuntimeWarning, stacklevel=2)
    return out


def _sq_scalar_map(smooth_map: SmoothMap) -> SmoothMap:
    def ev(c):
        out = smooth_map.eval(c)
        acc = out[0] * out[0]
        for o in out[1:]:
            acc = acc + o * o
        return [acc]
    return SmoothMap(id=f"{smooth_map.id}_sq", params={}, d=1, p=1, eval=ev,
                     domain_box=smooth_map.domain_box, growth=smooth_map.growth,
                     breakpoints=smooth_map.breakpoints)


def atomic_limit(smooth_map: SmoothMap, weight: Weight = Weight(kind="one"),
                 cfg: ZeroFindingConfig = ZeroFindingConfig()) -> AtomicMeasure:
    """Limit measure on a finite zero set: weights proportional to Psi/JF."""
    zeros = find_zeros(smooth_map, cfg)
    if not zeros:
        raise ValueError(f"map {smooth_map.id!r} has no zeros in its domain box")
    raw = []
    for z in zeros:
        jf = generalized_jacobian(smooth_map, np.array([z]))
        if jf <= JACOBIAN_FLOOR:
            raise H1ViolationError(
                f"JF vanishes at the zero {z!r} (JF={jf:.3e})")
        psi = float(weight.evaluate(smooth_map, [z]))
        raw.append(psi / jf)
    raw = np.array(raw)
    return AtomicMeasure(atoms=np.array(zeros), weights=raw / raw.sum())


def conic_limit_density(a1: float, a2: float, weight: Weight = Weight(kind="jf"),
                        grid_n: int = 4096) -> AngleDensity:
    """Angle density of the conic limit measure: ell(theta) (Psi/JF)."""
    if a1 <= 0 or a2 <= 0:
        raise ValueError("conic coefficients must be positive")
    from .catalog import build_map
    cmap = build_map("conic", a1=a1, a2=a2)
    theta = np.linspace(-np.pi, np.pi, grid_n, endpoint=False)
    c2 = np.cos(theta) ** 2
    g = a2 + (a1 - a2) * c2
    r = g ** -0.5
    ell = np.sqrt(a2 ** 2 + (a1 ** 2 - a2 ** 2) * c2) * g ** -1.5
    x1, x2 = r * np.cos(theta), r * np.sin(theta)
    jf = 2.0 * np.sqrt(a1 ** 2 * x1 ** 2 + a2 ** 2 * x2 ** 2)
    psi = weight.evaluate(cmap, [x1, x2])
    vals = ell * psi / jf
    return AngleDensity.from_values(theta, vals)


# -- minimizer-selection kernel for parametric families ------------------------

VALUE_TOL = 1e-9  # membership margin for "global minimizer"


def _family_minima(family: PotentialFamily, zbar, grid_n=2048,
                   newton_tol=1e-12, max_iters=50):
    """All local minima of u(., zbar) via grid scan plus Newton polish."""
    lo, hi = family.domain
    xs = np.linspace(lo, hi, grid_n)
    us = family.eval(xs, zbar)
    cand = xs[np.r_[False, (us[1:-1] < us[:-2]) & (us[1:-1] <= us[2:]), False]]
    minima = []
    for x in cand:
        x = float(x)
        for _ in range(max_iters):
            d1 = float(family.du_dx(x, zbar))
            d2 = float(family.d2u_dx2(x, zbar))
            if d2 <= 0:
                break
            step = d1 / d2
            x -= step
            if abs(step) < newton_tol:
                break
        if lo <= x <= hi and float(family.d2u_dx2(x, zbar)) > 0:
            minima.append(x)
    minima.sort()
    dedup = []
    for x in minima:
        if not dedup or abs(x - dedup[-1]) > 1e-8:
            dedup.append(x)
    return dedup


def s0_for_family(family: PotentialFamily, zbar,
                  grid_n: int = 2048, hessian_floor: float = 1e-10) -> AtomicMeasure:
    """Atoms at the global minimizers, weighted by (d2u/dx2)^{-1/2}."""
    minima = _family_minima(family, zbar, grid_n=grid_n)
    if not minima:
        raise ValueError("family has no local minima on its domain")
    values = np.array([float(family.eval(x, zbar)) for x in minima])
    u_star = values.min()
    atoms, raw = [], []
    for x, v in zip(minima, values):
        if v <= u_star + VALUE_TOL:
            h = float(family.d2u_dx2(x, zbar))
            if h <= hessian_floor:
                raise SingularHessianError(
                    f"second derivative {h:.3e} at minimizer {x!r} "
                    f"is at or below the floor")
            atoms.append(x)
            raw.append(h ** -0.5)
    raw = np.array(raw)
    return AtomicMeasure(atoms=np.array(atoms), weights=raw / raw.sum())


@dataclass(frozen=True)
class Prop10Result:
    mean_excess: float
    positive_side_fraction: float
    n: int
    trials: int


def _eq13_minimizer_vec(zbar: np.ndarray) -> np.ndarray:
    """Unique global minimizer of the tilted potential for zbar != 0.

    For zbar < 0 the minimizer sits just beyond +pi (mirror for zbar > 0);
    Newton on the stationarity equation from the branch point converges in
    a few steps because the curvature is ~9 there.  Exactly tied means
    (zbar == 0) do not occur almost surely and are sent to +pi.
    """
    fam = build_family("eq13")
    side = np.where(zbar <= 0, 1.0, -1.0)
    x = side * np.pi * np.ones_like(zbar)
    for _ in range(60):
        d1 = fam.du_dx(x, zbar)
        d2 = fam.d2u_dx2(x, zbar)
        step = d1 / d2
        x = x - step
        if np.max(np.abs(step)) < 1e-13:
            break
    return x


def prop10_mc(n: int, trials: int, seed: int = 0,
              grid_check_every: int = 0) -> Prop10Result:
    """Monte Carlo over datasets of the minimizer-selection excess.

    For each trial: draw z^{1:n} uniform on [-1/2, 1/2], reduce to the mean
    (the empirical potential only depends on it), select the minimizer,
    and record the reference-potential excess u(x*, 0) - min u(., 0).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    fam = build_family("eq13")
    # numerically computed reference minimum of u(., 0)
    ref = s0_for_family(fam, 0.0)
    u_star = min(float(fam.eval(x, 0.0)) for x in ref.atoms)
    zbar = np.empty(trials)
    for t in range(trials):
        # per-trial worker stream seeded as seed + trial index, trial order
        tgen = SeededGenerator(seed=seed + t)
        zbar[t] = tgen.uniforms(n).mean() - 0.5
    xstar = _eq13_minimizer_vec(zbar)
    if grid_check_every:
        # spot-check the fast path against the full grid search
        for t in range(0, trials, grid_check_every):
            full = s0_for_family(fam, zbar[t])
            assert abs(float(full.atoms[0]) - xstar[t]) < 1e-8
    excess = fam.eval(xstar, 0.0) - u_star
    return Prop10Result(
        mean_excess=float(excess.mean()),
        positive_side_fraction=float((xstar > 0).mean()),
        n=n, trials=trials)


# -- two-point thermodynamic barrier model -------------------------------------

@dataclass(frozen=True)
class BarrierSpec:
    """Two-point family x z^(2k+1) on {0, 1}; exponent is 2 k_index + 1."""

    k_index: int = 0

    def __post_init__(self):
        if self.k_index < 0:
            raise ValueError("k_index must be nonnegative")

    @property
    def exponent(self) -> int:
        return 2 * self.k_index + 1


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def barrier_w1_point(z: float, eps: float, spec: BarrierSpec = BarrierSpec()) -> float:
    """W1 between the finite-temperature and limit kernels at parameter z.

    Both live on the two-point space {0, 1}; the distance is the sigmoid
    of -|z|^(2k+1)/eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return _sigmoid(-abs(z) ** spec.exponent / eps)


def barrier_w1_mixture(eps: float, spec: BarrierSpec = BarrierSpec(),
                       panels: int = 64, order: int = 16):
    """Mixture W1 over a uniform parameter and its proven lower bound.

    With the parameter uniform on [0, 1] the mixed finite-temperature
    kernel is Bernoulli with success probability equal to the integral of
    the pointwise sigmoid, and the limit kernel is the point mass at 0, so
    the W1 is exactly that integral.  The lower bound is the displayed
    2^{-1/(2k+1)} (int_0^1 exp(-z^(2k+1)) dz) eps^{1/(2k+1)}.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    q = spec.exponent

    def f(z):
        t = z ** q / eps
        with np.errstate(over="ignore"):
            e = np.exp(-t)
        return e / (1.0 + e)

    # the sigmoid boundary layer has width ~ eps^{1/q}; refine there
    from .quadrature import integrate_segments, refined_partition
    w = min(1.0, 60.0 * eps ** (1.0 / q))
    segs = refined_partition(0.0, 1.0, [0.0], [w],
                             coarse_panels=panels // 2, window_panels=panels)
    w1 = integrate_segments(f, segs, order=order)
    c_q = integrate_1d(lambda z: np.exp(-z ** q), 0.0, 1.0,
                       panels=panels, order=order)
    lower = 2.0 ** (-1.0 / q) * c_q * eps ** (1.0 / q)
    return w1, lower
