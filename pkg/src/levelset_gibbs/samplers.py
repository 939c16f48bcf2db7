"""Seeded random generation and the Langevin-type Markov chains.

Randomness comes from a counter-based SplitMix64 stream (fixed, documented
below) so every chain is a pure function of its configuration: the j-th
variate of seed s is mix(key(s) ^ (offset + j)) regardless of how draws are
chunked.  Standard normals use the Box-Muller transform over consecutive
pairs of uniforms.

Chain recursions, with U = ||F||^2 and temperature eps:

    plain      x' = x - gamma * grad U(x) / eps                + sqrt(2 gamma) Z
    corrected  x' = x - gamma * (grad U(x)/eps - grad log JF(x)) + sqrt(2 gamma) Z
    sgld       x' = x - gamma * g(x, batch)                    + sqrt(2 gamma eps) G

where g averages the x-derivative of the family potential over a uniform
without-replacement minibatch, so it is unbiased for the empirical-mean
gradient (and equals it exactly for a full batch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import PotentialFamily, SmoothMap
from .geometry import (DegenerateJacobianError, JACOBIAN_FLOOR,
                       grad_log_jacobian_batch)
from .jets import jacobian_rows
from .measures import EmpiricalMeasure
from .quadrature import GibbsSpec, truncation_radius

__all__ = [
    "SeededGenerator",
    "ChainConfig",
    "SgldConfig",
    "ChainDivergenceError",
    "standard_normal",
    "ula_chain",
    "corrected_ula_chain",
    "sgld_chain",
    "run_chain_ensemble",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2^-53


def _mix(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer (Steele, Lea, Flood 2014 constants)."""
    with np.errstate(over="ignore"):
        z = (x + _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


class ChainDivergenceError(RuntimeError):
    """A chain iterate left the admissible region or became non-finite."""


@dataclass
class SeededGenerator:
    """Counter-based SplitMix64 uniform/normal stream.

    state holds the number of 64-bit words consumed; uniforms lie in
    (0, 1] (53-bit mantissa), so log(1 - u) in Box-Muller never sees 0.
    """

    seed: int
    state: int = 0
    algorithm: str = "splitmix64-counter/box-muller"

    def _key(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return _mix(np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF))

    def uniforms(self, n: int) -> np.ndarray:
        """n uniforms in (0, 1]; advances the counter by n."""
        ctr = np.arange(self.state, self.state + n, dtype=np.uint64)
        self.state += n
        bits = _mix(ctr ^ self._key())
        return (bits >> np.uint64(11)).astype(np.float64) * _U53 + _U53

    def standard_normals(self, n: int) -> np.ndarray:
        """n standard normals, one per Box-Muller uniform pair.

        Normal j of the stream always consumes the uniforms at counters
        (2j, 2j+1), so the sequence is independent of how draws are
        chunked across calls.
        """
        u = self.uniforms(2 * n)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        return r * np.cos(2.0 * np.pi * u[1::2])

    def spawn(self, index: int) -> "SeededGenerator":
        """Independent substream: a new seed derived from (seed, index)."""
        with np.errstate(over="ignore"):
            child = _mix(self._key() ^ _mix(np.uint64(index)))
        return SeededGenerator(seed=int(child))


def standard_normal(gen: SeededGenerator) -> float:
    """One standard normal variate from the generator's stream."""
    return float(gen.standard_normals(1)[0])


@dataclass(frozen=True)
class ChainConfig:
    """Step size, temperature, budget and seed of a single chain."""

    gamma: float
    eps: float
    steps: int
    burn_in: int = 0
    thinning: int = 1
    seed: int = 0
    x0: tuple = (0.0,)

    def __post_init__(self):
        if self.gamma <= 0 or self.eps <= 0:
            raise ValueError("gamma and eps must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < steps")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")


@dataclass(frozen=True)
class SgldConfig:
    """Chain configuration plus the dataset and minibatch size."""

    dataset: tuple
    minibatch: int
    gamma: float
    eps: float
    steps: int
    burn_in: int = 0
    thinning: int = 1
    seed: int = 0
    x0: float = 0.0

    def __post_init__(self):
        n = len(self.dataset)
        if not 1 <= self.minibatch <= n:
            raise ValueError(f"minibatch must be in [1, {n}]")
        if self.gamma <= 0 or self.eps <= 0:
            raise ValueError("gamma and eps must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < steps")


def _grad_u_batch(smooth_map: SmoothMap, coords):
    """grad ||F||^2 = 2 sum_i F_i grad F_i, batched over coordinate arrays."""
    values, partials = jacobian_rows(smooth_map, coords)
    d = len(coords)
    out = []
    for j in range(d):
        acc = values[0] * partials[0][j]
        for i in range(1, len(values)):
            acc = acc + values[i] * partials[i][j]
        out.append(2.0 * acc)
    return out


def _run_langevin(smooth_map, config: ChainConfig, x0_batch: np.ndarray,
                  corrected: bool, r_guard: float):
    """Vectorized recursion over a batch of chains sharing one seed.

    A batch of size one reproduces the single-chain definition bitwise,
    because variates are consumed in (step, chain, coordinate) order.
    """
    n, d = x0_batch.shape
    x = x0_batch.astype(float).copy()
    gen = SeededGenerator(seed=config.seed)
    sqrt2g = math.sqrt(2.0 * config.gamma)
    retained = []
    for step in range(config.steps):
        coords = [x[:, j] for j in range(d)]
        grad_u = _grad_u_batch(smooth_map, coords)
        drift = [-(config.gamma / config.eps) * g for g in grad_u]
        if corrected:
            glog, jf = grad_log_jacobian_batch(smooth_map, coords)
            if np.any(jf <= JACOBIAN_FLOOR):
                raise DegenerateJacobianError(
                    f"JF fell to the floor at step {step}")
            drift = [dr + config.gamma * gl for dr, gl in zip(drift, glog)]
        z = gen.standard_normals(n * d).reshape(n, d)
        for j in range(d):
            x[:, j] = x[:, j] + drift[j] + sqrt2g * z[:, j]
        if not np.all(np.isfinite(x)):
            raise ChainDivergenceError(f"non-finite iterate at step {step}")
        norms = np.sqrt((x * x).sum(axis=1))
        if np.any(norms > r_guard):
            raise ChainDivergenceError(
                f"iterate escaped the guard radius {r_guard:.3g} at step {step}")
        if step >= config.burn_in and (step - config.burn_in) % config.thinning == 0:
            retained.append(x.copy())
    stacked = np.stack(retained, axis=0)  # (kept, n, d)
    max_norm = float(np.sqrt((stacked * stacked).sum(axis=2)).max())
    pts = stacked.reshape(-1, d)
    if d == 1:
        pts = pts[:, 0]
    return EmpiricalMeasure(points=pts, max_norm=max_norm)


def _guard_radius(spec: GibbsSpec) -> float:
    return 10.0 * truncation_radius(spec.map.growth, spec.k, spec.eps, 1e-12)


def ula_chain(spec: GibbsSpec, config: ChainConfig) -> EmpiricalMeasure:
    """Unadjusted Langevin chain targeting exp(-||F||^2/eps)."""
    if spec.k != 2:
        raise ValueError("the plain chain is defined for exponent k = 2")
    if spec.weight.kind != "one":
        raise ValueError("plain chain expects the unit weight")
    if spec.map.d not in (1, 2):
        raise ValueError("chains support d in {1, 2}")
    x0 = np.atleast_2d(np.asarray(config.x0, dtype=float))
    return _run_langevin(spec.map, config, x0, corrected=False,
                         r_guard=_guard_radius(spec))


def corrected_ula_chain(spec: GibbsSpec, config: ChainConfig) -> EmpiricalMeasure:
    """Jacobian-corrected chain targeting JF exp(-||F||^2/eps)."""
    if spec.k != 2:
        raise ValueError("the corrected chain is defined for exponent k = 2")
    if spec.weight.kind != "jf":
        raise ValueError("corrected chain expects the Jacobian weight")
    if spec.map.d not in (1, 2):
        raise ValueError("chains support d in {1, 2}")
    x0 = np.atleast_2d(np.asarray(config.x0, dtype=float))
    return _run_langevin(spec.map, config, x0, corrected=True,
                         r_guard=_guard_radius(spec))


def run_chain_ensemble(spec: GibbsSpec, config: ChainConfig, x0_points,
                       corrected: bool = False) -> EmpiricalMeasure:
    """Independent chains from the given start points, merged afterwards.

    The batch shares one seeded stream with a fixed (step, chain,
    coordinate) variate layout, so chains consume disjoint counter ranges
    and the merged result is deterministic in the chain ordering.
    """
    x0 = np.atleast_2d(np.asarray(x0_points, dtype=float))
    return _run_langevin(spec.map, config, x0, corrected=corrected,
                         r_guard=_guard_radius(spec))


def sgld_chain(family: PotentialFamily, config: SgldConfig,
               n_chains: int = 1, x0_points=None) -> EmpiricalMeasure:
    """Stochastic gradient Langevin chain for an empirical-mean potential.

    Each step draws a uniform without-replacement minibatch per chain and
    averages the family's x-derivative over it.
    """
    data = np.asarray(config.dataset, dtype=float)
    n = data.shape[0]
    m = config.minibatch
    if x0_points is None:
        x = np.full(n_chains, float(config.x0))
    else:
        x = np.asarray(x0_points, dtype=float).copy()
        n_chains = x.shape[0]
    gen = SeededGenerator(seed=config.seed)
    noise_scale = math.sqrt(2.0 * config.gamma * config.eps)
    guard = 10.0 * max(abs(family.domain[0]), abs(family.domain[1]))
    retained = []
    for step in range(config.steps):
        if m == n:
            batch = np.broadcast_to(data, (n_chains, n))
        else:
            u = gen.uniforms(n_chains * n).reshape(n_chains, n)
            take = np.argsort(u, axis=1)[:, :m]
            batch = data[take]
        g = family.du_dx(x[:, None], batch).mean(axis=1)
        z = gen.standard_normals(n_chains)
        x = x - config.gamma * g + noise_scale * z
        if not np.all(np.isfinite(x)):
            raise ChainDivergenceError(f"non-finite iterate at step {step}")
        if np.any(np.abs(x) > guard):
            raise ChainDivergenceError(
                f"iterate escaped the guard radius {guard:.3g} at step {step}")
        if step >= config.burn_in and (step - config.burn_in) % config.thinning == 0:
            retained.append(x.copy())
    stacked = np.stack(retained, axis=0)
    return EmpiricalMeasure(points=stacked.ravel(),
                            max_norm=float(np.abs(stacked).max()))


def minibatch_gradient(family: PotentialFamily, x: float, batch) -> float:
    """g(x, batch): average x-derivative of the potential over the batch."""
    batch = np.asarray(batch, dtype=float)
    return float(family.du_dx(np.full(batch.shape, float(x)), batch).mean())
