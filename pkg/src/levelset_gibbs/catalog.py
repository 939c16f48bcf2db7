"""Built-in maps, weights and parametric potential families.

Every experiment is reproducible from a catalog name plus parameters.
Map evaluation is written against the jet dispatch helpers, so the same
definition serves plain floats, numpy arrays and (nested) jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .jets import Jet, jwhere

__all__ = [
    "GrowthCertificate",
    "SmoothMap",
    "Weight",
    "PotentialFamily",
    "build_map",
    "build_family",
    "eval_family",
    "family_as_map",
    "shifted_map",
    "compose",
    "catalog_function",
    "catalog_ids",
]


@dataclass(frozen=True)
class GrowthCertificate:
    """Constants (m, alpha, R) certifying ||F(x)|| >= m ||x||^alpha for ||x|| >= R."""

    m: float
    alpha: float
    R: float

    def __post_init__(self):
        if self.m <= 0 or self.alpha <= 0 or self.R < 0:
            raise ValueError("growth certificate requires m, alpha > 0 and R >= 0")


@dataclass(frozen=True)
class SmoothMap:
    """A catalogued map F: R^d -> R^p with exact derivatives via jets.

    ``eval`` takes a length-d sequence of coordinates (floats, arrays or
    jets) and returns a length-p list of outputs of the same kind.
    """

    id: str
    params: dict
    d: int
    p: int
    eval: Callable[[Sequence], list]
    domain_box: tuple  # ((lo, hi), ...) per coordinate
    growth: GrowthCertificate
    known_zeros: tuple = ()       # representative points with F = 0
    breakpoints: tuple = ()       # piecewise joints (d = 1 maps only)
    ray_radius: Callable | None = None  # theta -> r with F(r*(cos,sin)) = 0

    def __call__(self, x):
        return self.eval(list(x))

    def norm_f(self, coords):
        """||F|| evaluated through the generic dispatcher."""
        out = self.eval(list(coords))
        acc = out[0] * out[0]
        for o in out[1:]:
            acc = acc + o * o
        from .jets import jsqrt
        return jsqrt(acc)


@dataclass(frozen=True)
class Weight:
    """Positive weight Psi; 'one', 'jf' (generalized Jacobian) or named custom."""

    kind: str = "one"
    c_psi: float = 1.0
    custom: Callable | None = None

    def evaluate(self, smooth_map, coords):
        if self.kind == "one":
            x0 = coords[0]
            if isinstance(x0, np.ndarray):
                return np.ones_like(x0)
            return 1.0
        if self.kind == "jf":
            from .geometry import generalized_jacobian_coords
            return generalized_jacobian_coords(smooth_map, coords)
        if self.custom is None:
            raise ValueError(f"custom weight {self.kind!r} has no callable")
        return self.custom(coords)


# -- catalog map constructors ----------------------------------------------

_QUARTIC_ROOTS = (0.0, 0.5, 1.7, 2.5)


def _quartic(params):
    roots = tuple(params.get("roots", _QUARTIC_ROOTS))
    if len(roots) != 4:
        raise ValueError("quartic expects exactly 4 roots")

    def ev(c):
        x = c[0]
        out = x - roots[0]
        for r in roots[1:]:
            out = out * (x - r)
        return [out]

    return SmoothMap(
        id="quartic", params={"roots": roots}, d=1, p=1, eval=ev,
        domain_box=((-2.0, 5.0),),
        # m = 0.25: the product of the (1 - r/x) factors dips to 0.383 just
        # beyond x = 6, so a 0.5 coefficient would fail the sampled check
        growth=GrowthCertificate(m=0.25, alpha=4.0, R=6.0),
        known_zeros=tuple((r,) for r in roots),
    )


def _conic(params):
    a1 = float(params.get("a1", 1.0))
    a2 = float(params.get("a2", 4.0))
    if a1 <= 0 or a2 <= 0:
        raise ValueError(f"conic coefficients must be positive, got a1={a1}, a2={a2}")

    def ev(c):
        x1, x2 = c
        return [a1 * x1 * x1 + a2 * x2 * x2 - 1.0]

    def ray(theta):
        # positive root of F along the ray with angle theta
        g = a2 + (a1 - a2) * np.cos(theta) ** 2
        return g ** -0.5

    return SmoothMap(
        id="conic", params={"a1": a1, "a2": a2}, d=2, p=1, eval=ev,
        domain_box=((-3.0, 3.0), (-3.0, 3.0)),
        growth=GrowthCertificate(m=0.5, alpha=2.0, R=3.0),
        known_zeros=((a1 ** -0.5, 0.0), (-(a1 ** -0.5), 0.0),
                     (0.0, a2 ** -0.5), (0.0, -(a2 ** -0.5))),
        ray_radius=ray,
    )


def _strophoid(params):
    def ev(c):
        x = c[0]
        den = 1.0 + x * x
        num = 1.0 - x * x
        return [num / den, x * num / den]

    return SmoothMap(
        id="strophoid", params={}, d=1, p=2, eval=ev,
        domain_box=((-3.0, 3.0),),
        growth=GrowthCertificate(m=0.5, alpha=1.0, R=3.0),
        known_zeros=((1.0,), (-1.0,)),
    )


def _line(params):
    def ev(c):
        return [c[0]]

    return SmoothMap(
        id="line", params={}, d=1, p=1, eval=ev,
        domain_box=((-3.0, 3.0),),
        growth=GrowthCertificate(m=1.0, alpha=1.0, R=0.0),
        known_zeros=((0.0,),),
    )


_BUILDERS = {"quartic": _quartic, "conic": _conic,
             "strophoid": _strophoid, "line": _line}


def build_map(map_id: str, **params) -> SmoothMap:
    """Construct a catalog map by name; raises on unknown id or bad params."""
    if map_id not in _BUILDERS:
        raise ValueError(f"unknown catalog map {map_id!r}; "
                         f"known: {sorted(_BUILDERS)}")
    return _BUILDERS[map_id](params)


def catalog_ids():
    return sorted(_BUILDERS)


def shifted_map(base: SmoothMap, t) -> SmoothMap:
    """The map x -> F(x) - t (componentwise), sharing the base's geometry."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape[0] != base.p:
        raise ValueError(f"shift has dimension {t.shape[0]}, map has p={base.p}")

    def ev(c):
        out = base.eval(c)
        return [o - ti for o, ti in zip(out, t)]

    return SmoothMap(
        id=f"{base.id}-shifted", params={**base.params, "shift": tuple(t)},
        d=base.d, p=base.p, eval=ev, domain_box=base.domain_box,
        growth=base.growth, known_zeros=(), breakpoints=base.breakpoints,
    )


def compose(outer: SmoothMap, inner: SmoothMap) -> SmoothMap:
    """Composition outer(inner(x)); dimensions must chain (inner.p == outer.d)."""
    if inner.p != outer.d:
        raise ValueError("dimension mismatch in composition")

    def ev(c):
        return outer.eval(inner.eval(c))

    return SmoothMap(
        id=f"{outer.id}_of_{inner.id}", params={}, d=inner.d, p=outer.p, eval=ev,
        domain_box=inner.domain_box, growth=inner.growth,
    )


# -- parametric potential families -----------------------------------------

@dataclass(frozen=True)
class PotentialFamily:
    """Scalar family u(x, z); eval works for floats, arrays and jets."""

    id: str
    eval: Callable
    domain: tuple = (-3.0 * np.pi, 3.0 * np.pi)
    breakpoints: tuple = ()

    def du_dx(self, x, z):
        out = self.eval(Jet(x, [_one_like(x)]), z)
        return out.partials[0]

    def d2u_dx2(self, x, z):
        inner = Jet(x, [_one_like(x)])
        outer = Jet(inner, [Jet(_one_like(x), [_zero_like(x)])])
        out = self.eval(outer, z)
        return out.partials[0].partials[0]


def _one_like(x):
    return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0


def _zero_like(x):
    return np.zeros_like(x) if isinstance(x, np.ndarray) else 0.0


def _h_bump(y):
    # y^4 / (1 + y^2); vanishes to second order at 0 so the family is C^1
    y2 = y * y
    return y2 * y2 / (1.0 + y2)


def _eq13_eval(x, z):
    from .jets import jcos
    pi = np.pi
    v = x if not isinstance(x, Jet) else x.value
    while isinstance(v, Jet):
        v = v.value
    core = jcos(3.0 * x) + z * x
    right = _h_bump(x - pi)
    left = _h_bump(x + pi)
    # branch chosen by the undifferentiated value; at |x| = pi exactly the
    # interior branch applies (the family is C^1 there either way)
    return core + jwhere(v > pi, right, _zero_like(v)) \
                + jwhere(v < -pi, left, _zero_like(v))


def build_family(family_id: str, k_index: int = 0) -> PotentialFamily:
    if family_id == "eq13":
        return PotentialFamily(id="eq13", eval=_eq13_eval,
                               domain=(-3.0 * np.pi, 3.0 * np.pi),
                               breakpoints=(-np.pi, np.pi))
    if family_id == "barrier":
        if k_index < 0:
            raise ValueError("barrier index must be nonnegative")
        q = 2 * k_index + 1

        def ev(x, z):
            if x not in (0, 1, 0.0, 1.0):
                raise ValueError("barrier family is defined on x in {0, 1}")
            return float(x) * z ** q

        return PotentialFamily(id="barrier", eval=ev, domain=(0.0, 1.0))
    raise ValueError(f"unknown family {family_id!r}; known: ['barrier', 'eq13']")


def eval_family(family_id: str, x, z, k_index: int = 0):
    """Evaluate a named family at (x, z)."""
    return build_family(family_id, k_index=k_index).eval(x, z)


def family_as_map(family: PotentialFamily, z) -> SmoothMap:
    """Freeze the parameter: the scalar map x -> u(x, z) as a SmoothMap."""

    def ev(c):
        return [family.eval(c[0], z)]

    return SmoothMap(
        id=f"{family.id}(z={z})", params={"z": z}, d=1, p=1, eval=ev,
        domain_box=(tuple(family.domain),),
        growth=GrowthCertificate(m=0.1, alpha=2.0, R=4.0 * np.pi),
        breakpoints=family.breakpoints,
    )


# -- named scalar test functions (integrands phi) ---------------------------

def catalog_function(name: str) -> Callable:
    """Named integrand phi(coords) used by moments and level-set integrals."""
    if name == "one":
        return lambda c: np.ones_like(c[0]) if isinstance(c[0], np.ndarray) else 1.0
    if name == "x1":
        return lambda c: c[0]
    if name == "x2":
        return lambda c: c[1]
    if name == "norm_sq":
        def nsq(c):
            acc = c[0] * c[0]
            for ci in c[1:]:
                acc = acc + ci * ci
            return acc
        return nsq
    raise ValueError(f"unknown catalog function {name!r}")


def validate_growth(smooth_map: SmoothMap, n_samples: int = 1000, seed: int = 0):
    """Sample ||x|| in [R, 10R] and check ||F(x)|| >= m ||x||^alpha.

    Returns the worst margin min(||F|| - m ||x||^alpha); negative means the
    certificate failed at some sampled point.
    """
    g = smooth_map.growth
    rng = np.random.default_rng(seed)
    lo = g.R if g.R > 0 else 0.0
    hi = 10.0 * g.R if g.R > 0 else 10.0
    radii = rng.uniform(lo, hi, n_samples)
    if smooth_map.d == 1:
        signs = rng.choice([-1.0, 1.0], n_samples)
        pts = (radii * signs)[:, None]
    else:
        dirs = rng.normal(size=(n_samples, smooth_map.d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = radii[:, None] * dirs
    worst = np.inf
    for x in pts:
        fx = np.asarray(smooth_map.eval(list(x)), dtype=float)
        worst = min(worst, float(np.linalg.norm(fx) - g.m * np.linalg.norm(x) ** g.alpha))
    return worst


def validate_weight_bound(weight: Weight, smooth_map: SmoothMap, alpha_k: float,
                          n_samples: int = 500, seed: int = 1):
    """Check Psi(x) <= C_psi exp(C_psi ||x||^{alpha k}) on the domain box."""
    rng = np.random.default_rng(seed)
    box = np.array(smooth_map.domain_box, dtype=float)
    pts = rng.uniform(box[:, 0], box[:, 1], size=(n_samples, smooth_map.d))
    for x in pts:
        val = weight.evaluate(smooth_map, list(x))
        log_bound = math.log(weight.c_psi) + weight.c_psi * np.linalg.norm(x) ** alpha_k
        if val > 0 and math.log(val) > log_bound:
            return False
    return True


def jacobian_weight_for(smooth_map: SmoothMap) -> Weight:
    """Psi = JF with a box-sampled bound constant."""
    from .geometry import generalized_jacobian
    box = np.array(smooth_map.domain_box, dtype=float)
    grid = [np.linspace(lo, hi, 41) for lo, hi in box]
    mesh = np.meshgrid(*grid, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    c = max(float(generalized_jacobian(smooth_map, x)) for x in pts)
    return Weight(kind="jf", c_psi=max(1.0, 1.1 * c))
