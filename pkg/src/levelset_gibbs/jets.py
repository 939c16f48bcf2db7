"""Forward-mode automatic differentiation with truncated jets.

A :class:`Jet` carries a value and one partial derivative per input
coordinate.  Coefficients may be floats, numpy arrays (for vectorised
evaluation over batches of points) or other Jets (nesting gives exact
second derivatives).  All catalog maps are written against the ``j*``
dispatch helpers below, so a single scalar definition serves plain
evaluation, Jacobians, Hessians and batched chain drifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Jet",
    "FdReport",
    "seed_jets",
    "jacobian",
    "hessian",
    "fd_check",
    "jsin",
    "jcos",
    "jexp",
    "jlog",
    "jsqrt",
    "jabs",
    "jwhere",
]


class Jet:
    """Value plus first-order partials w.r.t. a fixed set of inputs."""

    __slots__ = ("value", "partials")

    # keep numpy from broadcasting a Jet elementwise into object arrays;
    # binary ops with ndarrays dispatch to the reflected Jet operators
    __array_ufunc__ = None

    def __init__(self, value, partials):
        self.value = value
        self.partials = tuple(partials)

    # -- ring operations, generic over coefficient type ------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value,
                       [a + b for a, b in zip(self.partials, other.partials)])
        return Jet(self.value + other, self.partials)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, [-p for p in self.partials])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value * other.value,
                       [a * other.value + self.value * b
                        for a, b in zip(self.partials, other.partials)])
        return Jet(self.value * other, [p * other for p in self.partials])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            inv = _reciprocal(other)
            return self * inv
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("Jet exponent must be an integer")
        if n < 0:
            return _reciprocal(self) ** (-n)
        out = Jet(_ones_like(self.value), [_zeros_like(p) for p in self.partials])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __repr__(self):
        return f"Jet({self.value!r}, {self.partials!r})"


def _reciprocal(j: Jet) -> Jet:
    inv = 1.0 / j.value
    minus_inv2 = -(inv * inv)
    return Jet(inv, [minus_inv2 * p for p in j.partials])


def _ones_like(v):
    if isinstance(v, Jet):
        return Jet(_ones_like(v.value), [_zeros_like(p) for p in v.partials])
    if isinstance(v, np.ndarray):
        return np.ones_like(v)
    return 1.0


def _zeros_like(v):
    if isinstance(v, Jet):
        return Jet(_zeros_like(v.value), [_zeros_like(p) for p in v.partials])
    if isinstance(v, np.ndarray):
        return np.zeros_like(v)
    return 0.0


# -- elementary functions with derivative propagation ---------------------

def _lift(fn, dfn):
    def wrapped(x):
        if isinstance(x, Jet):
            v = wrapped(x.value)
            d = dfn(x.value)
            return Jet(v, [d * p for p in x.partials])
        return fn(x)
    return wrapped


def _np_or_math(np_fn, math_fn):
    def call(x):
        if isinstance(x, np.ndarray):
            return np_fn(x)
        return math_fn(x)
    return call


jsin = _lift(_np_or_math(np.sin, math.sin), lambda v: jcos(v))
jcos = _lift(_np_or_math(np.cos, math.cos), lambda v: -jsin(v))
jexp = _lift(_np_or_math(np.exp, math.exp), lambda v: jexp(v))
jlog = _lift(_np_or_math(np.log, math.log), lambda v: _invert(v))
jsqrt = _lift(_np_or_math(np.sqrt, math.sqrt), lambda v: 0.5 * _invert(jsqrt(v)))


def _invert(v):
    if isinstance(v, Jet):
        return _reciprocal(v)
    return 1.0 / v


def jabs(x):
    """|x| with derivative sign(x); undefined slope at 0 resolves to +1."""
    if isinstance(x, Jet):
        s = _sign(x.value)
        return Jet(jabs(x.value), [s * p for p in x.partials])
    if isinstance(x, np.ndarray):
        return np.abs(x)
    return abs(x)


def _sign(v):
    while isinstance(v, Jet):
        v = v.value
    if isinstance(v, np.ndarray):
        return np.where(v >= 0, 1.0, -1.0)
    return 1.0 if v >= 0 else -1.0


def jwhere(cond, a, b):
    """Branch select on the undifferentiated value; cond is bool or array."""
    if isinstance(cond, np.ndarray):
        av, bv = a, b
        if isinstance(a, Jet) or isinstance(b, Jet):
            a = a if isinstance(a, Jet) else Jet(a, [0.0] * len(b.partials))
            b = b if isinstance(b, Jet) else Jet(b, [0.0] * len(a.partials))
            return Jet(jwhere(cond, a.value, b.value),
                       [jwhere(cond, pa, pb)
                        for pa, pb in zip(a.partials, b.partials)])
        return np.where(cond, av, bv)
    return a if cond else b


# -- seeding and derivative extraction -------------------------------------

def seed_jets(x, order=1):
    """Coordinates of ``x`` as Jets carrying unit partials.

    ``order=2`` nests jets so second derivatives propagate exactly.
    Coordinates may be scalars or equal-shape numpy arrays.
    """
    coords = list(x)
    d = len(coords)

    def unit(i, like):
        return [(_ones_like(like) if j == i else _zeros_like(like)) for j in range(d)]

    if order == 1:
        return [Jet(c, unit(i, c)) for i, c in enumerate(coords)]
    if order == 2:
        inner = [Jet(c, unit(i, c)) for i, c in enumerate(coords)]
        return [Jet(inner[i], [Jet(u, [_zeros_like(c)] * d) for u in unit(i, c)])
                for i, c in enumerate(coords)]
    raise ValueError("order must be 1 or 2")


def _check_point(smooth_map, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != smooth_map.d:
        raise ValueError(
            f"point has dimension {x.shape}, map expects d={smooth_map.d}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input point")
    return x


def jacobian(smooth_map, x) -> np.ndarray:
    """Exact Jacobian DF(x) of shape (p, d) by dual-number propagation."""
    x = _check_point(smooth_map, x)
    outs = smooth_map.eval(seed_jets(x))
    rows = []
    for out in outs:
        if isinstance(out, Jet):
            rows.append([float(p) for p in out.partials])
        else:  # constant component
            rows.append([0.0] * smooth_map.d)
    return np.array(rows, dtype=float)


def jacobian_rows(smooth_map, coords):
    """Batched (value, jacobian) evaluation; coords are d arrays.

    Returns (values, partials) where values is a list of p arrays and
    partials[i][j] is the array of entries dF_i/dx_j.
    """
    outs = smooth_map.eval(seed_jets(coords))
    values, partials = [], []
    for out in outs:
        if isinstance(out, Jet):
            values.append(out.value)
            partials.append(list(out.partials))
        else:
            values.append(out)
            partials.append([_zeros_like(coords[0])] * len(coords))
    return values, partials


def hessian(smooth_map, x) -> np.ndarray:
    """Exact symmetric Hessian of a scalar map (p=1) via nested jets."""
    if smooth_map.p != 1:
        raise ValueError(f"hessian requires p=1, map has p={smooth_map.p}")
    x = _check_point(smooth_map, x)
    out = smooth_map.eval(seed_jets(x, order=2))[0]
    d = smooth_map.d
    H = np.empty((d, d), dtype=float)
    for i in range(d):
        pi = out.partials[i]
        for j in range(d):
            H[i, j] = float(pi.partials[j]) if isinstance(pi, Jet) else 0.0
    return 0.5 * (H + H.T)


def gradient(smooth_map, x) -> np.ndarray:
    """Gradient of a scalar map (p=1); row of the Jacobian."""
    if smooth_map.p != 1:
        raise ValueError("gradient requires p=1")
    return jacobian(smooth_map, x)[0]


@dataclass(frozen=True)
class FdReport:
    """Outcome of an AD-versus-central-difference comparison."""

    max_rel_discrepancy: float
    breakpoint_adjacent: bool = False

    def __float__(self):
        return self.max_rel_discrepancy


def fd_check(smooth_map, x, h: float) -> FdReport:
    """Max over Jacobian entries of |AD - central diff| / (1 + |AD|).

    If a central-difference stencil straddles one of the map's declared
    breakpoints the report is flagged; the value is still returned.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    x = _check_point(smooth_map, x)
    ad = jacobian(smooth_map, x)
    d = smooth_map.d
    worst = 0.0
    near_break = False
    breaks = getattr(smooth_map, "breakpoints", ()) or ()
    for j in range(d):
        xm, xp = x.copy(), x.copy()
        xm[j] -= h
        xp[j] += h
        for b in breaks:
            if xm[j] <= b <= xp[j]:
                near_break = True
        fp = np.asarray(smooth_map.eval(list(xp)), dtype=float)
        fm = np.asarray(smooth_map.eval(list(xm)), dtype=float)
        fd = (fp - fm) / (2.0 * h)
        rel = np.abs(ad[:, j] - fd) / (1.0 + np.abs(ad[:, j]))
        worst = max(worst, float(rel.max()))
    return FdReport(worst, near_break)
