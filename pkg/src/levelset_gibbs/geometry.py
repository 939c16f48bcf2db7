"""Generalized Jacobian, normal-Hessian identity and level-set integrals.

Level-set machinery is implemented for the conic family only, which has a
closed-form angular parametrization; general implicit-curve tracing is out
of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import SmoothMap, Weight, catalog_function
from .jets import jacobian, jacobian_rows, jsqrt, seed_jets
from .quadrature import integrate_segments, refined_partition, segment_nodes

__all__ = [
    "JACOBIAN_FLOOR",
    "LevelSetIntegralSpec",
    "CoareaReport",
    "generalized_jacobian",
    "grad_log_jacobian",
    "normal_hessian_det",
    "conic_levelset_integral",
    "coarea_residual",
    "DegenerateJacobianError",
]

JACOBIAN_FLOOR = 1e-10


class DegenerateJacobianError(ValueError):
    """JF at or below the floor where a positive Jacobian is required."""


def _gram_det(rows):
    """det of the Gram matrix of a list of row vectors (entries may be jets)."""
    p = len(rows)
    if p == 1:
        r = rows[0]
        acc = r[0] * r[0]
        for e in r[1:]:
            acc = acc + e * e
        return acc
    if p == 2:
        a = _dot(rows[0], rows[0])
        b = _dot(rows[0], rows[1])
        c = _dot(rows[1], rows[1])
        return a * c - b * b
    raise ValueError("gram determinant implemented for p <= 2")


def _dot(u, v):
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc = acc + a * b
    return acc


def generalized_jacobian(smooth_map: SmoothMap, x) -> float:
    """sqrt(det(DF DF^T)) for d >= p, sqrt(det(DF^T DF)) for d <= p."""
    J = jacobian(smooth_map, x)
    if smooth_map.d >= smooth_map.p:
        G = J @ J.T
    else:
        G = J.T @ J
    det = float(np.linalg.det(G))
    return math.sqrt(max(det, 0.0))


def generalized_jacobian_coords(smooth_map: SmoothMap, coords):
    """JF evaluated through jets; coords may be floats, arrays or jets."""
    _, partials = jacobian_rows(smooth_map, coords)
    d, p = smooth_map.d, smooth_map.p
    if d >= p:
        rows = partials  # p rows of length d
    else:
        rows = [[partials[i][j] for i in range(p)] for j in range(d)]
    return jsqrt(_gram_det(rows))


def grad_log_jacobian(smooth_map: SmoothMap, x) -> np.ndarray:
    """Gradient of log JF at x, exact via nested jets.

    Raises DegenerateJacobianError when JF(x) <= JACOBIAN_FLOOR: the drift
    correction divides by JF^2 and a vanishing Jacobian signals a
    degeneracy that must surface loudly.
    """
    x = np.asarray(x, dtype=float)
    jf = generalized_jacobian(smooth_map, x)
    if jf <= JACOBIAN_FLOOR:
        raise DegenerateJacobianError(
            f"JF={jf:.3e} at {x.tolist()} is at or below the floor {JACOBIAN_FLOOR}")
    out = generalized_jacobian_coords(smooth_map, seed_jets(x))
    return np.array([float(p) for p in out.partials]) / jf


def grad_log_jacobian_batch(smooth_map: SmoothMap, coords):
    """Batched gradient of log JF; coords are d arrays of equal shape.

    Degenerate points produce non-finite entries; callers are expected to
    check the returned JF against the floor and abort.
    """
    seeded = seed_jets(coords)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = generalized_jacobian_coords(smooth_map, seeded)
        jf = out.value
        return [p / jf for p in out.partials], jf


def normal_hessian_det(smooth_map: SmoothMap, x, zero_tol: float = 1e-9) -> float:
    """Determinant of the normal-space projection of the Hessian of ||F||^2.

    The normal basis comes from Gram-Schmidt on the rows of DF(x), with a
    re-orthogonalization pass for stability.  At a zero of F the value
    equals 2^p JF(x)^2 (the Hessian of ||F||^2 there is 2 DF^T DF).
    """
    x = np.asarray(x, dtype=float)
    fx = np.asarray(smooth_map.eval(list(x)), dtype=float)
    if np.linalg.norm(fx) > zero_tol:
        raise ValueError(
            f"point is off the zero set: ||F(x)|| = {np.linalg.norm(fx):.3e} > {zero_tol}")
    J = jacobian(smooth_map, x)
    jf = generalized_jacobian(smooth_map, x)
    if jf <= JACOBIAN_FLOOR:
        raise DegenerateJacobianError(f"JF(x) = {jf:.3e} vanishes on the zero set")
    # orthonormal basis of the normal space, following the row order of DF
    basis = []
    for row in J:
        v = row.astype(float)
        for _ in range(2):  # re-orthogonalization pass
            for b in basis:
                v = v - (v @ b) * b
        n = np.linalg.norm(v)
        if n <= 1e-14:
            raise DegenerateJacobianError("DF rows are linearly dependent")
        basis.append(v / n)
    O = np.stack(basis, axis=1)  # d x p

    sq_map = _norm_sq_map(smooth_map)
    from .jets import hessian
    H = hessian(sq_map, x)
    return float(np.linalg.det(O.T @ H @ O))


def _norm_sq_map(smooth_map: SmoothMap) -> SmoothMap:
    def ev(c):
        out = smooth_map.eval(c)
        acc = out[0] * out[0]
        for o in out[1:]:
            acc = acc + o * o
        return [acc]
    return SmoothMap(id=f"{smooth_map.id}_norm_sq", params={}, d=smooth_map.d,
                     p=1, eval=ev, domain_box=smooth_map.domain_box,
                     growth=smooth_map.growth)


# -- conic level-set integrals -----------------------------------------------

@dataclass(frozen=True)
class LevelSetIntegralSpec:
    """Line integral of phi Psi / JF over the conic level set F = t."""

    a1: float
    a2: float
    t: float
    phi: str = "one"
    psi: str = "one"
    nodes: int = 256

    def __post_init__(self):
        if self.a1 <= 0 or self.a2 <= 0:
            raise ValueError("conic coefficients must be positive")
        if self.t <= -1:
            raise ValueError("level t must exceed -1 (degenerate conic level)")
        if self.nodes < 16:
            raise ValueError("need at least 16 quadrature nodes")


def _conic_angular_factors(a1, a2, theta):
    """r(theta), arc-length factor l(theta) for the unit-level conic."""
    c2 = np.cos(theta) ** 2
    g = a2 + (a1 - a2) * c2
    r = g ** -0.5
    ell = np.sqrt(a2 ** 2 + (a1 ** 2 - a2 ** 2) * c2) * g ** -1.5
    return r, ell


def conic_levelset_integral(spec: LevelSetIntegralSpec) -> float:
    """Gauss-Legendre angular quadrature of the level-set line integral.

    The level set a1 x1^2 + a2 x2^2 = 1 + t is the unit-level curve scaled
    by sqrt(1 + t); the arc-length factor scales the same way.
    """
    from .catalog import build_map
    cmap = build_map("conic", a1=spec.a1, a2=spec.a2)
    phi = catalog_function(spec.phi)
    psi = Weight(kind="jf") if spec.psi == "jf" else None
    psi_fn = catalog_function(spec.psi) if psi is None else None
    s = math.sqrt(1.0 + spec.t)

    n_panels = max(8, spec.nodes // 16)
    edges = np.linspace(-np.pi, np.pi, n_panels + 1)
    segs = list(zip(edges[:-1], edges[1:]))

    def f(theta):
        r, ell = _conic_angular_factors(spec.a1, spec.a2, theta)
        x1 = s * r * np.cos(theta)
        x2 = s * r * np.sin(theta)
        jf = 2.0 * np.sqrt(spec.a1 ** 2 * x1 ** 2 + spec.a2 ** 2 * x2 ** 2)
        w = (psi.evaluate(cmap, [x1, x2]) if psi is not None
             else psi_fn([x1, x2]))
        return phi([x1, x2]) * w * (s * ell) / jf

    return integrate_segments(f, segs, order=16)


def conic_preimage_arc(a1, a2, t, fn, nodes=256):
    """Integral of fn(x1, x2) over the level curve against arc length."""
    s = math.sqrt(1.0 + t)
    n_panels = max(8, nodes // 16)
    edges = np.linspace(-np.pi, np.pi, n_panels + 1)

    def f(theta):
        r, ell = _conic_angular_factors(a1, a2, theta)
        return fn(s * r * np.cos(theta), s * r * np.sin(theta)) * (s * ell)

    return integrate_segments(f, zip(edges[:-1], edges[1:]), order=16)


# -- coarea identity check -----------------------------------------------------

@dataclass(frozen=True)
class CoareaReport:
    """Ambient integral vs iterated level-set integral of the same mass."""

    lhs: float
    rhs: float
    rel_residual: float
    orders: dict

    @staticmethod
    def build(lhs, rhs, orders):
        rel = abs(lhs - rhs) / (abs(lhs) + abs(rhs))
        return CoareaReport(lhs=lhs, rhs=rhs, rel_residual=rel, orders=dict(orders))


def coarea_residual(smooth_map: SmoothMap, k: int, eps: float,
                    phi: str = "one", psi: str = "one",
                    theta_panels: int = 32, t_panels: int = 24,
                    order: int = 16) -> CoareaReport:
    """Two independent quadratures of the same Gibbs mass on the conic.

    lhs integrates phi Psi exp(-|F|^k/eps) over the plane (polar grid with
    radial refinement at the ring); rhs integrates exp(-|t|^k/eps) L_t(phi)
    over levels t, where L_t is the level-set line integral.  Agreement is
    the quadrature form of the coarea identity.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if smooth_map.id != "conic":
        raise ValueError("coarea check is implemented for the conic family")
    a1 = smooth_map.params["a1"]
    a2 = smooth_map.params["a2"]

    from .quadrature import GibbsSpec
    weight = Weight(kind="jf") if psi == "jf" else Weight(kind="one")
    if psi not in ("one", "jf"):
        raise ValueError("psi must be 'one' or 'jf' for the coarea check")
    phi_fn = catalog_function(phi)
    spec = GibbsSpec(map=smooth_map, k=k, eps=eps, weight=weight)
    from .quadrature import _gibbs_integral_2d
    lhs = _gibbs_integral_2d(spec, phi_fn, panels=2 * theta_panels, order=order)

    # rhs: t-integral with panels refined near t = 0
    sig_t = (eps * math.log(1e18)) ** (1.0 / k)
    t_hi = max(3.0 * sig_t, 1e-3)
    segs = refined_partition(-1.0 + 1e-12, t_hi, [0.0], [2.0 * sig_t],
                             coarse_panels=t_panels, window_panels=t_panels)
    nodes, weights = segment_nodes(segs, order=16)
    rhs = 0.0
    for t, w in zip(nodes, weights):
        ls = conic_levelset_integral(LevelSetIntegralSpec(
            a1=a1, a2=a2, t=float(t), phi=phi, psi=psi,
            nodes=16 * theta_panels))
        rhs += w * math.exp(-abs(t) ** k / eps) * ls
    return CoareaReport.build(lhs, rhs, {
        "theta_panels": theta_panels, "t_panels": t_panels, "order": order})
