import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelset_gibbs.catalog import (GrowthCertificate, SmoothMap, build_family,
                                    build_map, compose, family_as_map)
from levelset_gibbs.jets import fd_check, hessian, jacobian

ALL_MAP_IDS = ("quartic", "conic", "strophoid", "line")


def make_map(eval_fn, d, p, box=((-2.0, 2.0),)):
    return SmoothMap(id="adhoc", params={}, d=d, p=p, eval=eval_fn,
                     domain_box=box * (d // len(box) + 1) if len(box) < d else box,
                     growth=GrowthCertificate(m=1.0, alpha=1.0, R=0.0))


identity2 = make_map(lambda c: [c[0], c[1]], 2, 2, ((-2, 2), (-2, 2)))
norm_sq2 = make_map(lambda c: [c[0] * c[0] + c[1] * c[1]], 2, 1, ((-2, 2), (-2, 2)))


def test_jacobian_identity_2d():
    for x in ([0.0, 0.0], [1.3, -0.7], [5.0, 2.0]):
        assert np.allclose(jacobian(identity2, x), np.eye(2), atol=0)


def test_jacobian_quartic_at_zero():
    q = build_map("quartic")
    J = jacobian(q, [0.0])
    assert J.shape == (1, 1)
    assert J[0, 0] == pytest.approx(-2.125, abs=1e-14)


def test_jacobian_conic_example():
    c = build_map("conic", a1=1.0, a2=4.0)
    assert np.allclose(jacobian(c, [1.0, 0.0]), [[2.0, 0.0]], atol=1e-14)


def test_jacobian_rejects_bad_input():
    q = build_map("quartic")
    with pytest.raises(ValueError):
        jacobian(q, [1.0, 2.0])
    with pytest.raises(ValueError):
        jacobian(q, [float("nan")])


def test_hessian_norm_sq():
    for x in ([0.3, -1.1], [0.0, 0.0]):
        assert np.allclose(hessian(norm_sq2, x), 2.0 * np.eye(2), atol=1e-13)


def test_hessian_conic_norm_on_zero_set():
    c = build_map("conic", a1=1.0, a2=4.0)

    def ev(coords):
        f = c.eval(coords)[0]
        return [f * f]

    u = make_map(ev, 2, 1, ((-2, 2), (-2, 2)))
    H = hessian(u, [1.0, 0.0])
    assert np.allclose(H, [[8.0, 0.0], [0.0, 0.0]], atol=1e-12)


def test_hessian_eq13_reference_curvature():
    fam_map = family_as_map(build_family("eq13"), 0.0)
    H = hessian(fam_map, [math.pi / 3.0])
    assert H[0, 0] == pytest.approx(9.0, abs=1e-10)


def test_hessian_requires_scalar_map():
    with pytest.raises(ValueError):
        hessian(identity2, [0.0, 0.0])


def test_hessian_symmetry_catalog():
    rng = np.random.default_rng(0)
    c = build_map("conic", a1=1.0, a2=4.0)

    def ev(coords):
        f = c.eval(coords)[0]
        return [f * f]

    u = make_map(ev, 2, 1, ((-3, 3), (-3, 3)))
    for _ in range(50):
        x = rng.uniform(-3, 3, 2)
        H = hessian(u, x)
        assert np.abs(H - H.T).max() <= 1e-12 * (1.0 + np.abs(H).max())


def test_fd_check_identity_is_zero():
    # at the origin the stencil arithmetic is exact, so the report is 0
    assert fd_check(identity2, [0.0, 0.0], 1e-5).max_rel_discrepancy == 0.0
    assert fd_check(identity2, [0.4, -0.9], 1e-5).max_rel_discrepancy <= 1e-9


def test_fd_check_quartic():
    q = build_map("quartic")
    assert fd_check(q, [1.1], 1e-5).max_rel_discrepancy <= 1e-6


def test_fd_check_flags_breakpoint():
    fam_map = family_as_map(build_family("eq13"), 0.0)
    rep = fd_check(fam_map, [math.pi], 1e-5)
    assert rep.breakpoint_adjacent
    rep_inner = fd_check(fam_map, [1.0], 1e-5)
    assert not rep_inner.breakpoint_adjacent
    assert rep_inner.max_rel_discrepancy <= 1e-6


@pytest.mark.parametrize("map_id", ALL_MAP_IDS)
def test_fd_check_random_points(map_id):
    smap = build_map(map_id)
    rng = np.random.default_rng(42)
    box = np.asarray(smap.domain_box, dtype=float)
    for _ in range(100):
        x = rng.uniform(box[:, 0], box[:, 1])
        assert fd_check(smap, x, 1e-5).max_rel_discrepancy <= 1e-6


def test_fd_check_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_check(build_map("line"), [0.0], 0.0)


@given(st.floats(-1.5, 4.5))
@settings(max_examples=40, deadline=None)
def test_chain_rule_composition(x):
    q = build_map("quartic")
    line = build_map("line")
    comp = compose(q, line)  # quartic(line(x)) == quartic(x)
    j_comp = jacobian(comp, [x])[0, 0]
    j_prod = jacobian(q, [x])[0, 0] * jacobian(line, [x])[0, 0]
    assert j_comp == pytest.approx(j_prod, rel=1e-12, abs=1e-12)


def test_chain_rule_quartic_of_quartic():
    q = build_map("quartic")
    comp = compose(q, q)
    for x in (0.1, 0.45, 2.0):
        inner = q.eval([x])[0]
        j_prod = jacobian(q, [inner])[0, 0] * jacobian(q, [x])[0, 0]
        assert jacobian(comp, [x])[0, 0] == pytest.approx(j_prod, rel=1e-12)
