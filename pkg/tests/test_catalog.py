import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelset_gibbs.catalog import (Weight, _h_bump, build_family, build_map,
                                    compose, eval_family, jacobian_weight_for,
                                    shifted_map, validate_growth,
                                    validate_weight_bound)
from levelset_gibbs.jets import Jet


def test_map_dimensions():
    assert (build_map("quartic").d, build_map("quartic").p) == (1, 1)
    assert (build_map("conic").d, build_map("conic").p) == (2, 1)
    assert (build_map("strophoid").d, build_map("strophoid").p) == (1, 2)
    assert (build_map("line").d, build_map("line").p) == (1, 1)


def test_quartic_zero_set():
    q = build_map("quartic")
    assert [z[0] for z in q.known_zeros] == [0.0, 0.5, 1.7, 2.5]
    for z in q.known_zeros:
        assert abs(q.eval([z[0]])[0]) <= 1e-12


def test_declared_zeros_vanish():
    for mid in ("quartic", "conic", "strophoid", "line"):
        m = build_map(mid)
        for z in m.known_zeros:
            vals = np.asarray(m.eval(list(z)), dtype=float)
            assert np.linalg.norm(vals) <= 1e-12


def test_invalid_conic_coefficients():
    with pytest.raises(ValueError):
        build_map("conic", a1=-1.0, a2=4.0)


def test_unknown_map_id():
    with pytest.raises(ValueError):
        build_map("parabola")


@pytest.mark.parametrize("map_id", ["quartic", "conic", "strophoid", "line"])
def test_growth_certificates(map_id):
    assert validate_growth(build_map(map_id)) >= 0.0


def test_weight_positive_at_zeros():
    for mid in ("quartic", "conic", "strophoid"):
        m = build_map(mid)
        w = jacobian_weight_for(m)
        for z in m.known_zeros:
            assert w.evaluate(m, list(z)) > 0


def test_weight_bound_on_box():
    q = build_map("quartic")
    w = jacobian_weight_for(q)
    assert validate_weight_bound(w, q, alpha_k=q.growth.alpha * 2)


def test_eq13_values():
    assert eval_family("eq13", 0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert eval_family("eq13", math.pi / 3.0, 0.0) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("z", [-0.5, 0.0, 0.5])
@pytest.mark.parametrize("side", [1.0, -1.0])
def test_eq13_c1_across_breakpoints(z, side):
    # interior and exterior branch expressions at x = +/- pi differ only by
    # the bump h, and h(0) = h'(0) = 0 exactly
    fam = build_family("eq13")
    x = side * math.pi
    inner_val = float(fam.eval(x, z))
    outer_val = inner_val + _h_bump(0.0)
    assert abs(inner_val - outer_val) <= 1e-12
    bump = _h_bump(Jet(0.0, [1.0]))
    assert abs(bump.partials[0]) <= 1e-12  # first-derivative jump is the bump slope


def test_eq13_second_derivative_jump_is_finite():
    fam = build_family("eq13")
    d2_in = float(fam.d2u_dx2(math.pi - 1e-7, 0.0))
    d2_out = float(fam.d2u_dx2(math.pi + 1e-7, 0.0))
    assert d2_in == pytest.approx(9.0, abs=1e-5)
    assert d2_out == pytest.approx(9.0, abs=1e-5)  # h''(0) = 0


@given(st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=20),
       st.floats(-8.0, 8.0))
@settings(max_examples=60, deadline=None)
def test_empirical_mean_reduction(zs, x):
    # the empirical-mean potential built from the family equals the family
    # at the mean parameter
    fam = build_family("eq13")
    u_n = np.mean([fam.eval(x, z) for z in zs])
    assert u_n == pytest.approx(fam.eval(x, float(np.mean(zs))), abs=1e-12)


def test_barrier_family():
    assert eval_family("barrier", 1, 0.7, k_index=0) == pytest.approx(0.7)
    assert eval_family("barrier", 0, 0.7, k_index=2) == 0.0
    assert eval_family("barrier", 1, 0.5, k_index=1) == pytest.approx(0.5 ** 3)
    with pytest.raises(ValueError):
        eval_family("barrier", 0.5, 0.7)


def test_unknown_family():
    with pytest.raises(ValueError):
        build_family("eq14")


def test_shifted_map():
    s = build_map("strophoid")
    sh = shifted_map(s, [0.25, 0.1])
    base = s.eval([0.7])
    moved = sh.eval([0.7])
    assert moved[0] == pytest.approx(base[0] - 0.25)
    assert moved[1] == pytest.approx(base[1] - 0.1)
    with pytest.raises(ValueError):
        shifted_map(s, [0.1])


def test_compose_dimension_mismatch():
    with pytest.raises(ValueError):
        compose(build_map("conic"), build_map("line"))


def test_weight_one_is_constant():
    q = build_map("quartic")
    w = Weight(kind="one")
    assert w.evaluate(q, [1.23]) == 1.0
    arr = w.evaluate(q, [np.array([0.0, 1.0])])
    assert np.array_equal(arr, np.ones(2))
