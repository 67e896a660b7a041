import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dyadic import (DEFAULT_LAMBDA, ConfigurationError, ModelParams, box_energy,
                    distance, energy, energy_flux, jacobian, rhs, sobolev_norm)

LAM = DEFAULT_LAMBDA


def single_mode_state(f0, n, lam=LAM):
    j = np.arange(n + 1)
    return lam ** (-j / 3 + 1 / 6) * math.sqrt(f0)


# ---------------------------------------------------------------- params

def test_default_lambda():
    assert LAM == 2 ** 2.5


@pytest.mark.parametrize("kwargs, word", [
    (dict(n_shells=0), "n_shells"),
    (dict(n_shells=3, lam=1.0), "lambda"),
    (dict(n_shells=3, forcing=[-1.0]), "forcing"),
    (dict(n_shells=3, forcing=[0, 0, 0, 0, 1.0]), "beyond"),
    (dict(n_shells=3, closure="periodic"), "closure"),
])
def test_params_validation(kwargs, word):
    with pytest.raises(ConfigurationError, match=word):
        ModelParams(**kwargs)


def test_forcing_is_padded_and_frozen():
    p = ModelParams(4, [1.0, 0.5])
    assert p.forcing.tolist() == [1.0, 0.5, 0, 0, 0]
    with pytest.raises(ValueError):
        p.forcing[0] = 3.0


def test_with_shells_keeps_forcing():
    p = ModelParams(4, [1.0, 0.5]).with_shells(10)
    assert p.size == 11 and p.forcing[1] == 0.5


# ---------------------------------------------------------------- rhs

def test_rhs_zero():
    assert np.all(rhs(ModelParams(5), np.zeros(6)) == 0)


def test_rhs_hand_values():
    # (-1, 1 - lam, lam), evaluated by hand
    out = rhs(ModelParams(2), [1.0, 1.0, 1.0])
    assert out == pytest.approx([-1.0, 1.0 - 2 ** 2.5, 2 ** 2.5], abs=1e-14)
    assert out[1] == pytest.approx(-4.65685, abs=1e-5)


def test_rhs_length_mismatch():
    with pytest.raises(ConfigurationError, match="shape"):
        rhs(ModelParams(3), np.zeros(3))


@pytest.mark.parametrize("f0", [LAM ** (-1 / 3), 1.0, 4.0])
def test_rhs_vanishes_on_interior_at_fixed_point(f0):
    n = 12
    a = single_mode_state(f0, n)
    d = rhs(ModelParams(n, [f0]), a)
    scale = LAM ** (np.arange(n) / 3)
    assert np.max(np.abs(d[:-1]) / scale) < 1e-14


def test_zero_closure_leaves_boundary_gain():
    n, f0 = 10, 1.0
    d = rhs(ModelParams(n, [f0]), single_mode_state(f0, n))
    # the boundary shell keeps its incoming flux: lam**(N-1) a_{N-1}**2
    assert d[-1] == pytest.approx(LAM ** (n / 3) * f0, rel=1e-12)


def test_geometric_closure_makes_fixed_point_stationary():
    n, f0 = 10, 1.0
    d = rhs(ModelParams(n, [f0], closure="geometric"), single_mode_state(f0, n))
    assert np.max(np.abs(d) / LAM ** (np.arange(n + 1) / 3)) < 1e-14


@pytest.mark.parametrize("closure", ["zero", "geometric"])
def test_jacobian_matches_finite_differences(closure):
    rng = np.random.default_rng(3)
    p = ModelParams(6, [0.7, 0.2], closure=closure)
    a = rng.uniform(0.1, 1.0, 7)
    jac = jacobian(p, a)
    h = 1e-7
    fd = np.column_stack([(rhs(p, a + h * e) - rhs(p, a - h * e)) / (2 * h)
                          for e in np.eye(7)])
    assert np.allclose(jac, fd, rtol=1e-6, atol=1e-6)


states = arrays(np.float64, st.integers(2, 12),
                elements=st.floats(-3, 3, allow_nan=False, allow_infinity=False))


@settings(max_examples=60, deadline=None)
@given(a=states, gamma=st.floats(0.1, 10), fs=st.lists(st.floats(0, 2), min_size=1, max_size=3))
def test_scaling_symmetry(a, gamma, fs):
    n = a.size - 1
    f = np.array(fs[: n + 1])
    lhs = rhs(ModelParams(n, gamma ** 2 * f), gamma * a)
    r = gamma ** 2 * rhs(ModelParams(n, f), a)
    assert np.allclose(lhs, r, rtol=1e-12, atol=1e-12 * np.max(np.abs(r), initial=1.0))


@settings(max_examples=60, deadline=None)
@given(a=states, fs=st.lists(st.floats(0, 2), min_size=1, max_size=3))
def test_telescoping_energy_identity(a, fs):
    n = a.size - 1
    p = ModelParams(n, fs[: n + 1])
    lhs = float(np.dot(a, rhs(p, a)))
    mag = float(np.sum(np.abs(a) * np.abs(rhs(p, a)))) + LAM ** n * np.max(a * a) * np.max(np.abs(a))
    assert lhs == pytest.approx(float(np.dot(p.forcing, a)), abs=1e-12 * mag + 1e-14)


@settings(max_examples=60, deadline=None)
@given(a=arrays(np.float64, st.integers(3, 10), elements=st.floats(0, 2)),
       fs=st.lists(st.floats(0, 2), min_size=1, max_size=3), data=st.data())
def test_box_flux_identity(a, fs, data):
    n = a.size - 1
    J = data.draw(st.integers(1, n))
    p = ModelParams(n, fs[: n + 1])
    d = rhs(p, a)
    lhs = float(np.dot(a[J:], d[J:]))
    expected = energy_flux(p, a, J) + float(np.dot(p.forcing[J:], a[J:]))
    mag = LAM ** n * 8 + 1
    assert lhs == pytest.approx(expected, abs=1e-12 * mag)
    assert expected >= 0


# ---------------------------------------------------------------- functionals

def test_energy_examples():
    assert energy(np.zeros(4)) == 0
    assert energy([1, 1, 0, 0]) == 1


def test_energy_of_truncated_fixed_point():
    n = 40
    closed = 0.5 * 2 ** (5 / 6) * (1 - 2 ** (-5 * (n + 1) / 3)) / (1 - 2 ** (-5 / 3))
    assert energy(single_mode_state(1.0, n)) == pytest.approx(closed, rel=1e-14)


def test_sobolev_examples():
    rng = np.random.default_rng(0)
    a = rng.normal(size=9)
    assert sobolev_norm(a, 0) == pytest.approx(np.linalg.norm(a), rel=1e-15)
    assert sobolev_norm(np.eye(6)[3], 1) == 8.0


@pytest.mark.parametrize("f0", [0.3, 1.0, 4.0])
def test_fixed_point_is_flat_in_critical_norm(f0):
    n = 30
    sq = sobolev_norm(single_mode_state(f0, n), 5 / 6) ** 2
    assert sq == pytest.approx((n + 1) * 2 ** (5 / 6) * f0, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(a=states, s1=st.floats(0, 3), s2=st.floats(0, 3))
def test_sobolev_monotone_in_s(a, s1, s2):
    lo, hi = sorted((s1, s2))
    assert sobolev_norm(a, lo) <= sobolev_norm(a, hi) * (1 + 1e-14)


def test_box_energy_examples():
    a = np.array([1.0, 1.0, 1.0])
    assert box_energy(a, 0) == energy(a)
    assert box_energy(a, 2) == 0.5
    with pytest.raises(ConfigurationError):
        box_energy(a, 3)


def test_box_energy_of_fixed_point_tail():
    n, J = 40, 7
    a = single_mode_state(1.0, n)
    r = 2 ** (-5 / 3)
    closed = 0.5 * 2 ** (5 / 6) * r ** J * (1 - r ** (n + 1 - J)) / (1 - r)
    assert box_energy(a, J) == pytest.approx(closed, rel=1e-13)


@pytest.mark.parametrize("f0", [0.5, 1.0, 3.0])
def test_flux_is_constant_at_fixed_point(f0):
    n = 20
    p = ModelParams(n, [f0])
    a = single_mode_state(f0, n)
    eps = 2 ** (5 / 12) * f0 ** 1.5
    for J in range(1, n + 1):
        assert energy_flux(p, a, J) == pytest.approx(eps, rel=1e-13)


def test_flux_examples():
    p = ModelParams(4)
    assert energy_flux(p, [1, 0, 3, 1, 1], 2) == 0
    with pytest.raises(ConfigurationError):
        energy_flux(p, np.ones(5), 0)
    with pytest.raises(ConfigurationError):
        energy_flux(p, np.ones(5), 5)


def test_distance_examples():
    a = single_mode_state(1.0, 5)
    assert distance(a, a) == 0
    assert distance([1, 0], [0, 1]) == pytest.approx(math.sqrt(2))
    b = a.copy()
    b[0] += 1e-3
    assert distance(b, a) == pytest.approx(1e-3, rel=1e-9)
    with pytest.raises(ConfigurationError):
        distance([1, 2], [1, 2, 3])
