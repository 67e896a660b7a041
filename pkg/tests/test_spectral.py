import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadic import (DEFAULT_LAMBDA, CfConfig, ConfigurationError, ModelParams, alpha,
                    cf_tail, characteristic_X, eigenvector, find_eigenvalues,
                    jacobian, linearized_rhs, rhs)
from dyadic.spectral import (ContinuedFractionPole, ConvergenceFailure, NotAnEigenvalue,
                             _backward, cf_chain, functional_identity_residual,
                             scale_eigenvalue)

LAM = DEFAULT_LAMBDA

# Real zeros of X from 40-digit bisection on a depth-5000 continued fraction
# seeded with zero (oracle script kept outside the package).
MU1 = -1.4044119268426798
MU2 = -3.5395849528101653


def test_alpha_examples():
    assert np.allclose(alpha(np.arange(50), 0.0), LAM ** -0.5, rtol=1e-15)
    assert float(alpha(200, -3.0)) == pytest.approx(LAM ** -0.5, rel=1e-14)
    assert float(alpha(0, -1.3)) == pytest.approx(LAM ** (-1 / 6) * (LAM ** (-1 / 3) - 1.3), rel=1e-15)


def test_cf_tail_at_zero_is_constant():
    d, _ = cf_chain(0.0, 30)
    assert np.allclose(d, LAM ** -0.5, rtol=1e-15)


def test_cf_depth_doubling_at_minus_one():
    seed = LAM ** -0.5
    d100 = _backward(-1.0, 0, 100, seed, LAM)[0]
    d200 = _backward(-1.0, 0, 200, seed, LAM)[0]
    assert abs(d100 - d200) < 1e-12


def test_cf_tail_large_n_tends_to_limit():
    for mu in (-0.5, -3.0, 2.0):
        assert cf_tail(mu, 60) == pytest.approx(LAM ** -0.5, abs=1e-12)


def test_seeds_agree():
    zero_seed = CfConfig(tail_seed=0.0)
    for mu in (-0.7, -2.2, -4.9):
        assert characteristic_X(mu, zero_seed) == pytest.approx(characteristic_X(mu), abs=1e-12)


def test_cf_config_validation():
    with pytest.raises(ConfigurationError):
        CfConfig(depth=5)
    with pytest.raises(ConfigurationError):
        CfConfig(tolerance=0.0)


def test_convergence_failure_reported():
    with pytest.raises(ConvergenceFailure):
        cf_tail(-1.0, 0, CfConfig(depth=100, max_depth=150, tolerance=1e-300))


def test_pole_reported_with_shell_index():
    # a seed of -alpha_10 makes the first pivot vanish exactly
    cfg = CfConfig(depth=10, tail_seed=-float(alpha(10, 0.0)), max_depth=40)
    with pytest.raises(ContinuedFractionPole) as info:
        cf_chain(0.0, 0, cfg)
    assert info.value.j == 10


def test_X_at_zero():
    assert characteristic_X(0.0) == pytest.approx(2 ** -0.25, abs=1e-15)
    assert characteristic_X(0.0) == pytest.approx(0.840896, abs=1e-6)


@pytest.mark.parametrize("mu", [-0.5, -1.0, -2.0])
def test_functional_identity(mu):
    assert functional_identity_residual(mu) < 1e-9


def test_X_negative_far_left():
    assert characteristic_X(-10.0) < 0


def test_two_roots_in_plotted_window():
    roots = find_eigenvalues((-5.0, -0.1))
    assert len(roots) == 2
    assert abs(roots[0] + 1.4) < 0.15 and abs(roots[1] + 3.6) < 0.15
    assert all(type(r) is float for r in roots)


def test_roots_match_deep_oracle():
    roots = find_eigenvalues((-5.0, -0.1))
    assert roots[0] == pytest.approx(MU1, abs=1e-10)
    assert roots[1] == pytest.approx(MU2, abs=1e-10)


def test_default_window_rejects_pole():
    # X changes sign across a pole near mu = -4.45; that bracket is dropped
    assert len(find_eigenvalues()) == 2


def test_no_positive_roots():
    assert find_eigenvalues((1e-4, 10.0)) == []


def test_X_positive_for_nonnegative_mu():
    for mu in np.linspace(0, 10, 200):
        assert characteristic_X(mu) > 0


def test_root_interval_validation():
    with pytest.raises(ConfigurationError):
        find_eigenvalues((-1.0, -2.0))


@pytest.mark.parametrize("mu", [MU1, MU2])
def test_eigenvector(mu):
    ev = eigenvector(mu, 40)
    assert ev.c[0] == 1.0
    assert ev.residual < 1e-8
    ratios = np.log(ev.c[21:] / ev.c[20:-1]) / math.log(LAM)
    assert np.all(np.abs(ratios + 1 / 3) < 1e-3)


def test_eigenvector_rejects_non_root():
    with pytest.raises(NotAnEigenvalue):
        eigenvector(-2.0, 20)


def test_linearized_examples():
    assert not linearized_rhs(np.zeros(6)).any()
    out = linearized_rhs(np.eye(5)[0])
    assert out[:2] == pytest.approx([-2 ** (-5 / 6), 2.0], rel=1e-14)
    assert not out[2:].any()
    assert out[0] == pytest.approx(-0.56123, abs=1e-5)


@pytest.mark.parametrize("mu", [MU1, MU2])
def test_linearized_on_eigenvector(mu):
    ev = eigenvector(mu, 30)
    lin = linearized_rhs(ev.c)[:-1]
    scale = LAM ** (2 * np.arange(30) / 3) * np.abs(ev.c[:-1])
    assert np.max(np.abs(lin - mu * ev.c[:-1]) / scale) < 1e-8


def test_finite_difference_linearization():
    n = 16
    p = ModelParams(n, [LAM ** (-1 / 3)])
    fp = LAM ** (-np.arange(n + 1) / 3)
    b = eigenvector(MU1, n).c
    lin = linearized_rhs(b)
    errs = []
    for eps in (1e-3, 1e-4, 1e-5):
        fd = (rhs(p, fp + eps * b) - rhs(p, fp)) / eps
        errs.append(np.max(np.abs(fd - lin)[:-1]))
    # first-order error: each tenfold reduction of eps cuts the error ~tenfold
    assert errs[1] < errs[0] / 5 and errs[2] < errs[1] / 5


@settings(max_examples=30, deadline=None)
@given(b=st.lists(st.floats(-1, 1), min_size=3, max_size=10))
def test_linearization_matches_jacobian(b):
    b = np.array(b)
    n = b.size - 1
    p = ModelParams(n, [LAM ** (-1 / 3)])
    fp = LAM ** (-np.arange(n + 1) / 3)
    jb = jacobian(p, fp) @ b
    # the last row depends on the closure and is excluded
    assert np.allclose(jb[:-1], linearized_rhs(b)[:-1], rtol=1e-12, atol=1e-12 * LAM ** n)


def test_eigenvector_sobolev_threshold():
    c = eigenvector(MU1, 60).c
    j = np.arange(61)
    for s, converges in ((0.8, True), (0.9, False)):
        terms = 2.0 ** (2 * s * j) * c ** 2
        ratio = terms[41:] / terms[40:-1]
        if converges:
            assert np.all(ratio < 1)
        else:
            assert np.all(ratio > 1)
    assert ratio == pytest.approx(2 ** 1.8 * LAM ** (-2 / 3), rel=1e-6)


def test_scale_eigenvalue():
    assert scale_eigenvalue(MU1, LAM ** (-1 / 3)) == pytest.approx(MU1, rel=1e-15)
    assert scale_eigenvalue(-1.0, 4 * LAM ** (-1 / 3)) == pytest.approx(-2.0, rel=1e-14)


def test_depth_convergence_over_grid():
    cfg = CfConfig()
    for mu in np.linspace(-5, 0, 41):
        try:
            d, depth = cf_chain(mu, 0, cfg)
        except ContinuedFractionPole:
            continue
        deeper, _ = cf_chain(mu, 0, CfConfig(depth=2 * depth))
        assert abs(d[0] - deeper[0]) < cfg.tolerance


def test_functional_identity_over_grid():
    for mu in np.linspace(-5, 3, 33):
        try:
            r = functional_identity_residual(mu)
        except ContinuedFractionPole:
            continue
        x = characteristic_X(mu)
        if abs(x) > 1e3:
            continue
        assert r < 1e-9
