import math

import numpy as np
import pytest

from ptreach import (
    ConfigError,
    HorizonWarning,
    analytic_a0_b0,
    derive_constants,
    lie_a0,
    lie_b0,
    make_example,
    zeta,
)


def test_zeta_values():
    assert zeta(0.0) == 0.0
    # 0.8*tanh(1); the 0.2*e^-100 term is far below machine epsilon
    assert zeta(1.0) == pytest.approx(0.8 * math.tanh(1.0), rel=1e-15)
    assert zeta(1.0) == pytest.approx(0.609275, abs=1e-6)


def test_zeta_odd_symmetry():
    rng = np.random.default_rng(3)
    for v in rng.uniform(-4, 4, size=200):
        assert zeta(-v) == pytest.approx(-zeta(v), abs=1e-15)


def test_analytic_a0_b0_examples():
    a0, b0 = analytic_a0_b0([1.5, 0.0])
    assert a0 == pytest.approx(7.03125, abs=1e-12)
    assert b0 == pytest.approx(5.625, abs=1e-12)
    assert analytic_a0_b0([1.0, 0.0]) == (0.0, 0.0)
    a0, b0 = analytic_a0_b0([0.0, 1.5])
    assert a0 == pytest.approx(3.39430, abs=1e-4)
    assert b0 == pytest.approx(5.625, abs=1e-12)


def test_analytic_matches_generic_lie_derivatives(example):
    bundle, _, _ = example
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        x = rng.uniform(-2.5, 2.5, size=2)
        a0, b0 = analytic_a0_b0(x)
        assert lie_a0(bundle.clf, bundle.model, x) == pytest.approx(a0, rel=1e-12, abs=1e-14)
        assert lie_b0(bundle.clf, bundle.model, x) == pytest.approx(b0, rel=1e-12, abs=1e-14)


def test_open_loop_divergence(example):
    # with u = 0, V grows everywhere outside the disk off the measure-zero set
    rng = np.random.default_rng(17)
    n = 0
    while n < 500:
        x = rng.uniform(-2.0, 2.0, size=2)
        q = x[0] ** 2 + x[1] ** 2
        if q <= 1.0001 or abs(x[0]) < 1e-6:
            continue
        a0, _ = analytic_a0_b0(x)
        assert a0 > 0.0
        n += 1


def test_make_example_defaults():
    with pytest.warns(HorizonWarning):
        bundle, cfg = make_example()
    dc = derive_constants(cfg)
    assert dc.T_min == pytest.approx(5.0, abs=1e-12)
    assert dc.dm_threshold == pytest.approx(0.545779, abs=1e-6)
    b = bundle.analytic_bounds
    assert (b.k1, b.k2, b.l, b.c1, b.c2) == (2.0, 8.0, 12.0, 0.5, 0.5)
    assert b.domain_annulus == (0.0, 3.0)


def test_make_example_no_warning_above_floor(recwarn):
    make_example(T=5.01)
    assert not [w for w in recwarn if issubclass(w.category, HorizonWarning)]


def test_make_example_threshold_scaling():
    _, cfg_base = make_example()
    _, cfg_double = make_example(u_max=14.0)
    r = derive_constants(cfg_double).dm_threshold / derive_constants(cfg_base).dm_threshold
    assert r == pytest.approx(4.0, rel=1e-12)


def test_make_example_rejects_degenerate_annulus():
    with pytest.raises(ConfigError):
        make_example(R=1.0)


def test_drift_tangent_on_boundary(example):
    # p = 0 kills the radial term: the drift is pure rotation on bd(S)
    bundle, _, _ = example
    for phi in np.linspace(0, 2 * math.pi, 17):
        x = np.array([math.cos(phi), math.sin(phi)])
        f = bundle.model.drift(x)
        assert float(np.dot(f, x)) == pytest.approx(0.0, abs=1e-12)
