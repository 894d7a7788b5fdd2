"""Conserved-density recursion, canonical forms, and gradient tests."""

from fractions import Fraction

import numpy as np
import pytest

from kdvlab.densities import (
    DensityPolynomial,
    canonical_energy_density,
    energy_density,
    energy_gradient,
    eval_energy,
    euler_lagrange_residual,
    sigma_density,
    variational_derivative,
)
from kdvlab.grid import DEFAULT_GRID, GridFunction
from kdvlab.soliton import SolitonConfig, eval_multisoliton


def _smooth_sample(seed=0):
    rng = np.random.default_rng(seed)
    a, b, c = rng.normal(size=3)
    return GridFunction.from_callable(
        DEFAULT_GRID,
        lambda x: np.exp(-(x**2) / 6) * (a + b * np.sin(x) + c * x),
    )


def test_sigma_low_orders():
    u = DensityPolynomial.u()
    assert sigma_density(1) == u
    assert sigma_density(2) == DensityPolynomial({(1,): -1})
    assert sigma_density(3) == DensityPolynomial({(2,): 1, (0, 0): -1})


def test_even_sigma_integrates_to_zero():
    # even densities are total derivatives, so they integrate to zero
    f = _smooth_sample(3)
    for m in (2, 4, 6):
        assert abs(sigma_density(m).evaluate(f)) < 1e-9


def test_canonical_energy_tables():
    assert canonical_energy_density(1) == DensityPolynomial({(0, 0): Fraction(1, 2)})
    assert canonical_energy_density(2) == DensityPolynomial(
        {(1, 1): Fraction(1, 2), (0, 0, 0): 1}
    )
    assert canonical_energy_density(3) == DensityPolynomial(
        {(2, 2): Fraction(1, 2), (0, 1, 1): 5, (0, 0, 0, 0): Fraction(5, 2)}
    )


def test_canonical_matches_raw_density():
    # reduction only moves total derivatives, so integrals agree
    f = _smooth_sample(11)
    for n in range(1, 5):
        raw = energy_density(n).evaluate(f)
        canon = canonical_energy_density(n).evaluate(f)
        assert canon == pytest.approx(raw, rel=1e-9, abs=1e-12)


def test_energy_of_solitons():
    cfg = SolitonConfig((2.0, 1.0), (0.0, 0.0))
    u = eval_multisoliton(cfg, DEFAULT_GRID)
    for n in range(1, 4):
        exact = (-1) ** (n + 1) * 2 ** (2 * n + 1) / (2 * n + 1) * (
            2.0 ** (2 * n + 1) + 1.0
        )
        assert eval_energy(n, u) == pytest.approx(exact, rel=1e-10)
    # single soliton values: E1 = 8/3, E2 = -32/5, E3 = 128/7
    one = eval_multisoliton(SolitonConfig((1.0,), (0.0,)), DEFAULT_GRID)
    assert eval_energy(1, one) == pytest.approx(8.0 / 3.0, rel=1e-10)
    assert eval_energy(2, one) == pytest.approx(-32.0 / 5.0, rel=1e-10)
    assert eval_energy(3, one) == pytest.approx(128.0 / 7.0, rel=1e-10)


def test_energy_index_bounds():
    f = _smooth_sample(0)
    with pytest.raises(ValueError):
        eval_energy(0, f)
    with pytest.raises(ValueError):
        eval_energy(7, f)


def test_variational_derivative_annihilates_total_derivatives():
    p = DensityPolynomial({(0, 1): 2, (2,): -3})  # 2 u u' - 3 u'' = (u^2 - 3u')'
    assert variational_derivative(p) == DensityPolynomial()


def test_gradient_finite_difference():
    f = _smooth_sample(5)
    rng = np.random.default_rng(17)
    v = GridFunction.from_callable(
        DEFAULT_GRID, lambda x: np.exp(-(x**2) / 8) * np.cos(rng.normal() + x)
    )
    for n in (1, 2, 3):
        grad = energy_gradient(n, f)
        eps = 1e-6
        plus = eval_energy(n, f + eps * v)
        minus = eval_energy(n, f + (-eps) * v)
        fd = (plus - minus) / (2 * eps)
        pairing = DEFAULT_GRID.spacing * np.sum(grad.values * v.values)
        assert fd == pytest.approx(pairing, rel=1e-6, abs=1e-8)


def test_euler_lagrange_single_soliton():
    u = eval_multisoliton(SolitonConfig((1.0,), (0.0,)), DEFAULT_GRID)
    report = euler_lagrange_residual(u, 1, (-4.0,))
    assert report.relative_residual < 1e-8


def test_density_json_roundtrip():
    p = canonical_energy_density(3)
    again = DensityPolynomial.from_json(p.to_json())
    assert again == p


def test_repr_is_readable():
    p = DensityPolynomial({(1, 1): Fraction(1, 2)})
    assert "u'" in repr(p)
