"""Multisoliton construction and parameter-evolution tests."""

import math

import numpy as np
import pytest

from kdvlab.grid import DEFAULT_GRID, integrate
from kdvlab.soliton import (
    SolitonConfig,
    eval_multisoliton,
    evolve_config,
    multisoliton_values,
    single_soliton_center,
    superpose,
)


def test_config_validation():
    SolitonConfig((2.0, 1.0), (0.0, 0.0))
    with pytest.raises(ValueError):
        SolitonConfig((1.0, 2.0), (0.0, 0.0))  # not decreasing
    with pytest.raises(ValueError):
        SolitonConfig((2.0, -1.0), (0.0, 0.0))  # not positive
    with pytest.raises(ValueError):
        SolitonConfig((2.0, 1.0), (0.0,))  # length mismatch


def test_config_json_roundtrip():
    cfg = SolitonConfig((2.0, 1.0), (0.3, -0.7))
    again = SolitonConfig.from_json(cfg.to_json())
    assert again == cfg


def test_single_soliton_profile():
    beta, c = 1.3, 0.4
    cfg = SolitonConfig((beta,), (c,))
    x = DEFAULT_GRID.nodes
    x0 = single_soliton_center(beta, c)
    exact = -2.0 * beta**2 / np.cosh(beta * (x - x0)) ** 2
    assert np.max(np.abs(multisoliton_values(cfg, x) - exact)) < 1e-12


def test_evolve_config():
    cfg = SolitonConfig((1.0,), (0.0,))
    assert evolve_config(cfg, 0.0) == cfg
    assert evolve_config(cfg, 1.0).shifts == pytest.approx((4.0,))
    cfg2 = SolitonConfig((2.0, 1.0), (0.0, 0.0))
    assert evolve_config(cfg2, 0.5).shifts == pytest.approx((8.0, 2.0))


def test_two_soliton_mass():
    # integral of a multisoliton is -4 * sum(beta)
    cfg = SolitonConfig((2.0, 1.0), (0.0, 0.0))
    u = eval_multisoliton(cfg, DEFAULT_GRID)
    assert integrate(u) == pytest.approx(-4.0 * 3.0, rel=1e-10)


def test_extreme_shift_stability():
    # determinant evaluation must not overflow for large |c|
    cfg = SolitonConfig((2.0, 1.0), (25.0, -25.0))
    u = eval_multisoliton(cfg, DEFAULT_GRID)
    assert np.all(np.isfinite(u.values))
    assert integrate(u) == pytest.approx(-12.0, rel=1e-8)


def test_superpose_overlap():
    cfg = SolitonConfig((1.0,), (0.0,))
    both = superpose([cfg, cfg], [-20.0, 20.0], DEFAULT_GRID)
    single = eval_multisoliton(cfg, DEFAULT_GRID)
    h = DEFAULT_GRID.spacing
    norm_both = h * np.sum(both.values**2)
    norm_single = h * np.sum(single.values**2)
    assert abs(norm_both - 2.0 * norm_single) < 1e-6


def test_superpose_single_is_eval():
    cfg = SolitonConfig((1.5,), (0.2,))
    a = superpose([cfg], [0.0], DEFAULT_GRID)
    b = eval_multisoliton(cfg, DEFAULT_GRID)
    assert np.max(np.abs(a.values - b.values)) == 0.0


def test_center_formula():
    beta, c = 2.0, 1.0
    x0 = single_soliton_center(beta, c)
    assert x0 == pytest.approx(c - math.log(2.0 * beta) / (2.0 * beta))
