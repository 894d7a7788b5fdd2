"""Pseudospectral KdV evolution and manifold-distance tests."""

import numpy as np
import pytest

from kdvlab.evolution import (
    EvolutionSettings,
    SeamCollisionError,
    StabilityTrace,
    check_seam_clearance,
    conservation_drift,
    evolve_kdv,
    manifold_distance,
    orbital_stability_experiment,
)
from kdvlab.grid import DEFAULT_GRID, sobolev_norm
from kdvlab.soliton import SolitonConfig, eval_multisoliton, evolve_config


def test_settings_validation_and_json():
    s = EvolutionSettings(dt=1e-3, T=0.5)
    assert s.stability_ratio(DEFAULT_GRID) == pytest.approx(1e-3 / DEFAULT_GRID.spacing**3)
    again, grid = EvolutionSettings.from_json(s.to_json(DEFAULT_GRID))
    assert again.dt == s.dt and again.T == s.T
    assert grid.points == DEFAULT_GRID.points
    with pytest.raises(ValueError):
        EvolutionSettings(dt=-1e-3)
    with pytest.raises(ValueError):
        EvolutionSettings(T=-1.0)
    with pytest.raises(ValueError):
        EvolutionSettings(dealias_fraction=0.0)


def test_single_soliton_transport():
    cfg = SolitonConfig((1.0,), (0.0,))
    u0 = eval_multisoliton(cfg, DEFAULT_GRID)
    settings = EvolutionSettings(dt=1e-3, T=0.25)
    final = evolve_kdv(u0, settings, config=cfg)
    exact = eval_multisoliton(evolve_config(cfg, settings.T), DEFAULT_GRID)
    assert sobolev_norm(final - exact, 1) < 1e-6


def test_conservation_drift():
    cfg = SolitonConfig((1.0,), (0.0,))
    u0 = eval_multisoliton(cfg, DEFAULT_GRID)
    drift = conservation_drift(u0, EvolutionSettings(dt=1e-3, T=0.25), 3)
    assert np.max(drift) < 1e-8


def test_seam_clearance():
    # a soliton whose trajectory reaches the periodic seam must be rejected
    cfg = SolitonConfig((1.0,), (38.0,))
    with pytest.raises(SeamCollisionError):
        check_seam_clearance(cfg, 1.0, DEFAULT_GRID)
    # well-centered trajectories pass
    check_seam_clearance(SolitonConfig((1.0,), (0.0,)), 1.0, DEFAULT_GRID)


def test_manifold_distance_exact_profile():
    cfg = SolitonConfig((2.0, 1.0), (1.0, -1.0))
    u = eval_multisoliton(cfg, DEFAULT_GRID)
    distance, shifts = manifold_distance(u, (2.0, 1.0), 2)
    assert distance < 1e-8
    assert shifts == pytest.approx((1.0, -1.0), abs=1e-6)


def test_manifold_distance_validation():
    u = eval_multisoliton(SolitonConfig((1.0,), (0.0,)), DEFAULT_GRID)
    with pytest.raises(ValueError):
        manifold_distance(u, (1.0, 2.0), 1)  # betas not decreasing


def test_stability_trace_csv(tmp_path):
    trace = StabilityTrace(np.array([0.0, 0.5]), np.array([1e-8, 2e-8]))
    assert trace.sup_distance == pytest.approx(2e-8)
    path = tmp_path / "stability.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,distance"
    assert len(lines) == 3
    with pytest.raises(ValueError):
        StabilityTrace(np.array([0.0]), np.array([1.0, 2.0]))


def test_orbital_stability_unperturbed():
    settings = EvolutionSettings(dt=1e-3, T=0.5)
    trace = orbital_stability_experiment((1.0,), 0.0, settings, 1, n_samples=6)
    assert trace.sup_distance < 1e-6
