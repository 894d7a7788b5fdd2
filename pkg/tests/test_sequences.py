"""Minimizing sequences: gas superpositions, point-mass elements, sampler."""

import math

import numpy as np
import pytest

from kdvlab.constraints import ConstraintVector, constraints_of_betas
from kdvlab.densities import eval_energy
from kdvlab.grid import DEFAULT_GRID, SpatialGrid
from kdvlab.sequences import (
    diagnostics_to_csv,
    gas_sequence,
    molecular_residual,
    phase_diagram_sample,
    phase_diagram_to_csv,
    point_mass_diagnostics,
    suggested_wvn_grid,
    wigner_von_neumann,
    wvn_k_grid,
)
from kdvlab.soliton import SolitonConfig


def test_wvn_validation():
    grid = suggested_wvn_grid(4)
    with pytest.raises(ValueError):
        wigner_von_neumann(-1.0, 1.0, 4, grid)
    with pytest.raises(ValueError):
        wigner_von_neumann(1.0, -1.0, 4, grid)
    with pytest.raises(ValueError):
        wigner_von_neumann(1.0, 1.0, 0, grid)
    # grid too narrow for a wide envelope
    with pytest.raises(ValueError):
        wigner_von_neumann(1.0, 1.0, 64, SpatialGrid(40.0, 2048))


def test_suggested_grid_is_wide_enough():
    for idx in (4, 16, 64):
        grid = suggested_wvn_grid(idx)
        assert math.exp(-grid.half_width**2 / (2.0 * idx**2)) < 1e-12
        wigner_von_neumann(1.0, 1.0, idx, grid)


def test_wvn_first_energy():
    # E1(q_idx) -> sqrt(pi)/4 for c = 1
    idx = 16
    q = wigner_von_neumann(1.0, 1.0, idx, suggested_wvn_grid(idx))
    assert eval_energy(1, q) == pytest.approx(math.sqrt(math.pi) / 4.0, rel=0.01)


def test_wvn_k_grid_resolves_carrier():
    k = wvn_k_grid(1.0, 64)
    assert k[0] > 0
    assert k[-1] == pytest.approx(20.0)
    window = k[(k > 1.0 - 20.0 / 64) & (k < 1.0 + 20.0 / 64)]
    assert len(window) > 1000


def test_point_mass_diagnostics_csv(tmp_path):
    idx = 8
    q = wigner_von_neumann(1.0, 1.0, idx, suggested_wvn_grid(idx))
    diags = point_mass_diagnostics([q], indices=[idx], k_grid=wvn_k_grid(1.0, idx))
    assert len(diags) == 1
    d = diags[0]
    assert d.index == idx
    assert np.isfinite(d.energies).all()
    assert d.center_k == pytest.approx(1.0, abs=0.3)
    path = tmp_path / "diagnostics.csv"
    diagnostics_to_csv(diags, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "idx,E1,E2,E3,max_beta,gamma0,gamma1,center_k,spread_k"
    assert len(lines) == 2


def test_gas_sequence_degenerate():
    # N = n: a plain multisoliton, constant in the sequence index
    e = constraints_of_betas([(2.0, 1), (1.0, 1)], 2)
    elements, report = gas_sequence(e, 2, 20.0, 3)
    assert len(elements) == 3
    assert report.total_degree == 2
    assert np.max(np.abs(elements[0].values - elements[2].values)) == 0.0


def test_gas_sequence_energies_converge():
    e = ConstraintVector((24.0, -100.0))
    elements, report = gas_sequence(e, 4, 40.0, 2)
    last = elements[-1]
    assert eval_energy(1, last) == pytest.approx(24.0, rel=1e-6)
    assert eval_energy(2, last) == pytest.approx(-100.0, rel=1e-6)
    assert eval_energy(3, last) == pytest.approx(report.C_value, rel=1e-6)


def test_gas_sequence_validation():
    e = ConstraintVector((24.0, -100.0))
    with pytest.raises(ValueError):
        gas_sequence(e, 4, -1.0, 3)
    with pytest.raises(ValueError):
        gas_sequence(ConstraintVector((1.0, 1.0)), 4, 20.0, 3)  # point-mass region


def test_molecular_residual_single_group():
    cfg = SolitonConfig((1.5,), (0.0,))
    r = molecular_residual([cfg], [0.0], 1, DEFAULT_GRID)
    assert r < 1e-8


def test_molecular_residual_distinctness():
    a = SolitonConfig((1.0,), (0.0,))
    with pytest.raises(ValueError):
        molecular_residual([a, a], [-10.0, 10.0], 1, DEFAULT_GRID)


def test_phase_diagram_sample_and_csv(tmp_path):
    e1v, e2v, labels = phase_diagram_sample((1.0, 5.0), (-10.0, 2.0), (4, 5))
    assert len(e1v) == 4 and len(e2v) == 5
    tags = {labels[i][j].tag for i in range(4) for j in range(5)}
    assert "PointMass" in tags
    path = tmp_path / "phase.csv"
    phase_diagram_to_csv(e1v, e2v, labels, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "e1,e2,region,N_min"
    assert len(lines) == 21
    with pytest.raises(ValueError):
        phase_diagram_sample((0.0, 1.0), (0.0, 1.0), 600)  # over the cap
