"""Grid container, spectral calculus, and serialization tests."""

import math

import numpy as np
import pytest

from kdvlab.grid import (
    DEFAULT_GRID,
    GridFunction,
    SpatialGrid,
    integrate,
    resample_at,
    sobolev_norm,
    spectral_derivative,
    upsample,
)


def test_grid_invariants():
    g = SpatialGrid(40.0, 2048)
    assert g.spacing == pytest.approx(80.0 / 2048)
    assert g.nodes[0] == pytest.approx(-40.0)
    assert len(g.nodes) == 2048
    with pytest.raises(ValueError):
        SpatialGrid(40.0, 1000)  # not a power of two
    with pytest.raises(ValueError):
        SpatialGrid(40.0, 128)  # too coarse
    with pytest.raises(ValueError):
        SpatialGrid(-1.0, 2048)


def test_grid_function_validation():
    g = SpatialGrid(40.0, 256)
    with pytest.raises(ValueError):
        GridFunction(g, np.full(256, np.nan))
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros(128))


def test_integrate_gaussian():
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-(x**2)))
    assert integrate(f) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_integrate_sech4():
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: 4.0 / np.cosh(x) ** 4)
    assert integrate(f) == pytest.approx(16.0 / 3.0, rel=1e-12)


def test_spectral_derivative_of_gaussian():
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-(x**2)))
    df = spectral_derivative(f, 1)
    exact = -2.0 * DEFAULT_GRID.nodes * np.exp(-(DEFAULT_GRID.nodes**2))
    assert np.max(np.abs(df.values - exact)) < 1e-10


def test_derivative_composition():
    rng = np.random.default_rng(7)
    coeffs = rng.normal(size=4)
    f = GridFunction.from_callable(
        DEFAULT_GRID,
        lambda x: np.exp(-(x**2) / 4) * sum(c * x**i for i, c in enumerate(coeffs)),
    )
    twice = spectral_derivative(spectral_derivative(f, 1), 1)
    once = spectral_derivative(f, 2)
    assert np.max(np.abs(twice.values - once.values)) < 1e-9


def test_sobolev_norm_parseval():
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-(x**2)))
    h = DEFAULT_GRID.spacing
    # n = 0 reduces to the L^2 norm
    assert sobolev_norm(f, 0) == pytest.approx(
        math.sqrt(h * np.sum(f.values**2)), rel=1e-12
    )
    # H^1 norm squared = L^2 norm squared + L^2 norm of derivative squared
    df = spectral_derivative(f, 1)
    expected = math.sqrt(h * np.sum(f.values**2) + h * np.sum(df.values**2))
    assert sobolev_norm(f, 1) == pytest.approx(expected, rel=1e-10)


def test_resample_and_upsample():
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-(x**2)))
    pts = np.array([-1.3, 0.0, 2.7])
    vals = resample_at(f, pts)
    assert np.max(np.abs(vals - np.exp(-(pts**2)))) < 1e-10
    up = upsample(f, 2)
    assert up.grid.points == 2 * DEFAULT_GRID.points
    assert np.max(np.abs(up.values - np.exp(-(up.grid.nodes**2)))) < 1e-10


def test_csv_roundtrip(tmp_path):
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-(x**2)))
    path = tmp_path / "profile.csv"
    f.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "x,value"
    g = GridFunction.from_csv(path)
    assert g.grid.points == f.grid.points
    assert np.max(np.abs(g.values - f.values)) == 0.0


def test_arithmetic():
    f = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-(x**2)))
    g = GridFunction.from_callable(DEFAULT_GRID, lambda x: np.exp(-((x - 1) ** 2)))
    s = f + g
    assert np.allclose(s.values, f.values + g.values)
    assert np.allclose((f - g).values, f.values - g.values)
    assert np.allclose((2.5 * f).values, 2.5 * f.values)
    assert np.allclose((f * -1.0).values, -f.values)
