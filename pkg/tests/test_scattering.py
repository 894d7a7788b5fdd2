"""Forward scattering: Jost solutions, a(k), bound states, trace moments."""

import numpy as np
import pytest

from kdvlab.grid import DEFAULT_GRID, GridFunction
from kdvlab.scattering import (
    HAVE_COMPILED_KERNEL,
    add_bound_states,
    blaschke,
    bound_states,
    default_k_grid,
    jost_wronskian,
    log_a_moments,
    propagate_compiled,
    propagate_fallback,
    trace_residuals,
    transmission_reciprocal,
)
from kdvlab.soliton import SolitonConfig, eval_multisoliton


def _zero_potential():
    return GridFunction.zero(DEFAULT_GRID)


def test_free_wronskian():
    u = _zero_potential()
    w = jost_wronskian(u, 1.0)
    assert w == pytest.approx(-2.0j, abs=1e-12)
    w = jost_wronskian(u, 0.5 + 0.7j)
    assert w == pytest.approx(-2.0j * (0.5 + 0.7j), abs=1e-10)


def test_wronskian_validation():
    u = _zero_potential()
    with pytest.raises(ValueError):
        jost_wronskian(u, 0.0)
    with pytest.raises(ValueError):
        jost_wronskian(u, 1.0 - 0.5j)  # lower half plane


def test_free_transmission_is_one():
    s = transmission_reciprocal(_zero_potential())
    assert np.max(np.abs(s.a_values - 1.0)) < 1e-12
    assert s.bound_betas == ()


def test_blaschke_values():
    assert blaschke((1.0,), 2.0j) == pytest.approx(1.0 / 3.0)
    # modulus one on the real axis
    k = np.linspace(0.2, 10.0, 17)
    vals = np.array([blaschke((2.0, 1.0), kk) for kk in k])
    assert np.max(np.abs(np.abs(vals) - 1.0)) < 1e-14
    with pytest.raises(ValueError):
        blaschke((1.0,), -1.0j)  # pole


def test_multisoliton_a_is_blaschke():
    cfg = SolitonConfig((2.0, 1.0), (0.0, 0.0))
    u = eval_multisoliton(cfg, DEFAULT_GRID)
    k = default_k_grid(10.0, 64)
    s = transmission_reciprocal(u, k)
    exact = np.array([blaschke(cfg.betas, kk) for kk in k])
    assert np.max(np.abs(s.a_values - exact)) < 1e-6


def test_modulus_at_least_one():
    # |a(k)| >= 1 on the real axis for real potentials
    rng = np.random.default_rng(23)
    for _ in range(3):
        amp, width, off = rng.uniform(0.5, 2.0), rng.uniform(0.8, 1.5), rng.uniform(-2, 2)
        u = GridFunction.from_callable(
            DEFAULT_GRID, lambda x: -amp * np.exp(-((x - off) ** 2) / width)
        )
        s = transmission_reciprocal(u, default_k_grid(8.0, 48))
        assert np.min(np.abs(s.a_values)) > 1.0 - 1e-9


def test_bound_states_of_multisoliton():
    cfg = SolitonConfig((2.0, 1.0), (0.5, -0.5))
    u = eval_multisoliton(cfg, DEFAULT_GRID)
    betas = bound_states(u)
    assert len(betas) == 2
    assert betas[0] == pytest.approx(2.0, abs=1e-8)
    assert betas[1] == pytest.approx(1.0, abs=1e-8)


def test_bound_state_of_sech_well():
    # -1.8 sech^2(x) has a single level with beta = (sqrt(8.2) - 1)/2
    u = GridFunction.from_callable(DEFAULT_GRID, lambda x: -1.8 / np.cosh(x) ** 2)
    betas = bound_states(u)
    assert len(betas) == 1
    assert betas[0] == pytest.approx((np.sqrt(8.2) - 1.0) / 2.0, abs=1e-8)


def test_trace_residuals_single_soliton():
    u = eval_multisoliton(SolitonConfig((1.0,), (0.0,)), DEFAULT_GRID)
    res = trace_residuals(u, 3)
    assert np.max(np.abs(res)) < 1e-5


def test_log_a_moments_free():
    s = transmission_reciprocal(_zero_potential(), default_k_grid(8.0, 48))
    moments = log_a_moments(s, 2)
    assert np.max(np.abs(moments)) < 1e-10


def test_add_bound_states():
    s = transmission_reciprocal(_zero_potential(), default_k_grid(8.0, 48))
    s2 = add_bound_states(s, (1.5,))
    assert s2.bound_betas == (1.5,)
    exact = np.array([blaschke((1.5,), kk) for kk in s.k_grid])
    assert np.max(np.abs(s2.a_values - exact)) < 1e-12
    with pytest.raises(ValueError):
        add_bound_states(s2, (1.5,))  # duplicate


def test_csv_output(tmp_path):
    s = transmission_reciprocal(_zero_potential(), default_k_grid(8.0, 16))
    path = tmp_path / "scattering.csv"
    s.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,re_a,im_a,log_abs_a"
    assert len(lines) == 17


def test_fallback_matches_compiled():
    if not HAVE_COMPILED_KERNEL:
        pytest.skip("compiled kernel unavailable")
    rng = np.random.default_rng(5)
    cells = 64
    ua = -rng.uniform(0.0, 2.0, cells)
    ub = -rng.uniform(0.0, 2.0, cells)
    ksq = (np.linspace(0.3, 9.0, 11) ** 2).astype(complex)
    f1 = np.ones_like(ksq)
    g1 = 1j * np.sqrt(ksq)
    f2 = f1.copy()
    g2 = g1.copy()
    propagate_fallback(ua, ub, 0.05, ksq, f1, g1)
    propagate_compiled(ua, ub, 0.05, ksq, f2, g2)
    assert np.max(np.abs(f1 - f2)) < 1e-13
    assert np.max(np.abs(g1 - g2)) < 1e-13
