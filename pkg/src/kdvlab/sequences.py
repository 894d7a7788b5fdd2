"""Minimizing sequences and phase-diagram experiments.

Covers the gas-regime superpositions of receding multisoliton clusters,
the molecular-decomposition check, the Wigner-von Neumann point-mass
sequence with its concentration diagnostics, and the n = 2 region sampler.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintVector, MinimizerReport, classify, relaxed_minimize
from .densities import eval_energy
from .evolution import manifold_distance
from .grid import GridFunction, SpatialGrid
from .scattering import (
    bound_states,
    default_k_grid,
    log_a_moments,
    transmission_reciprocal,
)
from .soliton import SolitonConfig, superpose

WVN_DECAY_TOL = 1e-12
TARGET_SPACING = 0.0390625  # 80/2048, the default grid's resolution


@dataclass
class SequenceDiagnostics:
    """Energies, bound states, and log|a| concentration statistics."""

    index: int
    energies: tuple  # (E1, E2, E3)
    bound_betas: tuple
    k_profile: np.ndarray = field(repr=False)
    log_abs_a: np.ndarray = field(repr=False)
    gamma0: float = 0.0
    gamma1: float = 0.0
    center_k: float = 0.0
    spread_k: float = 0.0

    @property
    def max_beta(self) -> float:
        return max(self.bound_betas) if self.bound_betas else 0.0


def diagnostics_to_csv(diagnostics, path):
    """CSV rows "idx,E1,E2,E3,max_beta,gamma0,gamma1,center_k,spread_k"."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["idx", "E1", "E2", "E3", "max_beta",
                         "gamma0", "gamma1", "center_k", "spread_k"])
        for d in diagnostics:
            writer.writerow(
                [d.index]
                + [f"{v:.17g}" for v in d.energies]
                + [f"{d.max_beta:.17g}", f"{d.gamma0:.17g}", f"{d.gamma1:.17g}",
                   f"{d.center_k:.17g}", f"{d.spread_k:.17g}"]
            )


def suggested_wvn_grid(idx: int, spacing: float = 2 * TARGET_SPACING) -> SpatialGrid:
    """A grid wide enough for the index-idx Wigner-von Neumann element."""
    # e^{-L^2/(2 idx^2)} < 1e-12 requires L > idx * sqrt(2 ln 1e12)
    needed = idx * math.sqrt(-2.0 * math.log(WVN_DECAY_TOL)) * 1.01
    half_width = max(40.0, needed)
    points = 256
    while 2 * half_width / points > spacing:
        points *= 2
    # keep the realized spacing by widening to the next power-of-two box
    half_width = points * spacing / 2.0
    while half_width < needed:
        points *= 2
        half_width = points * spacing / 2.0
    return SpatialGrid(half_width, points)


def wvn_k_grid(k: float, idx: int, kmax: float = 20.0) -> np.ndarray:
    """Frequency grid resolving the log|a| spike of width ~1/idx near k.

    The concentration window around the carrier frequency is sampled
    densely; the rest of (0, kmax] reuses the hybrid default layout.
    """
    lo = max(k - 20.0 / idx, 1e-3)
    hi = min(k + 20.0 / idx, kmax)
    window = np.linspace(lo, hi, 1601)
    parts = [window]
    if lo > 2e-3:
        parts.insert(0, np.geomspace(1e-3, lo, 96, endpoint=False))
    if hi < kmax:
        parts.append(np.linspace(hi, kmax, 160, endpoint=False)[1:])
        parts.append(np.array([kmax]))
    return np.unique(np.concatenate(parts))


def wigner_von_neumann(c: float, k: float, idx: int,
                       grid: SpatialGrid) -> GridFunction:
    """q_idx(x) = sqrt(c/idx) exp(-x^2/(2 idx^2)) cos(2kx)."""
    if c <= 0:
        raise ValueError("amplitude parameter c must be positive")
    if k < 0:
        raise ValueError("frequency parameter k must be nonnegative")
    if idx < 1:
        raise ValueError("sequence index must be a positive integer")
    if math.exp(-grid.half_width**2 / (2.0 * idx**2)) >= WVN_DECAY_TOL:
        raise ValueError(
            f"grid half-width {grid.half_width} too narrow for index {idx}; "
            f"need exp(-L^2/(2 idx^2)) < {WVN_DECAY_TOL}"
        )
    x = grid.nodes
    vals = math.sqrt(c / idx) * np.exp(-(x**2) / (2.0 * idx**2)) * np.cos(2.0 * k * x)
    return GridFunction(grid, vals)


def _concentration_stats(k_grid, log_abs):
    """Center and spread of the measure k^2 log|a| dk on k > 0."""
    weights = np.clip(log_abs, 0.0, None) * k_grid**2
    mass = np.trapezoid(weights, k_grid)
    if mass <= 0:
        return 0.0, 0.0
    center = np.trapezoid(k_grid * weights, k_grid) / mass
    var = np.trapezoid((k_grid - center) ** 2 * weights, k_grid) / mass
    return float(center), float(math.sqrt(max(var, 0.0)))


def point_mass_diagnostics(elements, indices=None, k_grid=None) -> list:
    """Per-element energies, bound states, and log|a| concentration data."""
    if k_grid is None:
        k_grid = default_k_grid()
    if indices is None:
        indices = list(range(len(elements)))
    out = []
    for idx, u in zip(indices, elements):
        energies = tuple(eval_energy(m, u) for m in (1, 2, 3))
        betas = bound_states(u)
        sample = transmission_reciprocal(u, k_grid)
        log_abs = sample.log_abs_a()
        moments = log_a_moments(sample, 2)
        center, spread = _concentration_stats(k_grid, log_abs)
        out.append(
            SequenceDiagnostics(
                index=idx,
                energies=energies,
                bound_betas=betas,
                k_profile=np.array(k_grid),
                log_abs_a=log_abs,
                gamma0=float(moments[0]),
                gamma1=float(moments[1]),
                center_k=center,
                spread_k=spread,
            )
        )
    return out


def _split_groups(report: MinimizerReport) -> list:
    """Split repeated beta values into groups of distinct-beta configs.

    Group g collects every beta with multiplicity >= g+1, so each group is
    a valid multisoliton; this is the canonical grouping used throughout.
    """
    max_mult = max((m for _, m in report.betas_with_multiplicity), default=0)
    groups = []
    for g in range(max_mult):
        betas = tuple(b for b, m in report.betas_with_multiplicity if m > g)
        if betas:
            shifts = tuple(math.log(2.0 * b) / (2.0 * b) for b in betas)
            groups.append(SolitonConfig(betas, shifts))
    return groups


def _gas_grid(max_offset: float, min_beta: float) -> SpatialGrid:
    """Grid wide enough to hold all clusters away from the periodic seam."""
    needed = max_offset + 30.0 / min_beta + 10.0
    half_width = 40.0
    points = 2048
    while half_width < needed:
        half_width *= 2.0
        points *= 2
    return SpatialGrid(half_width, points)


def gas_sequence(e: ConstraintVector, N: int, separation: float, count: int,
                 grid: SpatialGrid | None = None):
    """Superpositions of receding clusters realizing the relaxed minimizer.

    Element i places the groups at mutual separation separation * 2^i;
    its energies approach (e, extended C) as the clusters separate.
    Returns (elements, report).
    """
    if separation <= 0 or count < 1:
        raise ValueError("separation must be positive and count >= 1")
    label = classify(e)
    if label.tag not in ("Gas", "InteriorMnn", "BoundaryMnn", "Origin"):
        raise ValueError(f"constraints {e.e} are not feasible for a gas sequence")
    report = relaxed_minimize(e, N)
    groups = _split_groups(report)
    n_groups = len(groups)
    if n_groups <= 1:
        base_grid = grid or _gas_grid(0.0, min(report.distinct_betas, default=1.0))
        element = superpose(groups, [0.0] * n_groups, base_grid)
        return [element] * count, report
    max_sep = separation * 2 ** (count - 1)
    max_offset = 0.5 * (n_groups - 1) * max_sep
    base_grid = grid or _gas_grid(max_offset, min(report.distinct_betas))
    elements = []
    for i in range(count):
        sep = separation * 2**i
        offsets = [(j - 0.5 * (n_groups - 1)) * sep for j in range(n_groups)]
        elements.append(superpose(groups, offsets, base_grid))
    return elements, report


def molecular_residual(configs, offsets, n: int, grid: SpatialGrid) -> float:
    """H^n distance from the superposition to the concatenated multisoliton."""
    all_betas = []
    for cfg in configs:
        all_betas.extend(cfg.betas)
    if len(set(all_betas)) != len(all_betas):
        raise ValueError("beta values must be distinct across groups")
    merged = tuple(sorted(all_betas, reverse=True))
    target = superpose(configs, offsets, grid)
    distance, _ = manifold_distance(target, merged, n)
    return distance


def phase_diagram_sample(e1_range, e2_range, resolution):
    """Region labels on a rectangular lattice of (e1, e2) values.

    Returns (e1_values, e2_values, labels) with labels[i][j] the region of
    (e1_values[i], e2_values[j]).
    """
    if np.isscalar(resolution):
        res1 = res2 = int(resolution)
    else:
        res1, res2 = (int(r) for r in resolution)
    if res1 * res2 > 512 * 512:
        raise ValueError("resolution exceeds the 512x512 cap")
    e1_values = np.linspace(e1_range[0], e1_range[1], res1)
    e2_values = np.linspace(e2_range[0], e2_range[1], res2)
    labels = [
        [classify(ConstraintVector((float(e1), float(e2)))) for e2 in e2_values]
        for e1 in e1_values
    ]
    return e1_values, e2_values, labels


def phase_diagram_to_csv(e1_values, e2_values, labels, path):
    """CSV rows "e1,e2,region,N_min" (N_min blank outside the gas band)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["e1", "e2", "region", "N_min"])
        for i, e1 in enumerate(e1_values):
            for j, e2 in enumerate(e2_values):
                label = labels[i][j]
                n_min = label.n_min if label.tag == "Gas" else ""
                writer.writerow([f"{e1:.17g}", f"{e2:.17g}", label.tag, n_min])
