"""Constrained minimization over power-sum moments of the beta parameters.

The first n conserved quantities of a multisoliton are (up to fixed signs
and rational constants) the odd power sums of its beta parameters, so
minimizing the next conserved quantity subject to E_1..E_n = e reduces to
a nonlinear moment system.  This module solves that system by damped
Newton iteration with the Vandermonde-structured Jacobian, computes the
minimum value C(e) and its gradient (the Lagrange multipliers) via Vieta's
formulas, classifies constraint vectors into regions, and handles the
relaxed (repeated-beta) minimizers of the gas regime and the point-mass
infimum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

NEWTON_TOL = 1e-12
BOUNDARY_DROP_REL = 1e-4
VERIFY_TOL = 1e-9
COLLISION_REL = 1e-6
MAX_RELAXED_N = 12
MAX_NEWTON_STEPS = 200


class NotInMnn(RuntimeError):
    """The constraint vector is not attained by any multisoliton of degree <= n."""


class CollisionError(RuntimeError):
    """Newton iterates collided: the solution pattern has repeated values."""


@dataclass(frozen=True)
class ConstraintVector:
    """Target values (e_1, ..., e_n) for the first n conserved quantities."""

    e: tuple

    def __post_init__(self):
        e = tuple(float(v) for v in self.e)
        object.__setattr__(self, "e", e)
        if len(e) < 1:
            raise ValueError("constraint vector must have at least one entry")
        if not all(math.isfinite(v) for v in e):
            raise ValueError(f"constraint entries must be finite, got {e}")

    @property
    def n(self) -> int:
        return len(self.e)


@dataclass(frozen=True)
class RegionLabel:
    """Qualitative regime of a constraint vector; Gas carries N_min."""

    tag: str
    n_min: int | None = None

    _TAGS = ("InteriorMnn", "BoundaryMnn", "Gas", "PointMass", "Infeasible", "Origin")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown region tag {self.tag!r}")
        if self.tag == "Gas" and (self.n_min is None or self.n_min < 2):
            raise ValueError("Gas label requires a witnessing degree N_min >= 2")

    def __str__(self) -> str:
        if self.tag == "Gas":
            return f"Gas({self.n_min})"
        return self.tag


@dataclass(frozen=True)
class MinimizerReport:
    """Solved betas with multiplicities, C(e), multipliers, and region."""

    betas_with_multiplicity: tuple  # ((beta, mult), ...) with beta decreasing
    C_value: float
    multipliers: tuple
    region: RegionLabel
    one_sided_multipliers: bool = False

    def __post_init__(self):
        bw = tuple((float(b), int(m)) for b, m in self.betas_with_multiplicity)
        object.__setattr__(self, "betas_with_multiplicity", bw)
        object.__setattr__(self, "multipliers", tuple(float(v) for v in self.multipliers))
        vals = [b for b, _ in bw]
        if any(b <= 0 for b in vals) or any(m < 1 for _, m in bw):
            raise ValueError("betas must be positive with positive multiplicities")
        if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)):
            raise ValueError("beta values must be strictly decreasing")

    @property
    def total_degree(self) -> int:
        return sum(m for _, m in self.betas_with_multiplicity)

    @property
    def distinct_betas(self) -> tuple:
        return tuple(b for b, _ in self.betas_with_multiplicity)

    def to_json(self) -> str:
        return json.dumps(
            {
                "betas": [
                    {"value": b, "mult": m} for b, m in self.betas_with_multiplicity
                ],
                "C": self.C_value,
                "lambda": list(self.multipliers),
                "region": str(self.region),
            }
        )


def _power_sum(betas_with_mult, power: int) -> float:
    return float(sum(m * b**power for b, m in betas_with_mult))


def _normalize_bwm(betas_with_multiplicity):
    """Accept either plain beta values or (beta, mult) pairs."""
    out = []
    for item in betas_with_multiplicity:
        if np.isscalar(item):
            out.append((float(item), 1))
        else:
            b, m = item
            out.append((float(b), int(m)))
    return tuple(out)


def constraints_of_betas(betas_with_multiplicity, n: int) -> ConstraintVector:
    """Forward map: e_m = (-1)^{m+1} 2^{2m+1}/(2m+1) sum_j mult_j beta_j^{2m+1}."""
    bwm = _normalize_bwm(betas_with_multiplicity)
    if any(b <= 0 for b, _ in bwm):
        raise ValueError("beta values must be positive")
    e = []
    for m in range(1, n + 1):
        coeff = (-1) ** (m + 1) * 2.0 ** (2 * m + 1) / (2 * m + 1)
        e.append(coeff * _power_sum(bwm, 2 * m + 1))
    return ConstraintVector(tuple(e))


def _targets_from_constraints(e: ConstraintVector) -> np.ndarray:
    """Odd power-sum targets s_m = sum mult beta^{2m+1} implied by e."""
    s = []
    for m, em in enumerate(e.e, start=1):
        s.append((-1) ** (m + 1) * (2 * m + 1) * em / 2.0 ** (2 * m + 1))
    return np.array(s)


def extended_C_value(betas_with_mult, n: int) -> float:
    """C = (-1)^n 2^{2n+3}/(2n+3) sum mult beta^{2n+3} (the E_{n+1} value)."""
    coeff = (-1) ** n * 2.0 ** (2 * n + 3) / (2 * n + 3)
    return coeff * _power_sum(betas_with_mult, 2 * n + 3)


def _elementary_symmetric(values) -> list:
    """e_0..e_d of the given values by the stable recurrence."""
    es = [1.0]
    for v in values:
        es = [es[0]] + [es[i] + v * es[i - 1] for i in range(1, len(es))] + [v * es[-1]]
    return es


def grad_C(report: MinimizerReport) -> np.ndarray:
    """Lagrange multipliers lambda_j = dC/de_j via Vieta's formulas.

    lambda_j = -2^{2n+2-2j} sigma_{n+1-j}(beta_1^2, ..., beta_n^2); on
    boundary strata the missing betas enter as zeros, giving the one-sided
    limit of the interior formula.
    """
    n = len(report.multipliers)
    sq = [b * b for b in report.distinct_betas]
    sq = sq + [0.0] * (n - len(sq))
    es = _elementary_symmetric(sq)
    lam = []
    for j in range(1, n + 1):
        idx = n + 1 - j
        sigma = es[idx] if idx < len(es) else 0.0
        lam.append(-(2.0 ** (2 * n + 2 - 2 * j)) * sigma)
    return np.array(lam)


def _vieta_multipliers(beta_values, n: int) -> tuple:
    sq = [b * b for b in beta_values][:n]
    sq = sq + [0.0] * (n - len(sq))
    es = _elementary_symmetric(sq)
    return tuple(
        -(2.0 ** (2 * n + 2 - 2 * j)) * (es[n + 1 - j] if n + 1 - j < len(es) else 0.0)
        for j in range(1, n + 1)
    )


def _newton_power_sums(s: np.ndarray, mults, x0: np.ndarray) -> np.ndarray:
    """Solve sum_i m_i x_i^{2k+1} = s_k (k = 1..d) for positive distinct x.

    Damped Newton with the Vandermonde-structured Jacobian
    J[k,i] = (2k+1) m_i x_i^{2k}; raises CollisionError when iterates merge.
    """
    mults = np.asarray(mults, dtype=float)
    d = len(mults)
    x = np.array(x0, dtype=float)
    if len(x) != d or np.any(x <= 0):
        raise ValueError("initial guess must be positive with one entry per value")
    scale = np.maximum(np.abs(s[:d]), 1.0)

    def residual(xv):
        return np.array(
            [np.sum(mults * xv ** (2 * k + 1)) - s[k - 1] for k in range(1, d + 1)]
        )

    def jacobian(xv):
        return np.array([(2 * k + 1) * mults * xv ** (2 * k) for k in range(1, d + 1)])

    # trust-region least-squares pulls poor initial guesses into Newton's basin
    res = residual(x)
    if np.max(np.abs(res) / scale) > 1e-6:
        fit = least_squares(
            lambda xv: residual(xv) / scale,
            x,
            jac=lambda xv: jacobian(xv) / scale[:, None],
            bounds=(np.zeros(d), np.full(d, np.inf)),
            xtol=3e-16, ftol=3e-16, gtol=None, max_nfev=400,
        )
        if np.all(fit.x > 0):
            x = fit.x
            res = residual(x)
    for _ in range(MAX_NEWTON_STEPS):
        err = np.max(np.abs(res) / scale)
        if err <= NEWTON_TOL:
            if np.min(np.abs(np.subtract.outer(x, x))[~np.eye(d, dtype=bool)],
                      initial=np.inf) < COLLISION_REL * np.max(x):
                raise CollisionError("converged iterates have collided values")
            return np.sort(x)[::-1]
        jac = jacobian(x)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise CollisionError("singular Jacobian (collided values)") from exc
        alpha = 1.0
        base = np.max(np.abs(res) / scale)
        for _ in range(40):
            trial = x + alpha * step
            if np.all(trial > 0):
                trial_res = residual(trial)
                if np.max(np.abs(trial_res) / scale) < base:
                    x, res = trial, trial_res
                    break
            alpha *= 0.5
        else:
            if np.max(np.abs(res) / scale) <= 1e4 * NEWTON_TOL:
                # stagnated at the conditioning floor; accept
                return np.sort(x)[::-1]
            raise RuntimeError("Newton iteration stalled (no descent step)")
        if d > 1:
            gaps = np.abs(np.subtract.outer(x, x))[~np.eye(d, dtype=bool)]
            if np.min(gaps) < COLLISION_REL * np.max(x):
                raise CollisionError("iterates collided during Newton descent")
    raise RuntimeError(f"Newton did not converge in {MAX_NEWTON_STEPS} steps")


def _ladder_init(s: np.ndarray, mults) -> np.ndarray:
    """Geometric-ladder initialization fit to the first two targets."""
    d = len(mults)
    total_m = float(np.sum(mults))
    if d == 1:
        return np.array([max(s[0] / total_m, 1e-8) ** (1.0 / 3.0)])
    best = None
    if len(s) >= 2 and s[0] > 0 and s[1] > 0:
        for rho in np.linspace(0.15, 0.9, 16):
            ladder = rho ** np.arange(d)
            # scale r so the cube sum matches s_1, then score the 5th-power sum
            w3 = float(np.sum(np.asarray(mults) * ladder**3))
            r = (s[0] / w3) ** (1.0 / 3.0)
            w5 = float(np.sum(np.asarray(mults) * (r * ladder) ** 5))
            score = abs(w5 - s[1])
            if best is None or score < best[0]:
                best = (score, r * ladder)
    if best is not None:
        return best[1]
    base = max(abs(s[0]) / total_m, 1e-6) ** (1.0 / 3.0)
    return base * 0.6 ** np.arange(d)


def _solve_pattern(s: np.ndarray, mults, rng=None, restarts: int = 12):
    """Solve the first d equations for the multiplicity pattern, verify the rest.

    Returns decreasing beta values or None when the pattern is infeasible.
    """
    d = len(mults)
    n = len(s)
    inits = [_ladder_init(s, mults)]
    if rng is None:
        rng = np.random.default_rng(0)
    scale3 = max(abs(s[0]), 1e-12) ** (1.0 / 3.0)
    for _ in range(restarts):
        trial = scale3 * np.sort(rng.uniform(0.05, 1.5, size=d))[::-1]
        inits.append(trial)
    for x0 in inits:
        try:
            x = _newton_power_sums(s[:d], mults, x0)
        except (CollisionError, RuntimeError):
            continue
        ok = True
        for k in range(d + 1, n + 1):
            resid = sum(m * b ** (2 * k + 1) for b, m in zip(x, mults)) - s[k - 1]
            if abs(resid) > VERIFY_TOL * max(abs(s[k - 1]), 1.0):
                ok = False
                break
        if ok:
            return x
    return None


def _is_zero_vector(e: ConstraintVector) -> bool:
    return all(v == 0.0 for v in e.e)


def solve_betas(e: ConstraintVector, rng=None) -> MinimizerReport:
    """Unique minimizing betas of degree N <= n, or NotInMnn.

    Tries the full distinct pattern first; a vanishing smallest beta drops
    the degree (boundary stratum), a collision signals the gas regime.
    """
    n = e.n
    if _is_zero_vector(e):
        return MinimizerReport((), 0.0, (0.0,) * n, RegionLabel("Origin"))
    s = _targets_from_constraints(e)
    if any(v <= 0 for v in s):
        raise NotInMnn(f"power-sum targets {tuple(s)} are not all positive")
    for N in range(n, 0, -1):
        betas = _solve_pattern(s, [1] * N, rng=rng)
        if betas is None:
            continue
        if N > 1 and betas[-1] < BOUNDARY_DROP_REL * betas[0]:
            # a vanishing smallest beta means e sits on a boundary stratum
            reduced = _solve_pattern(s, [1] * (N - 1), rng=rng)
            if reduced is not None:
                betas, N = reduced, N - 1
        region = RegionLabel("InteriorMnn") if N == n else RegionLabel("BoundaryMnn")
        bwm = tuple((b, 1) for b in betas)
        lam = _vieta_multipliers(betas, n)
        return MinimizerReport(bwm, extended_C_value(bwm, n), lam, region,
                               one_sided_multipliers=(N < n))
    raise NotInMnn(f"no multisoliton of degree <= {n} attains e = {e.e}")


def _compositions(total: int, parts: int):
    """Weakly decreasing positive-integer compositions of total into <= parts."""
    def rec(remaining, max_part, slots):
        if remaining == 0:
            yield ()
            return
        if slots == 0:
            return
        for first in range(min(remaining, max_part), 0, -1):
            for rest in rec(remaining - first, first, slots - 1):
                yield (first,) + rest

    yield from rec(total, total, parts)


def relaxed_minimize(e: ConstraintVector, N: int, rng=None) -> MinimizerReport:
    """Minimize over repeated-beta configurations of total multiplicity N.

    Enumerates multiplicity patterns (<= n distinct values summing to N),
    solves each weighted moment system, and returns the feasible pattern
    with the least objective; at most one pattern is feasible.
    """
    n = e.n
    if N < n:
        raise ValueError(f"total degree N={N} below the constraint count {n}")
    if N > MAX_RELAXED_N:
        raise ValueError(f"total degree N={N} exceeds the supported cap {MAX_RELAXED_N}")
    if N == n:
        return solve_betas(e, rng=rng)
    if _is_zero_vector(e):
        return MinimizerReport((), 0.0, (0.0,) * n, RegionLabel("Origin"))
    s = _targets_from_constraints(e)
    if any(v <= 0 for v in s):
        raise NotInMnn(f"power-sum targets {tuple(s)} are not all positive")
    best = None
    for mults in _compositions(N, n):
        betas = _solve_pattern(s, list(mults), rng=rng)
        if betas is None:
            continue
        bwm = tuple(zip(betas, mults))
        objective = (-1) ** n * _power_sum(bwm, 2 * n + 3)
        if best is None or objective < best[0]:
            best = (objective, bwm)
    if best is None:
        raise NotInMnn(f"e = {e.e} is infeasible for total degree N = {N}")
    bwm = best[1]
    lam = _vieta_multipliers([b for b, _ in bwm], n)
    if n == 2 and e.e[0] > 0 and e.e[1] < 0:
        region = RegionLabel("Gas", n_min=gas_minimal_degree(e.e[0], e.e[1]))
    else:
        region = RegionLabel("Gas", n_min=N)
    return MinimizerReport(bwm, extended_C_value(bwm, n), lam, region,
                           one_sided_multipliers=True)


def feasibility_bound(e1: float) -> float:
    """B(e_1) = (32/5)(3/8)^{5/3} e_1^{5/3}: the single-soliton |E_2| at E_1 = e_1."""
    if e1 < 0:
        raise ValueError("e_1 must be nonnegative")
    return (32.0 / 5.0) * (3.0 / 8.0) ** (5.0 / 3.0) * e1 ** (5.0 / 3.0)


def gas_minimal_degree(e1: float, e2: float) -> int:
    """Least N whose degree-N configurations reach (e1, e2) in the gas band."""
    b = feasibility_bound(e1)
    return int(math.floor((b / abs(e2)) ** 1.5)) + 1


def classify(e: ConstraintVector, rng=None) -> RegionLabel:
    """Region of the constraint vector; closed form for n = 2.

    For general n the label is decided operationally by solver outcomes.
    """
    if _is_zero_vector(e):
        return RegionLabel("Origin")
    if e.n == 2:
        e1, e2 = e.e
        if e1 < 0:
            return RegionLabel("Infeasible")
        b = feasibility_bound(e1)
        if e2 < -b:
            return RegionLabel("Infeasible")
        if e1 > 0 and abs(e2 + b) <= 1e-12 * b:
            return RegionLabel("BoundaryMnn")
        if e1 > 0 and e2 >= 0:
            return RegionLabel("PointMass")
        split = -(2.0 ** (-2.0 / 3.0)) * b
        if e2 < split:
            return RegionLabel("InteriorMnn")
        if e2 < 0:
            return RegionLabel("Gas", n_min=gas_minimal_degree(e1, e2))
        return RegionLabel("Infeasible")
    try:
        return solve_betas(e, rng=rng).region
    except NotInMnn:
        pass
    for N in range(e.n + 1, MAX_RELAXED_N + 1):
        try:
            relaxed_minimize(e, N, rng=rng)
            return RegionLabel("Gas", n_min=N)
        except NotInMnn:
            continue
    return RegionLabel("Infeasible")


def wiggle_direction(betas, n: int):
    """Tangent preserving the first n odd power sums as beta_{n+1} varies.

    Returns (x', d_next): x' solves the Vandermonde system so that the
    first n sums are stationary, and d_next is the resulting derivative of
    the (2n+3)-power sum.
    """
    betas = np.asarray(betas, dtype=float)
    if len(betas) != n + 1:
        raise ValueError(f"expected {n + 1} beta values, got {len(betas)}")
    if np.any(betas <= 0):
        raise ValueError("beta values must be positive")
    head, last = betas[:n], betas[n]
    gaps = np.abs(np.subtract.outer(betas, betas))
    if np.min(gaps[~np.eye(n + 1, dtype=bool)]) < 1e-12 * np.max(betas):
        raise ValueError("beta values must be distinct (singular Vandermonde)")
    amat = np.array([(2 * k + 1) * head ** (2 * k) for k in range(1, n + 1)])
    rhs = np.array([-(2 * k + 1) * last ** (2 * k) for k in range(1, n + 1)])
    tangent = np.linalg.solve(amat, rhs)
    d_next = float(
        (2 * n + 3) * (np.sum(head ** (2 * n + 2) * tangent) + last ** (2 * n + 2))
    )
    return tangent, d_next


def point_mass_infimum(e1: float, e2: float):
    """Infimum e2^2/e1 with the optimizing moments gamma_0, gamma_1.

    The value is finite but not attained; gamma_0 = (pi/4) e1 and
    gamma_1 = (pi/16) e2 are the moments of the concentrating measure.
    """
    if e1 <= 0:
        raise ValueError("e_1 must be positive in the point-mass regime")
    if e2 < 0:
        raise ValueError("e_2 must be nonnegative in the point-mass regime")
    return e2 * e2 / e1, math.pi / 4.0 * e1, math.pi / 16.0 * e2
