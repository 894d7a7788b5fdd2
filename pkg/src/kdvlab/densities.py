"""Polynomial conserved densities, their recursion, and variational calculus.

Densities are polynomials in u, u', u'', ... with exact rational
coefficients: a term coeff * u^(a1) * u^(a2) * ... is stored under the
sorted tuple (a1, a2, ...).  Exact arithmetic matters because the
recursion cascades small integer coefficients whose cancellations decide
which terms are total derivatives.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .grid import GridFunction, integrate, sobolev_norm, spectral_derivative

MAX_ENERGY_INDEX = 6


class DensityPolynomial:
    """Polynomial in u and its derivatives with Fraction coefficients."""

    def __init__(self, terms=None):
        self.terms: dict[tuple, Fraction] = {}
        if terms:
            for orders, coeff in dict(terms).items():
                self._add_term(tuple(sorted(orders)), Fraction(coeff))

    def _add_term(self, orders: tuple, coeff: Fraction):
        new = self.terms.get(orders, Fraction(0)) + coeff
        if new == 0:
            self.terms.pop(orders, None)
        else:
            self.terms[orders] = new

    @classmethod
    def u(cls) -> "DensityPolynomial":
        return cls({(0,): 1})

    def __eq__(self, other) -> bool:
        return isinstance(other, DensityPolynomial) and self.terms == other.terms

    def __add__(self, other: "DensityPolynomial") -> "DensityPolynomial":
        out = DensityPolynomial(self.terms)
        for orders, coeff in other.terms.items():
            out._add_term(orders, coeff)
        return out

    def __sub__(self, other: "DensityPolynomial") -> "DensityPolynomial":
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, DensityPolynomial):
            out = DensityPolynomial()
            for o1, c1 in self.terms.items():
                for o2, c2 in other.terms.items():
                    out._add_term(tuple(sorted(o1 + o2)), c1 * c2)
            return out
        out = DensityPolynomial()
        for orders, coeff in self.terms.items():
            out._add_term(orders, coeff * Fraction(other))
        return out

    __rmul__ = __mul__

    def derivative(self) -> "DensityPolynomial":
        """Formal d/dx by the Leibniz rule."""
        out = DensityPolynomial()
        for orders, coeff in self.terms.items():
            for i, a in enumerate(orders):
                bumped = orders[:i] + (a + 1,) + orders[i + 1 :]
                out._add_term(tuple(sorted(bumped)), coeff)
        return out

    def max_order(self) -> int:
        return max((max(o) for o in self.terms), default=0)

    def evaluate(self, f: GridFunction) -> float:
        """Integrate the density along f using spectral derivatives."""
        if not self.terms:
            return 0.0
        top = self.max_order()
        derivs = [f.values]
        g = f
        for _ in range(top):
            g = spectral_derivative(g, 1)
            derivs.append(g.values)
        total = np.zeros(f.grid.points)
        for orders, coeff in self.terms.items():
            term = np.full(f.grid.points, float(coeff))
            for a in orders:
                term = term * derivs[a]
            total += term
        return integrate(GridFunction(f.grid, total, periodic=True))

    def evaluate_pointwise(self, f: GridFunction) -> GridFunction:
        """Evaluate the density as a grid function (no integration)."""
        top = self.max_order()
        derivs = [f.values]
        g = f
        for _ in range(top):
            g = spectral_derivative(g, 1)
            derivs.append(g.values)
        total = np.zeros(f.grid.points)
        for orders, coeff in self.terms.items():
            term = np.full(f.grid.points, float(coeff))
            for a in orders:
                term = term * derivs[a]
            total += term
        return GridFunction(f.grid, total, periodic=True)

    def to_json(self) -> str:
        items = [
            {
                "coeff_num": coeff.numerator,
                "coeff_den": coeff.denominator,
                "orders": list(orders),
            }
            for orders, coeff in sorted(self.terms.items())
        ]
        return json.dumps(items)

    @classmethod
    def from_json(cls, text: str) -> "DensityPolynomial":
        out = cls()
        for item in json.loads(text):
            out._add_term(
                tuple(sorted(item["orders"])),
                Fraction(item["coeff_num"], item["coeff_den"]),
            )
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "0"

        def fmt(orders, coeff):
            factors = []
            for a in orders:
                factors.append("u" + "'" * a if a <= 3 else f"u^({a})")
            return f"{coeff}*" + "*".join(factors)

        return " + ".join(fmt(o, c) for o, c in sorted(self.terms.items()))


@lru_cache(maxsize=None)
def sigma_density(m: int) -> DensityPolynomial:
    """m-th density of the conserved-quantity recursion.

    sigma_1 = u and sigma_{m+1} = -sigma_m' - sum_{j=1}^{m-1} sigma_j sigma_{m-j}.
    """
    if m < 1:
        raise ValueError(f"recursion index must be >= 1, got {m}")
    if m == 1:
        return DensityPolynomial.u()
    prev = sigma_density(m - 1)
    out = (-1) * prev.derivative()
    for j in range(1, m - 1):
        out = out - sigma_density(j) * sigma_density(m - 1 - j)
    return out


@lru_cache(maxsize=None)
def energy_density(n: int) -> DensityPolynomial:
    """Unreduced density of the n-th conserved quantity: (-1)^n/2 * sigma_{2n+1}."""
    if not 1 <= n <= MAX_ENERGY_INDEX:
        raise ValueError(f"energy index must be in 1..{MAX_ENERGY_INDEX}, got {n}")
    return Fraction((-1) ** n, 2) * sigma_density(2 * n + 1)


def _canonical_ok(orders: tuple, n: int) -> bool:
    if orders == (n - 1, n - 1):
        return True
    if len(orders) == 1:
        return False  # a bare u^(a) is a total derivative unless a = 0... handled below
    return len(orders) >= 3 and max(orders) <= n - 2


def reduce_canonical(p: DensityPolynomial, n: int) -> DensityPolynomial:
    """Integrate by parts to the canonical E_n form: 1/2 (u^(n-1))^2 plus
    terms with at least three factors of order <= n-2.

    Each pass peels one derivative off a factor of maximal order and pushes
    it onto the rest of the term, dropping the exact total derivative.  If
    the rewrite regenerates the term being eliminated, the resulting linear
    relation is solved for it (such terms are total derivatives up to the
    remainder).
    """
    current = DensityPolynomial(p.terms)
    for _ in range(200 * n + 50):
        offender = None
        for orders in current.terms:
            if orders == (0,) or _canonical_ok(orders, n):
                continue
            if offender is None or (max(orders), orders) > (max(offender), offender):
                offender = orders
        if offender is None:
            if (0,) in current.terms:
                raise RuntimeError("reduction left a linear term; bad input density")
            quad = current.terms.get((n - 1, n - 1))
            if quad != Fraction(1, 2):
                raise RuntimeError(
                    f"reduction finished without the 1/2 (u^({n - 1}))^2 term: {quad}"
                )
            return current
        coeff = current.terms.pop(offender)
        if len(offender) == 1:
            # a single differentiated factor integrates to zero
            continue
        top = max(offender)
        i = offender.index(top)
        rest = offender[:i] + offender[i + 1 :]
        # coeff * rest * u^(top) == -coeff * (rest)' * u^(top-1)  (+ d/dx[...])
        rest_poly = DensityPolynomial({rest: 1})
        replacement = (-coeff) * rest_poly.derivative() * DensityPolynomial({(top - 1,): 1})
        mu = replacement.terms.pop(offender, Fraction(0))
        if coeff == mu:
            raise RuntimeError(f"degenerate reduction relation for term {offender}")
        # integral identity: coeff*T = mu*T + R  =>  coeff*T = R*coeff/(coeff-mu)
        scale = coeff / (coeff - mu)
        current = current + scale * replacement
    raise RuntimeError(f"canonical reduction did not terminate for n={n}")


@lru_cache(maxsize=None)
def canonical_energy_density(n: int) -> DensityPolynomial:
    return reduce_canonical(energy_density(n), n)


def eval_energy(n: int, f: GridFunction) -> float:
    """Value of the n-th conserved quantity along f."""
    return energy_density(n).evaluate(f)


def variational_derivative(p: DensityPolynomial) -> DensityPolynomial:
    """Euler operator: sum_a (-d/dx)^a (dp / du^(a))."""
    out = DensityPolynomial()
    for orders, coeff in p.terms.items():
        for a in set(orders):
            count = orders.count(a)
            i = orders.index(a)
            rest = orders[:i] + orders[i + 1 :]
            partial = DensityPolynomial({rest: coeff * count})
            for _ in range(a):
                partial = (-1) * partial.derivative()
            out = out + partial
    return out


@lru_cache(maxsize=None)
def energy_gradient_density(n: int) -> DensityPolynomial:
    return variational_derivative(energy_density(n))


def energy_gradient(n: int, f: GridFunction) -> GridFunction:
    """Gradient of the n-th conserved quantity evaluated on the grid."""
    return energy_gradient_density(n).evaluate_pointwise(f)


class EulerLagrangeReport:
    """Multipliers and the L^2 residual of the stationarity equation."""

    def __init__(self, multipliers, residual_norm: float, gradient_norm: float):
        self.multipliers = tuple(float(v) for v in multipliers)
        self.residual_norm = float(residual_norm)
        self.gradient_norm = float(gradient_norm)

    @property
    def relative_residual(self) -> float:
        if self.gradient_norm == 0:
            return self.residual_norm
        return self.residual_norm / self.gradient_norm


def euler_lagrange_residual(q: GridFunction, n: int, multipliers) -> EulerLagrangeReport:
    """L^2 norm of grad E_{n+1}(q) - sum_j lambda_j grad E_j(q)."""
    multipliers = tuple(multipliers)
    if len(multipliers) != n:
        raise ValueError(f"expected {n} multipliers, got {len(multipliers)}")
    top = energy_gradient(n + 1, q)
    resid = top.values.copy()
    for j, lam in enumerate(multipliers, start=1):
        resid -= lam * energy_gradient(j, q).values
    res_norm = sobolev_norm(GridFunction(q.grid, resid, periodic=True), 0)
    grad_norm = sobolev_norm(top, 0)
    return EulerLagrangeReport(multipliers, res_norm, grad_norm)
