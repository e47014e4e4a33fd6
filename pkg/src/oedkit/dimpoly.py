"""Exact integer-valued OED polynomials ``D(L) = sum_j k_j L**j``.

Coefficients come from solving a Vandermonde system in exact rationals, with
the right-hand side taken either from engine counts or, for the open XY chain,
from the recursion over lower classes (mirror symmetry plus the ``4**L``
sum rule).
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .closure import DEFAULT_BUDGET, IncompleteClassError, generate_class
from .models import Hamiltonian
from .pauli import PauliString

__all__ = [
    "DimensionPolynomial",
    "PolynomialFitError",
    "ValueVector",
    "detect_degree",
    "fit_counts",
    "fit_from_engine",
    "solve_vandermonde",
    "xy_polynomials",
    "xy_value_vector",
]


class PolynomialFitError(ValueError):
    """Counts are not described by a polynomial of the stated degree."""


@dataclass(frozen=True)
class DimensionPolynomial:
    coeffs: tuple[Fraction, ...]
    validated_at: tuple[int, ...] = field(default=(), compare=False)

    @property
    def degree(self) -> int:
        """Nominal degree ``N`` (number of coefficients minus one)."""
        return len(self.coeffs) - 1

    @property
    def effective_degree(self) -> int:
        d = self.degree
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def __call__(self, L) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * L + c
        return acc

    def is_integer_valued(self, Ls: Sequence[int]) -> bool:
        return all(self(L).denominator == 1 and self(L) >= 0 for L in Ls)

    def to_json(self) -> dict:
        return {"degree": self.degree, "coeffs": [str(c) for c in self.coeffs],
                "validated_at": list(self.validated_at)}

    def __str__(self) -> str:
        parts = [f"({c})*L^{j}" for j, c in enumerate(self.coeffs) if c]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class ValueVector:
    values: tuple[int, ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.provenance:
            object.__setattr__(self, "provenance", ("engine",) * len(self.values))
        if len(self.provenance) != len(self.values):
            raise ValueError("provenance length mismatch")

    @property
    def degree(self) -> int:
        return len(self.values) - 1


def solve_vandermonde(values, nodes: Sequence[int] | None = None) -> DimensionPolynomial:
    """Solve ``V(nodes) k = values`` exactly; nodes default to ``0..N``."""
    vals = list(values.values if isinstance(values, ValueVector) else values)
    n = len(vals)
    if n == 0:
        raise ValueError("need at least one value")
    xs = list(range(n)) if nodes is None else list(nodes)
    if len(xs) != n or len(set(xs)) != n:
        raise ValueError("need one distinct node per value")
    rows = [[Fraction(x) ** j for j in range(n)] + [Fraction(v)] for x, v in zip(xs, vals)]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        rows[col] = [a / p for a in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return DimensionPolynomial(tuple(row[n] for row in rows))


def xy_value_vector(N: int, known: Sequence[DimensionPolynomial]) -> ValueVector:
    """Values ``D^N(0..N)`` of the open XY chain from ``D^0 .. D^{N-1}``.

    Below ``ceil(N/2)`` sites class ``N`` does not exist; between that and
    ``N`` the mirror relation ``D^N(m) = D^{2m-N}(m)`` applies; at ``m = N``
    the class fills what the lower classes and their mirrors leave of ``4**N``.
    """
    if len(known) < N:
        raise ValueError(f"need polynomials D^0..D^{N - 1}, got {len(known)}")
    vals = []
    for m in range(N + 1):
        if m <= math.ceil(N / 2 - 1):
            v = Fraction(0)
        elif m < N:
            v = known[2 * m - N](m)
        else:
            v = 4**N - 2 * sum(known[n](N) for n in range(N))
        if v.denominator != 1:
            raise PolynomialFitError(f"non-integer value at m={m}")
        vals.append(int(v))
    return ValueVector(tuple(vals), ("recursion",) * (N + 1))


def xy_polynomials(N_max: int) -> list[DimensionPolynomial]:
    polys: list[DimensionPolynomial] = []
    for N in range(N_max + 1):
        polys.append(solve_vandermonde(xy_value_vector(N, polys)))
    return polys


def fit_counts(sizes: Sequence[int], counts: Sequence[int], degree: int,
               held_out: Sequence[tuple[int, int]] = ()) -> DimensionPolynomial:
    """Interpolate ``degree + 1`` (size, count) pairs and check held-out pairs."""
    if len(sizes) != degree + 1 or len(counts) != degree + 1:
        raise ValueError(f"degree {degree} needs exactly {degree + 1} sizes")
    poly = solve_vandermonde(counts, sizes)
    for L, c in held_out:
        if poly(L) != c:
            raise PolynomialFitError(f"not polynomial of stated degree {degree}: "
                                     f"predicted {poly(L)} at L={L}, counted {c}")
    return DimensionPolynomial(poly.coeffs, tuple(L for L, _ in held_out))


def detect_degree(sizes: Sequence[int], counts: Sequence[int],
                  max_degree: int | None = None) -> DimensionPolynomial:
    """Lowest degree whose fit on the first points predicts every later point.

    At least one point is always held out.
    """
    n = len(sizes)
    top = n - 2 if max_degree is None else min(max_degree, n - 2)
    for d in range(top + 1):
        try:
            return fit_counts(sizes[: d + 1], counts[: d + 1], d,
                              list(zip(sizes[d + 1:], counts[d + 1:])))
        except PolynomialFitError:
            continue
    raise PolynomialFitError(f"no polynomial of degree <= {top} fits the counts")


def fit_from_engine(model: Callable[[int], Hamiltonian], seed: Callable[[int], PauliString],
                    degree: int, sizes: Sequence[int], held_out: Sequence[int] = (),
                    budget: int = DEFAULT_BUDGET) -> DimensionPolynomial:
    """Count class sizes with the closure engine and interpolate them exactly."""
    def count(L):
        c = generate_class(model(L), seed(L), budget)
        if not c.complete:
            raise IncompleteClassError(f"class incomplete at L={L}")
        return c.size

    counts = [count(L) for L in sizes]
    return fit_counts(sizes, counts, degree, [(L, count(L)) for L in held_out])
