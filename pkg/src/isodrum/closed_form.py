"""Closed-form spectra of the separable square/triangle pair.

The unit square with Dirichlet conditions on two adjacent sides and Neumann
on the other two has eigenfunctions sin((2m+1)*pi*x/2)*sin(n*pi*y), giving

    lambda_{m,n} = (pi^2/4) * ((2m+1)^2 + 4 n^2),   m >= 0, n >= 1.

The right isosceles triangle obtained by folding the square along a diagonal
(legs sqrt2, Dirichlet on one leg and the hypotenuse, Neumann on the other
leg) has

    mu_{k,l} = (pi^2/4) * ((2k+1)^2 + (2l+1)^2) / 2,   k > l >= 0.

Eigenvalues are stored as exact Fraction multiples of pi^2 so multiset
comparisons are exact, not tolerance-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

PI2 = math.pi * math.pi


@dataclass(frozen=True)
class SquareIndex:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 1:
            raise IndexError(f"square index needs m >= 0, n >= 1, got {self}")


@dataclass(frozen=True)
class TriangleIndex:
    k: int
    l: int

    def __post_init__(self):
        if self.l < 0 or self.k <= self.l:
            raise IndexError(f"triangle index needs k > l >= 0, got {self}")


def lambda_coeff(m: int, n: int) -> Fraction:
    """lambda_{m,n} divided by pi^2, exactly."""
    idx = SquareIndex(m, n)
    return Fraction((2 * idx.m + 1) ** 2 + 4 * idx.n**2, 4)


def mu_coeff(k: int, l: int) -> Fraction:
    """mu_{k,l} divided by pi^2, exactly.

    Raises IndexError for k <= l: the antisymmetric combination of plane
    waves vanishes identically there.
    """
    idx = TriangleIndex(k, l)
    return Fraction((2 * idx.k + 1) ** 2 + (2 * idx.l + 1) ** 2, 8)


def lambda_value(m: int, n: int) -> float:
    return float(lambda_coeff(m, n)) * PI2


def mu_value(k: int, l: int) -> float:
    return float(mu_coeff(k, l)) * PI2


def mu_to_lambda(k: int, l: int) -> SquareIndex:
    """Square index with the same eigenvalue as mu_{k,l}, exactly."""
    TriangleIndex(k, l)
    d = k - l
    if d % 2 == 1:
        j = (d - 1) // 2
        return SquareIndex(j, l + j + 1)
    j = d // 2
    return SquareIndex(l + j, j)


def lambda_to_mu(m: int, n: int) -> TriangleIndex:
    """Triangle index with the same eigenvalue as lambda_{m,n}; inverse of
    mu_to_lambda."""
    SquareIndex(m, n)
    if m >= n:
        return TriangleIndex(m + n, m - n)
    return TriangleIndex(m + n, n - m - 1)


@dataclass(frozen=True)
class SpectrumEntry:
    coeff: Fraction  # eigenvalue / pi^2
    multiplicity: int
    indices: tuple[tuple[int, int], ...]

    @property
    def value(self) -> float:
        return float(self.coeff) * PI2


@dataclass(frozen=True)
class SpectrumMultiset:
    which: str
    entries: tuple[SpectrumEntry, ...]  # strictly increasing coeffs

    def values(self) -> list[Fraction]:
        """Eigenvalue coefficients repeated by multiplicity."""
        out: list[Fraction] = []
        for e in self.entries:
            out.extend([e.coeff] * e.multiplicity)
        return out

    def __len__(self) -> int:
        return sum(e.multiplicity for e in self.entries)


def _enumerate_square(cutoff: Fraction) -> list[tuple[Fraction, tuple[int, int]]]:
    # (2m+1)^2 + 4n^2 <= 4*cutoff
    bound = 4 * cutoff
    out = []
    m = 0
    while (2 * m + 1) ** 2 <= bound:
        rest = bound - (2 * m + 1) ** 2
        nmax = math.isqrt(int(rest // 4))
        for n in range(1, nmax + 1):
            out.append((Fraction((2 * m + 1) ** 2 + 4 * n * n, 4), (m, n)))
        m += 1
    return out


def _enumerate_triangle(cutoff: Fraction) -> list[tuple[Fraction, tuple[int, int]]]:
    # (2k+1)^2 + (2l+1)^2 <= 8*cutoff, k > l
    bound = 8 * cutoff
    out = []
    l = 0
    while 2 * (2 * l + 1) ** 2 < bound:
        rest = bound - (2 * l + 1) ** 2
        kmax = (math.isqrt(int(rest)) - 1) // 2
        for k in range(l + 1, kmax + 1):
            out.append(
                (Fraction((2 * k + 1) ** 2 + (2 * l + 1) ** 2, 8), (k, l))
            )
        l += 1
    return out


def spectrum(which: str, count: int) -> SpectrumMultiset:
    """First `count` eigenvalues (with multiplicity) of 'square' or 'triangle'.

    Enumerates all indices below a cutoff, doubling the cutoff until the
    requested rank is safely inside, so no small eigenvalue can be missed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    enum = {"square": _enumerate_square, "triangle": _enumerate_triangle}.get(which)
    if enum is None:
        raise ValueError(f"unknown spectrum family {which!r}")
    cutoff = Fraction(max(16, 2 * count))
    while True:
        items = enum(cutoff)
        if len(items) >= count:
            items.sort(key=lambda t: t[0])
            nth = items[count - 1][0]
            if nth <= cutoff:  # every value <= nth was enumerated
                break
        cutoff *= 2
    kept = [t for t in items if t[0] <= nth]
    entries: list[SpectrumEntry] = []
    for coeff, idx in kept:
        if entries and entries[-1].coeff == coeff:
            last = entries[-1]
            entries[-1] = SpectrumEntry(
                coeff, last.multiplicity + 1, last.indices + (idx,)
            )
        else:
            entries.append(SpectrumEntry(coeff, 1, (idx,)))
    # Trim to exactly `count` values, keeping whole clusters' indices visible:
    # the final entry may contribute fewer values than its multiplicity.
    total = 0
    trimmed: list[SpectrumEntry] = []
    for e in entries:
        take = min(e.multiplicity, count - total)
        if take <= 0:
            break
        trimmed.append(SpectrumEntry(e.coeff, take, e.indices[:take]))
        total += take
    return SpectrumMultiset(which, tuple(trimmed))
