"""Closed-form spectra of the square and triangle family."""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from isodrum.closed_form import (
    lambda_coeff,
    lambda_to_mu,
    lambda_value,
    mu_coeff,
    mu_to_lambda,
    mu_value,
    spectrum,
)


def test_coefficient_formulas():
    assert lambda_coeff(0, 1) == Fraction(5, 4)
    assert lambda_coeff(1, 1) == Fraction(13, 4)
    assert mu_coeff(1, 0) == Fraction(5, 4)
    assert mu_coeff(2, 0) == Fraction(13, 4)


def test_values_are_pi2_multiples():
    assert lambda_value(0, 1) == pytest.approx(float(Fraction(5, 4)) * math.pi**2)
    assert mu_value(3, 0) == pytest.approx(float(Fraction(25, 4)) * math.pi**2)


def test_index_validation():
    with pytest.raises(IndexError):
        lambda_coeff(-1, 1)
    with pytest.raises(IndexError):
        lambda_coeff(0, 0)
    with pytest.raises(IndexError):
        mu_coeff(1, 1)  # needs k > l
    with pytest.raises(IndexError):
        mu_coeff(0, -1)


def test_pairing_anchor():
    # lowest triangle index maps to the square index of the same coefficient
    sq = mu_to_lambda(3, 0)
    assert (sq.m, sq.n) == (1, 2)
    assert mu_coeff(3, 0) == lambda_coeff(1, 2) == Fraction(25, 4)
    tr = lambda_to_mu(1, 2)
    assert (tr.k, tr.l) == (3, 0)


def test_pairing_preserves_value_everywhere():
    for k in range(1, 30):
        for l in range(k):
            sq = mu_to_lambda(k, l)
            assert lambda_coeff(sq.m, sq.n) == mu_coeff(k, l)


def test_pairing_is_bijection_small_block():
    seen = set()
    for m in range(15):
        for n in range(1, 16):
            tr = lambda_to_mu(m, n)
            assert tr.k > tr.l >= 0
            back = mu_to_lambda(tr.k, tr.l)
            assert (back.m, back.n) == (m, n)
            seen.add((tr.k, tr.l))
    assert len(seen) == 15 * 15


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=400), st.integers(min_value=1, max_value=400))
def test_pairing_roundtrip(m, n):
    tr = lambda_to_mu(m, n)
    back = mu_to_lambda(tr.k, tr.l)
    assert (back.m, back.n) == (m, n)
    assert mu_coeff(tr.k, tr.l) == lambda_coeff(m, n)


def test_spectra_agree_to_depth_2000():
    sq = spectrum("square", 2000)
    tr = spectrum("triangle", 2000)
    assert len(sq) >= 2000 and len(tr) >= 2000
    assert sq.values()[:2000] == tr.values()[:2000]


def test_spectrum_entries_strictly_increasing():
    sq = spectrum("square", 200)
    coeffs = [e.coeff for e in sq.entries]
    assert all(a < b for a, b in zip(coeffs, coeffs[1:]))
    assert all(e.multiplicity == len(e.indices) for e in sq.entries)


def test_spectrum_ground_state():
    sq = spectrum("square", 1)
    tr = spectrum("triangle", 1)
    assert sq.entries[0].coeff == tr.entries[0].coeff == Fraction(5, 4)
    assert sq.entries[0].multiplicity == 1
    assert sq.entries[0].indices == ((0, 1),)
    assert tr.entries[0].indices == ((1, 0),)


def test_first_multiplicity_two():
    # 65/4 = (1+64)/4 = (49+16)/4 is the first square coefficient hit twice
    sq = spectrum("square", 40)
    multi = [e for e in sq.entries if e.multiplicity > 1]
    assert multi
    assert multi[0].coeff == Fraction(65, 4)
    assert multi[0].multiplicity == 2
    assert set(multi[0].indices) == {(0, 4), (3, 2)}


def test_spectrum_rejects_bad_args():
    with pytest.raises(ValueError):
        spectrum("pentagon", 5)
    with pytest.raises(ValueError):
        spectrum("square", 0)


def test_spectrum_brute_force_cross_check():
    # independent enumeration straight from the index sets
    want = 300
    sq_brute = sorted(
        Fraction((2 * m + 1) ** 2 + 4 * n * n, 4)
        for m in range(80)
        for n in range(1, 81)
    )[:want]
    tr_brute = sorted(
        Fraction((2 * k + 1) ** 2 + (2 * l + 1) ** 2, 8)
        for k in range(160)
        for l in range(k)
    )[:want]
    assert spectrum("square", want).values()[:want] == sq_brute
    assert spectrum("triangle", want).values()[:want] == tr_brute
    assert sq_brute == tr_brute
