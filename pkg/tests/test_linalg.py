"""Exact and arbitrary-precision inversion helpers.

The 2x2 expected inverses below were worked out by hand with the adjugate
formula; they double as the frozen oracle for the Gram examples used
elsewhere.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcw.errors import ConditioningError, UsageError
from dcw.linalg import (
    max_abs_residual,
    mp_inverse,
    mp_matrix,
    mp_to_object,
    rational,
    rational_identity,
    rational_inverse,
    rational_matmul,
    rational_matrix,
    rational_rank,
    to_float,
)


def test_inverse_2x2_hand_oracle():
    a = rational_matrix([[4, 2], [2, 4]])
    inv = rational_inverse(a)
    want = [
        [Fraction(4, 12), Fraction(-2, 12)],
        [Fraction(-2, 12), Fraction(4, 12)],
    ]
    for i in range(2):
        for j in range(2):
            assert inv[i, j] == want[i][j]
    assert max_abs_residual(a, inv) == 0


def test_inverse_3x3_hand_oracle():
    # det = 1 by construction (unimodular), so the inverse is integral.
    a = rational_matrix([[1, 2, 3], [0, 1, 4], [0, 0, 1]])
    inv = rational_inverse(a)
    want = [[1, -2, 5], [0, 1, -4], [0, 0, 1]]
    for i in range(3):
        for j in range(3):
            assert inv[i, j] == want[i][j]


def test_inverse_huge_integer_entries():
    big = 1 << 100
    a = rational_matrix([[big, 1], [1, big]])
    inv = rational_inverse(a)
    det = big * big - 1
    assert inv[0, 0] == Fraction(big, det)
    assert inv[0, 1] == Fraction(-1, det)
    assert max_abs_residual(a, inv) == 0


def test_singular_raises():
    a = rational_matrix([[1, 2], [2, 4]])
    with pytest.raises(ConditioningError):
        rational_inverse(a)


def test_non_square_raises():
    with pytest.raises(UsageError):
        rational_inverse(rational_matrix([[1, 2, 3], [4, 5, 6]]))


@st.composite
def unimodular_products(draw):
    """L @ U with unit diagonals: invertible by construction, det = 1."""
    size = draw(st.integers(min_value=1, max_value=5))
    small = st.integers(min_value=-4, max_value=4)
    lower = [[draw(small) if j < i else (1 if i == j else 0) for j in range(size)] for i in range(size)]
    upper = [[draw(small) if j > i else (1 if i == j else 0) for j in range(size)] for i in range(size)]
    return rational_matmul(rational_matrix(lower), rational_matrix(upper))


@settings(max_examples=60, deadline=None)
@given(unimodular_products())
def test_inverse_roundtrip_exact(a):
    inv = rational_inverse(a)
    assert max_abs_residual(a, inv) == 0
    assert max_abs_residual(inv, a) == 0


def test_rank():
    assert rational_rank(rational_matrix([[1, 2], [2, 4]])) == 1
    assert rational_rank(rational_identity(4)) == 4
    assert rational_rank(rational_matrix([[0, 0], [0, 0]])) == 0
    a = rational_matrix([[1, 2, 3], [4, 5, 6], [5, 7, 9]])  # row3 = row1 + row2
    assert rational_rank(a) == 2


def test_rational_coercion():
    assert rational(Fraction(3, 7)) == Fraction(3, 7)
    assert rational(5) == 5
    m = rational_matrix([[Fraction(1, 2), 1], [0, 2]])
    assert m[0, 0] * 2 == 1


def test_mp_inverse_residual():
    base = rational_matrix([[4, 2], [2, 4]])
    m = mp_matrix(base, digits=40)
    inv, residual = mp_inverse(m, digits=40)
    assert residual < 1e-35
    obj = mp_to_object(inv)
    assert abs(float(obj[0, 0]) - 1 / 3) < 1e-12


def test_mp_inverse_big_entries_keep_relative_precision():
    big = 1 << 200  # far past float64 range
    base = rational_matrix([[big, 1], [1, big]])
    m = mp_matrix(base, digits=80)
    inv, residual = mp_inverse(m, digits=80)
    assert residual < 1e-60


def test_mp_singular_raises():
    m = mp_matrix(rational_matrix([[1, 2], [2, 4]]), digits=30)
    with pytest.raises(ConditioningError):
        mp_inverse(m, digits=30)


def test_to_float_overflow():
    a = rational_matrix([[1 << 2000, 0], [0, 1]])
    with pytest.raises(ConditioningError):
        to_float(a)
    small = to_float(rational_matrix([[Fraction(1, 4), 2], [3, 4]]))
    assert small.dtype == np.float64
    assert small[0, 0] == 0.25
