"""Dense linear algebra over exact rationals and arbitrary-precision floats.

The matrices this package inverts are small (dimension at most a few
thousand) but carry enormous integer entries such as 2**(n*k) with n in the
tens, so the exact workhorse is Gauss-Jordan elimination over rationals held
in object arrays.  gmpy2.mpq is used when importable (several times faster
than fractions.Fraction on multi-hundred-bit values); otherwise Fraction.
Both expose numerator/denominator, interoperate with int and with each
other, and compare equal when equal, so callers may treat results as plain
rationals.

For matrices too large or too deep for exact work there is an mpmath path;
the caller picks the working precision in decimal digits and receives the
entrywise max-norm residual of A @ A_inv - I to enforce its own tolerance.
Plain float64 stays with numpy and needs nothing from here.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from .errors import ConditioningError, UsageError

try:
    from gmpy2 import mpq as RATIONAL
except ImportError:  # pragma: no cover - exercised only without gmpy2
    RATIONAL = Fraction

_ZERO = RATIONAL(0)
_ONE = RATIONAL(1)


def rational(value) -> "RATIONAL":
    """Coerce an int, Fraction, mpq, or rational string to the working type."""
    return RATIONAL(value)


def rational_matrix(rows) -> np.ndarray:
    """Object-dtype matrix of exact rationals from nested ints/rationals."""
    data = [[RATIONAL(v) for v in row] for row in rows]
    width = {len(row) for row in data}
    if len(data) == 0 or len(width) != 1:
        raise UsageError("rational_matrix needs a non-empty rectangular input")
    out = np.empty((len(data), width.pop()), dtype=object)
    for i, row in enumerate(data):
        out[i, :] = row
    return out


def rational_identity(size: int) -> np.ndarray:
    out = np.full((size, size), _ZERO, dtype=object)
    for i in range(size):
        out[i, i] = _ONE
    return out


def rational_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact matrix product of object-dtype matrices."""
    return np.dot(a, b)


def rational_inverse(a: np.ndarray) -> np.ndarray:
    """Exact inverse by Gauss-Jordan elimination with partial pivoting.

    Pivots are chosen by exact absolute value (no float conversion, so
    entries beyond float range are safe).  Raises ConditioningError when the
    matrix is exactly singular.  The result is exact by construction; no
    residual check is performed here.
    """
    size = a.shape[0]
    if a.shape != (size, size):
        raise UsageError(f"square matrix required, got {a.shape}")
    # Work on python lists: element access dominates and is ~2x faster
    # than object-ndarray indexing in the inner loops.
    work = [[RATIONAL(a[i, j]) for j in range(size)] for i in range(size)]
    inv = [[_ONE if i == j else _ZERO for j in range(size)] for i in range(size)]
    for col in range(size):
        pivot_row = max(range(col, size), key=lambda r: abs(work[r][col]))
        if work[pivot_row][col] == 0:
            raise ConditioningError(
                f"matrix is singular (rank deficiency found at column {col})"
            )
        if pivot_row != col:
            work[col], work[pivot_row] = work[pivot_row], work[col]
            inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        piv = work[col][col]
        if piv != 1:
            work[col] = [v / piv for v in work[col]]
            inv[col] = [v / piv for v in inv[col]]
        wcol, icol = work[col], inv[col]
        for row in range(size):
            f = work[row][col]
            if row == col or f == 0:
                continue
            wrow, irow = work[row], inv[row]
            for j in range(col, size):
                wrow[j] -= f * wcol[j]
            for j in range(size):
                irow[j] -= f * icol[j]
    out = np.empty((size, size), dtype=object)
    for i in range(size):
        out[i, :] = inv[i]
    return out


def rational_rank(a: np.ndarray) -> int:
    """Exact rank by row echelon reduction."""
    rows, cols = a.shape
    work = [[RATIONAL(a[i, j]) for j in range(cols)] for i in range(rows)]
    rank = 0
    for col in range(cols):
        pivot_row = next(
            (r for r in range(rank, rows) if work[r][col] != 0), None
        )
        if pivot_row is None:
            continue
        work[rank], work[pivot_row] = work[pivot_row], work[rank]
        piv = work[rank][col]
        work[rank] = [v / piv for v in work[rank]]
        prow = work[rank]
        for r in range(rows):
            if r != rank and work[r][col] != 0:
                f = work[r][col]
                work[r] = [v - f * p for v, p in zip(work[r], prow)]
        rank += 1
        if rank == rows:
            break
    return rank


def max_abs_residual(a: np.ndarray, a_inv: np.ndarray):
    """Exact max-norm of a @ a_inv - identity (a rational; 0 means perfect)."""
    prod = np.dot(a, a_inv)
    size = a.shape[0]
    worst = _ZERO
    for i in range(size):
        for j in range(size):
            r = abs(prod[i, j] - (_ONE if i == j else _ZERO))
            if r > worst:
                worst = r
    return worst


def mp_matrix(a, digits: int) -> mpmath.matrix:
    """mpmath matrix from nested ints/rationals, rounded at `digits`."""
    rows = len(a)
    cols = len(a[0])
    out = mpmath.matrix(rows, cols)
    with mpmath.workdps(digits):
        for i in range(rows):
            for j in range(cols):
                v = a[i][j] if not isinstance(a, np.ndarray) else a[i, j]
                if isinstance(v, (int, np.integer)):
                    out[i, j] = mpmath.mpf(int(v))
                elif isinstance(v, (float, mpmath.mpf)):
                    out[i, j] = mpmath.mpf(v)
                else:  # rational
                    out[i, j] = mpmath.mpf(int(v.numerator)) / int(v.denominator)
    return out


def mp_inverse(m: mpmath.matrix, digits: int) -> tuple[mpmath.matrix, float]:
    """Inverse at `digits` working precision, plus max-norm residual.

    The residual is computed at the same precision and returned as a float;
    callers decide whether it is acceptable.
    """
    with mpmath.workdps(digits):
        try:
            inv = m**-1
        except ZeroDivisionError as exc:
            raise ConditioningError(
                f"matrix is numerically singular at {digits} digits"
            ) from exc
        prod = m * inv
        worst = mpmath.mpf(0)
        for i in range(m.rows):
            for j in range(m.cols):
                r = abs(prod[i, j] - (1 if i == j else 0))
                if r > worst:
                    worst = r
    return inv, float(worst)


def mp_to_object(m: mpmath.matrix) -> np.ndarray:
    """Copy an mpmath matrix into an object ndarray of mpf entries."""
    out = np.empty((m.rows, m.cols), dtype=object)
    for i in range(m.rows):
        for j in range(m.cols):
            out[i, j] = m[i, j]
    return out


def to_float(a: np.ndarray) -> np.ndarray:
    """float64 copy of an object matrix; ConditioningError on overflow."""
    out = np.empty(a.shape, dtype=np.float64)
    flat_in, flat_out = a.ravel(), out.ravel()
    for idx in range(flat_in.size):
        try:
            flat_out[idx] = float(flat_in[idx])
        except OverflowError as exc:
            raise ConditioningError(
                "entry exceeds float64 range; use the exact or mp path"
            ) from exc
    if not np.all(np.isfinite(out)):
        raise ConditioningError(
            "entry exceeds float64 range; use the exact or mp path"
        )
    return out
