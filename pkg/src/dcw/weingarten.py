"""Gram matrices of the commutant basis and their inverses.

The k-fold Clifford commutant on n qubits is spanned by the monomials from
`dcw.monomials`; each basis element factorizes per qubit, so the full Gram
matrix of Hilbert-Schmidt inner products is the entrywise n-th power of the
per-qubit factor matrix G1.  Inverting that Gram matrix yields the
coefficients that reconstruct a k-fold-twirled operator from its overlaps,
the Clifford analogue of Haar-unitary Weingarten data.

Inner-product convention: <A, B> = tr(A^dagger B), adjoint on the left.  For
the permutation operators T_pi on (C^d)^(tensor k) this gives the entry
d**cycles(inverse(pi) compose sigma).  The undaggered product trace
tr(T_pi T_sigma) = d**cycles(pi compose sigma) is the same data with row pi
relabeled to inverse(pi); we keep the daggered form throughout because it is
the one whose inverse has the 1/d**k diagonal limit and for which the
projector identities of build_L hold without any relabeling.

Three numeric representations are supported and recorded in GramData.mode:
  exact  object arrays of ints/rationals, Gauss-Jordan inversion (GramData
         entries up to 2**(n*k) are fine; capped at basis size 270 because
         cost grows cubically with dimension);
  float  float64 with numpy inversion, for large bases at moderate n*k;
  mp     mpmath at a caller-chosen number of decimal digits, for large n*k
         beyond float64 range (same 270 size cap as exact).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import (
    ConditioningError,
    ConsistencyError,
    RegimeError,
    ResourceLimitError,
    UsageError,
)
from .linalg import (
    RATIONAL,
    max_abs_residual,
    mp_inverse,
    mp_matrix,
    mp_to_object,
    rational_inverse,
    rational_matrix,
    rational_rank,
    to_float,
)
from .monomials import MonomialBasis

MODES = ("exact", "float", "mp")
EXACT_SIZE_LIMIT = 270
DEFAULT_DIGITS = 50
FLOAT_RESIDUAL_TOL = 1e-9
MP_RESIDUAL_TOL = 1e-30


def cycle_count(perm: tuple[int, ...]) -> int:
    """Number of cycles of a permutation given as an image tuple."""
    seen = [False] * len(perm)
    count = 0
    for start in range(len(perm)):
        if not seen[start]:
            count += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return count


def perm_inverse(perm: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(perm)
    for i, image in enumerate(perm):
        out[image] = i
    return tuple(out)


def perm_compose(outer: tuple[int, ...], inner: tuple[int, ...]) -> tuple[int, ...]:
    """Image tuple of outer after inner (apply inner first)."""
    return tuple(outer[inner[i]] for i in range(len(inner)))


@dataclass
class GramData:
    """Gram matrix of the monomial basis on n qubits, in one numeric mode.

    G1 holds the per-qubit factors as exact integers regardless of mode; W
    is its entrywise n-th power in the mode's representation.  W_inv and
    residual stay None until invert_gram fills them.  residual is the exact
    or measured max-norm of W @ W_inv - identity.
    """

    k: int
    n: int
    basis: MonomialBasis
    mode: str
    digits: int | None
    G1: np.ndarray
    W: np.ndarray
    W_inv: np.ndarray | None = field(default=None)
    residual: float | None = field(default=None)

    @property
    def size(self) -> int:
        return len(self.basis)


def _g1_exact(basis: MonomialBasis) -> np.ndarray:
    """Per-qubit Gram factors as an object array of python ints."""
    core = basis.gram_core()
    ms = basis.m_values()
    k = basis.k
    size = len(basis)
    out = np.empty((size, size), dtype=object)
    for i in range(size):
        mi = int(ms[i])
        for j in range(size):
            num = int(core[i, j]) << k
            den = 1 << (mi + int(ms[j]))
            q, r = divmod(num, den)
            if r:
                raise ConsistencyError(
                    f"non-integer per-qubit Gram entry at ({i},{j})"
                )
            out[i, j] = q
    return out


def gram(n: int, basis: MonomialBasis, mode: str = "exact",
         digits: int = DEFAULT_DIGITS) -> GramData:
    """Gram matrix of the basis on n qubits: W = G1 entrywise to the n."""
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, got {mode!r}")
    size = len(basis)
    if mode in ("exact", "mp") and size > EXACT_SIZE_LIMIT:
        raise ResourceLimitError(
            f"{mode} mode is capped at basis size {EXACT_SIZE_LIMIT} "
            f"(got {size}); use mode='float'"
        )
    g1 = _g1_exact(basis)
    if mode == "exact":
        w = np.empty((size, size), dtype=object)
        for i in range(size):
            for j in range(size):
                w[i, j] = g1[i, j] ** n
    elif mode == "float":
        g1f = to_float(g1)
        with np.errstate(over="raise"):
            try:
                w = g1f**n
            except FloatingPointError as exc:
                raise ConditioningError(
                    f"2**(n*k) = 2**{n * basis.k} exceeds float64 range; "
                    "use mode='mp'"
                ) from exc
    else:
        w = np.empty((size, size), dtype=object)
        with mpmath.workdps(digits):
            for i in range(size):
                for j in range(size):
                    w[i, j] = mpmath.mpf(int(g1[i, j])) ** n
    return GramData(k=basis.k, n=n, basis=basis, mode=mode,
                    digits=digits if mode == "mp" else None, G1=g1, W=w)


def invert_gram(g: GramData, tol: float | None = None) -> GramData:
    """Fill g.W_inv and g.residual in place and return g.

    Requires n >= k-1; below that the Gram matrix is singular (measured
    thresholds for k = 2..4 all equal k-1, matching where the basis becomes
    linearly independent).  Exact inversions have residual identically zero;
    float and mp inversions must meet `tol` (defaults 1e-9 and 1e-30) or a
    ConditioningError reports the condition estimate.
    """
    if g.n < g.k - 1:
        raise RegimeError(
            f"Gram matrix is singular for n < k-1 (n={g.n}, k={g.k})"
        )
    size = g.size
    if g.mode == "exact":
        g.W_inv = rational_inverse(g.W)
        if size <= 64:
            check = max_abs_residual(g.W, g.W_inv)
            if check != 0:
                raise ConsistencyError("exact inversion residual is nonzero")
        g.residual = 0.0
    elif g.mode == "float":
        tol = FLOAT_RESIDUAL_TOL if tol is None else tol
        winv = np.linalg.inv(g.W)
        residual = float(np.max(np.abs(g.W @ winv - np.eye(size))))
        if residual > tol:
            raise ConditioningError(
                f"float inversion residual {residual:.3e} exceeds {tol:.1e} "
                f"(condition estimate {np.linalg.cond(g.W):.3e})"
            )
        g.W_inv, g.residual = winv, residual
    else:
        tol = MP_RESIDUAL_TOL if tol is None else tol
        m = mp_matrix(g.W, g.digits)
        inv, residual = mp_inverse(m, g.digits)
        if residual > tol:
            raise ConditioningError(
                f"mp inversion residual {residual:.3e} exceeds {tol:.1e} "
                f"at {g.digits} digits; raise digits"
            )
        g.W_inv, g.residual = mp_to_object(inv), residual
    return g


def independence_threshold(k: int, basis: MonomialBasis | None = None,
                           n_max: int | None = None) -> int:
    """Smallest n for which the Gram matrix is nonsingular, by exact rank.

    Measured values are k-1 for k = 2..4.  Scans n = 1..n_max (default k+1)
    and raises ConsistencyError if everything in range is singular.
    """
    from .monomials import enumerate_monomials

    basis = basis if basis is not None else enumerate_monomials(k)
    if len(basis) > EXACT_SIZE_LIMIT:
        raise ResourceLimitError(
            f"exact rank scan capped at basis size {EXACT_SIZE_LIMIT}"
        )
    g1 = _g1_exact(basis)
    size = len(basis)
    n_max = n_max if n_max is not None else k + 1
    for n in range(1, n_max + 1):
        w = np.empty((size, size), dtype=object)
        for i in range(size):
            for j in range(size):
                w[i, j] = g1[i, j] ** n
        if rational_rank(w) == size:
            return n
    raise ConsistencyError(f"Gram matrix still singular at n = {n_max}")


@dataclass
class UnitaryWeingarten:
    """Gram data of the k permutation operators on (C^d)^(tensor k).

    Lambda[p, s] = d**cycles(inverse(perms[p]) compose perms[s]), with perms
    listed in lexicographic order; Lambda_inv is its exact rational inverse.
    Invertible whenever d >= k.
    """

    k: int
    d: int
    perms: tuple[tuple[int, ...], ...]
    Lambda: np.ndarray
    Lambda_inv: np.ndarray


def unitary_weingarten(k: int, n: int) -> UnitaryWeingarten:
    """Exact permutation-operator Gram matrix and inverse for d = 2**n."""
    if k < 1 or n < 1:
        raise UsageError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    d = 1 << n
    if d < k:
        raise RegimeError(
            f"permutation Gram is singular for d < k (d={d}, k={k})"
        )
    perms = tuple(itertools.permutations(range(k)))
    size = len(perms)
    lam = np.empty((size, size), dtype=object)
    for a, p in enumerate(perms):
        p_inv = perm_inverse(p)
        for b, s in enumerate(perms):
            lam[a, b] = d ** cycle_count(perm_compose(p_inv, s))
    try:
        lam_inv = rational_inverse(lam)
    except ConditioningError as exc:
        raise ConsistencyError(
            f"permutation Gram unexpectedly singular at d={d} >= k={k}"
        ) from exc
    return UnitaryWeingarten(k=k, d=d, perms=perms, Lambda=lam,
                             Lambda_inv=lam_inv)


def build_L(g: GramData, uw: UnitaryWeingarten) -> np.ndarray:
    """Projector onto the permutation span, in the monomial basis.

    Row pi of L is Lambda_inv @ (permutation rows of W); all other rows are
    zero.  L is idempotent with trace k! and L @ W_inv equals Lambda_inv
    embedded in the permutation block.  Representation follows g.mode.
    """
    if uw.k != g.k or uw.d != (1 << g.n):
        raise UsageError(
            f"mismatched sizes: gram is (k={g.k}, n={g.n}), "
            f"unitary data is (k={uw.k}, d={uw.d})"
        )
    perm_rows = list(g.basis.permutation_indices)
    words = tuple(g.basis.monomials[i].perm for i in perm_rows)
    if words != uw.perms:
        raise ConsistencyError("permutation ordering mismatch with basis")
    size = g.size
    w_perm = g.W[perm_rows, :]
    if g.mode == "exact":
        out = np.full((size, size), RATIONAL(0), dtype=object)
        out[perm_rows, :] = np.dot(uw.Lambda_inv, w_perm)
    elif g.mode == "float":
        out = np.zeros((size, size))
        out[perm_rows, :] = to_float(uw.Lambda_inv) @ w_perm
    else:
        out = np.full((size, size), mpmath.mpf(0), dtype=object)
        with mpmath.workdps(g.digits):
            lam_inv = mp_matrix(uw.Lambda_inv, g.digits)
            block = lam_inv * mpmath.matrix(w_perm.tolist())
        out[perm_rows, :] = mp_to_object(block)
    return out


def z_normalization(k: int, n: int) -> int:
    """2**n times the product of (2**n + 2**i) for i = 0..k-2.

    The uniform average of k-fold-copied stabilizer-state projectors equals
    the sum of all basis monomials divided by this number, and every row of
    the Gram matrix W sums to it (both facts are tested).
    """
    out = 1 << n
    for i in range(k - 1):
        out *= (1 << n) + (1 << i)
    return out


def asymptotic_regime(k: int) -> int:
    """Smallest n at which the inverse-entry tail bounds below are claimed."""
    return k * k - 3 * k + 13


def inverse_entry_bounds(k: int, n: int, size: int):
    """(diagonal, off-diagonal) tail bounds on W_inv entries at large n.

    Diagonal entries approach 1/d**k within 6*size**2/d**(k+1); off-diagonal
    magnitudes stay below 5*size**2/d**(k+1).  Valid for
    n >= asymptotic_regime(k).  Exact rationals.
    """
    dk1 = 1 << (n * (k + 1))
    return (
        RATIONAL(6 * size * size) / dk1,
        RATIONAL(5 * size * size) / dk1,
    )


def eigenvalue_bracket(k: int, n: int, size: int) -> tuple[int, int]:
    """All Gram eigenvalues lie in d**k plus-minus size*d**(k-1)."""
    d = 1 << n
    return (d**k - size * d ** (k - 1), d**k + size * d ** (k - 1))
