"""Commutant basis for the k-fold Clifford action: reduced Pauli monomials.

A monomial factor is specified by (k, V, M): V is a k x m binary matrix whose
columns v_1..v_m span an m-dimensional subspace of the even-weight vectors in
F_2^k, and M is a symmetric m x m binary matrix with zero diagonal.  The
scaled single-qubit factor is

    omega_scaled = 2^m * omega
                 = sum over (P_1..P_m) in {I,X,Y,Z}^m of
                       prod_{i<j} chi(P_i, P_j)^{M_ij} * P_1^{(v_1)} ... P_m^{(v_m)}

where P^{(v)} places a copy of P on every replica in the support of v.  Writing
P_i = sigma(x_i, z_i) and normal-ordering each replica's letter product into
X^X Z^Z form, every one of the 4^m summands is +-1 times a plain X^X Z^Z word
with X = sum_i x_i v_i, Z = sum_i z_i v_i over F_2, and the sign has three
parts (all computed over the integers, reduced mod 2):

    ordering:  sum_{i<j} z_i x_j <v_i, v_j>        (Z's crossing X's, per replica)
    Y-fold:    sum_i x_i z_i |v_i| / 2             (from sigma(1,1)^{(v)} = i^{|v|} (XZ)^{(v)})
    chi part:  sum_{i<j} M_ij (x_i z_j + z_i x_j)

|v_i| is even so the Y-fold exponent is an integer; hence omega_scaled is a
real integer matrix.  Because V has full column rank, the map (x vec, z vec)
-> (X, Z) is injective and the 4^m terms hit 4^m distinct Pauli words.

Enumeration walks one canonical (reduced row echelon) basis per subspace of
the even-weight space and all admissible M; the identity

    sum_m [k-1 choose m]_2 * 2^(m(m-1)/2)  =  prod_{i=0}^{k-2} (2^i + 1)

says this produces exactly the closed-form count, and deduplication by exact
term-list equality verifies that no two specs built the same operator.

Representation matrices T_pi of replica permutations are themselves monomials
with m = k - cycles(pi); identify_permutations matches them by expanding each
T_pi in the X^X Z^Z basis independently and looking the result up in the
enumerated set.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    ConsistencyError,
    DimensionError,
    ResourceLimitError,
    SpecError,
    UsageError,
)

K_MAX_DEFAULT = 6
K_MAX_ENUMERATE = 7  # beyond this even the term lists stop fitting in memory

# monomials with this many replicas keep only a digest of their term list
_DIGEST_ONLY_K = 7


def monomial_count(k: int) -> int:
    """Closed-form |P| = prod_{i=0}^{k-2} (2^i + 1)."""
    out = 1
    for i in range(k - 1):
        out *= (1 << i) + 1
    return out


@dataclass(frozen=True)
class MonomialSpec:
    """(k, V, M) data; V/M are tuples of column/row bitmasks."""

    k: int
    V: tuple[int, ...]  # V[i] = i-th column as a k-bit mask
    M: tuple[int, ...]  # M[i] = i-th row as an m-bit mask

    @property
    def m(self) -> int:
        return len(self.V)

    def validate(self) -> None:
        k, m = self.k, self.m
        if k < 2:
            raise SpecError(f"need k >= 2, got {k}")
        if not (0 <= m <= k - 1):
            raise SpecError(f"m={m} outside [0, k-1]")
        if len(self.M) != m:
            raise SpecError("M row count must equal m")
        for v in self.V:
            if not 0 <= v < (1 << k):
                raise SpecError(f"column {v:#x} does not fit in {k} bits")
            if v.bit_count() % 2:
                raise SpecError(f"column {v:#x} has odd weight")
        if _f2_rank(self.V) != m:
            raise SpecError("V columns are linearly dependent")
        for i, row in enumerate(self.M):
            if not 0 <= row < (1 << m):
                raise SpecError(f"M row {row:#x} does not fit in {m} bits")
            if (row >> i) & 1:
                raise SpecError("M has a nonzero diagonal entry")
            for j in range(m):
                if ((row >> j) & 1) != ((self.M[j] >> i) & 1):
                    raise SpecError("M is not symmetric")


def _f2_rank(cols: tuple[int, ...]) -> int:
    rank = 0
    rows = list(cols)
    for _ in range(len(rows)):
        rows = [r for r in rows if r]
        if not rows:
            break
        pivot = rows.pop()
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


def _compute_terms(spec: MonomialSpec):
    """All 4^m (X, Z, sign) terms of omega_scaled, sorted by (X, Z)."""
    k, m, V, M = spec.k, spec.m, spec.V, spec.M
    count = 1 << (2 * m)
    xs = np.zeros(count, dtype=np.int64)
    zs = np.zeros(count, dtype=np.int64)
    parity = np.zeros(count, dtype=np.int64)
    if m:
        a = np.arange(count, dtype=np.int64)
        xb = (a[:, None] >> np.arange(m)) & 1
        zb = (a[:, None] >> (np.arange(m) + m)) & 1
        for i in range(m):
            xs ^= np.where(xb[:, i] == 1, V[i], 0)
            zs ^= np.where(zb[:, i] == 1, V[i], 0)
            parity += xb[:, i] * zb[:, i] * (V[i].bit_count() // 2)
        for i in range(m):
            for j in range(i + 1, m):
                parity += zb[:, i] * xb[:, j] * (V[i] & V[j]).bit_count()
                if (M[i] >> j) & 1:
                    parity += xb[:, i] * zb[:, j] + zb[:, i] * xb[:, j]
    coeffs = (1 - 2 * (parity & 1)).astype(np.int8)
    order = np.lexsort((zs, xs))
    xs, zs, coeffs = xs[order], zs[order], coeffs[order]
    # injectivity of (x vec, z vec) -> (X, Z); a collision means V lost rank
    assert len(np.unique((xs << k) | zs)) == count
    return xs, zs, coeffs


def _term_key(k: int, xs, zs, coeffs) -> bytes:
    packed = (
        xs.astype(np.int16).tobytes()
        + zs.astype(np.int16).tobytes()
        + coeffs.tobytes()
    )
    if k >= _DIGEST_ONLY_K:
        return hashlib.sha256(packed).digest()
    return packed


_POPCOUNT_CACHE: dict[int, np.ndarray] = {}


def _popcount_table(k: int) -> np.ndarray:
    tbl = _POPCOUNT_CACHE.get(k)
    if tbl is None:
        tbl = np.array([b.bit_count() for b in range(1 << k)], dtype=np.int64)
        _POPCOUNT_CACHE[k] = tbl
    return tbl


@dataclass
class Monomial:
    """One commutant basis factor; terms are rebuilt on demand."""

    spec: MonomialSpec
    key: bytes
    is_permutation: bool = False
    perm: tuple[int, ...] | None = None
    index: int | None = None
    _terms: tuple | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def m(self) -> int:
        return self.spec.m

    def terms(self):
        """(xs, zs, coeffs) arrays of the 4^m Pauli words in omega_scaled."""
        if self._terms is None:
            self._terms = _compute_terms(self.spec)
        return self._terms

    def term_dict(self) -> dict[tuple[int, int], int]:
        xs, zs, coeffs = self.terms()
        return {(int(x), int(z)): int(c) for x, z, c in zip(xs, zs, coeffs)}

    @property
    def omega_scaled(self) -> np.ndarray:
        """Dense integer matrix 2^m * omega on 2^k dimensions."""
        k = self.k
        dim = 1 << k
        xs, zs, coeffs = self.terms()
        pop = _popcount_table(k)
        cols = np.arange(dim, dtype=np.int64)
        out = np.zeros((dim, dim), dtype=np.int64)
        for x, z, c in zip(xs, zs, coeffs):
            vals = int(c) * (1 - 2 * (pop[z & cols] & 1))
            out[cols ^ x, cols] += vals
        return out

    def omega(self) -> np.ndarray:
        """Normalized factor omega = omega_scaled / 2^m as float64."""
        return self.omega_scaled.astype(np.float64) / (1 << self.m)


def build_factor(spec: MonomialSpec) -> Monomial:
    """Construct one monomial from its (V, M) specification."""
    spec.validate()
    xs, zs, coeffs = _compute_terms(spec)
    mono = Monomial(spec=spec, key=_term_key(spec.k, xs, zs, coeffs))
    if spec.k < _DIGEST_ONLY_K:
        mono._terms = (xs, zs, coeffs)
    return mono


class MonomialBasis:
    """Ordered, deduplicated monomial set for one k.

    Ordering: the k! permutation monomials first, lexicographic in the
    permutation word, then the rest by (m, V, M).
    """

    def __init__(self, k: int, monomials: list[Monomial]):
        self.k = k
        self.monomials = monomials
        self.permutation_indices: list[int] = []
        self.perm_words: list[tuple[int, ...]] = []
        self._key_index = {mono.key: i for i, mono in enumerate(monomials)}
        self._coeff_matrix: np.ndarray | None = None
        self._gram_core: np.ndarray | None = None
        for i, mono in enumerate(monomials):
            mono.index = i

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __getitem__(self, i: int) -> Monomial:
        return self.monomials[i]

    def index_of_key(self, key: bytes) -> int | None:
        return self._key_index.get(key)

    def coefficient_matrix(self) -> np.ndarray:
        """(|P|, 4^k) float64 matrix of X^X Z^Z coefficients of omega_scaled.

        Row a has entry c at position (X << k) | Z for each term; all other
        entries vanish.  Exact in float64 (coefficients are +-1).
        """
        if self._coeff_matrix is None:
            if self.k >= _DIGEST_ONLY_K:
                raise ResourceLimitError(
                    f"coefficient matrix at k={self.k} does not fit in memory"
                )
            A = np.zeros((len(self), 1 << (2 * self.k)), dtype=np.float64)
            for i, mono in enumerate(self.monomials):
                xs, zs, coeffs = mono.terms()
                A[i, (xs << self.k) | zs] = coeffs
            self._coeff_matrix = A
        return self._coeff_matrix

    def gram_core(self) -> np.ndarray:
        """Integer matrix N with N_ab = sum of coefficient products on shared words.

        tr(omega_a^dag omega_b) = N_ab * 2^(k - m_a - m_b): Pauli words are
        orthogonal with tr(W^dag W) = 2^k and the dagger of a real combination
        is its transpose, which leaves word coefficients unchanged.
        """
        if self._gram_core is None:
            A = self.coefficient_matrix()
            N = A @ A.T  # exact: +-1 entries, partial sums < 2^53
            self._gram_core = np.rint(N).astype(np.int64)
        return self._gram_core

    def m_values(self) -> np.ndarray:
        return np.array([mono.m for mono in self.monomials], dtype=np.int64)

    def to_json_dict(self) -> dict:
        monos = []
        for mono in self.monomials:
            k, m = self.k, mono.m
            entry = {
                "m": m,
                "V_rows": [
                    "".join(str((mono.spec.V[j] >> i) & 1) for j in range(m))
                    for i in range(k)
                ],
                "M_rows": [
                    "".join(str((mono.spec.M[i] >> j) & 1) for j in range(m))
                    for i in range(m)
                ],
                "is_permutation": mono.is_permutation,
            }
            if mono.perm is not None:
                entry["perm"] = list(mono.perm)
            monos.append(entry)
        return {
            "k": self.k,
            "count": len(self),
            "permutation_count": len(self.permutation_indices),
            "monomials": monos,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


def _even_subspace_bases(k: int, m: int):
    """One reduced-row-echelon basis per m-dim subspace of Even(F_2^k).

    Even(F_2^k) has dimension k-1 with basis u_i = e_i + e_{i+1}; subspaces
    are enumerated as RREF matrices over the coordinate space F_2^(k-1) and
    mapped back through the u-basis.
    """
    dim = k - 1
    u = [(1 << i) | (1 << (i + 1)) for i in range(dim)]

    def to_even(coord_row: int) -> int:
        out = 0
        for j in range(dim):
            if (coord_row >> j) & 1:
                out ^= u[j]
        return out

    if m == 0:
        yield ()
        return
    for pivots in itertools.combinations(range(dim), m):
        free_pos = [
            (r, c)
            for r in range(m)
            for c in range(pivots[r] + 1, dim)
            if c not in pivots
        ]
        for fill in range(1 << len(free_pos)):
            rows = [1 << pivots[r] for r in range(m)]
            for bit, (r, c) in enumerate(free_pos):
                if (fill >> bit) & 1:
                    rows[r] |= 1 << c
            yield tuple(to_even(row) for row in rows)


def _symmetric_masks(m: int):
    """All symmetric m x m binary matrices with zero diagonal, as row tuples."""
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for bits in range(1 << len(pairs)):
        rows = [0] * m
        for idx, (i, j) in enumerate(pairs):
            if (bits >> idx) & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        yield tuple(rows)


def enumerate_monomials(k: int, k_max: int = K_MAX_DEFAULT) -> MonomialBasis:
    """All reduced Pauli monomial factors for k replicas, canonically ordered."""
    if k < 2:
        raise UsageError(f"need k >= 2, got {k}")
    if k > min(k_max, K_MAX_ENUMERATE):
        raise ResourceLimitError(
            f"k={k} exceeds the limit {min(k_max, K_MAX_ENUMERATE)}"
            " (raise k_max to override; hard cap 7)"
        )
    expected = monomial_count(k)
    seen: dict[bytes, Monomial] = {}
    built = 0
    for m in range(k):
        for V in _even_subspace_bases(k, m):
            for M in _symmetric_masks(m):
                spec = MonomialSpec(k=k, V=V, M=M)
                xs, zs, coeffs = _compute_terms(spec)
                key = _term_key(k, xs, zs, coeffs)
                built += 1
                if key in seen:
                    raise ConsistencyError(
                        f"duplicate monomial from specs {seen[key].spec} and {spec}"
                    )
                mono = Monomial(spec=spec, key=key)
                if k < _DIGEST_ONLY_K:
                    mono._terms = (xs, zs, coeffs)
                seen[key] = mono
    if built != expected or len(seen) != expected:
        raise ConsistencyError(
            f"k={k}: built {built}, kept {len(seen)}, formula says {expected}"
        )
    basis = MonomialBasis(k, list(seen.values()))
    identify_permutations(basis)
    ordered = sorted(
        basis.monomials,
        key=lambda mono: (
            (0, mono.perm) if mono.is_permutation else (1, (mono.m, mono.spec.V, mono.spec.M))
        ),
    )
    basis = MonomialBasis(k, ordered)
    return identify_permutations(basis)


def _permutation_terms(k: int, pi: tuple[int, ...]):
    """Expand T_pi in the X^X Z^Z basis; returns (m, sorted term arrays).

    T_pi[a, b] = delta_{a, permute(b)} with permute moving bit i to bit pi(i).
    Bucket b by X = permute(b) xor b; each nonempty bucket is a coset of the
    fixed subspace W (spanned by the cycle masks), and the Z-coefficients are
    supported on the annihilator of W:
        coefficient(X, Z) = 2^{-m} (-1)^(Z . b0),  b0 any bucket member.
    """
    dim = 1 << k
    cycles = []
    unseen = set(range(k))
    while unseen:
        i = unseen.pop()
        cyc, j = 1 << i, pi[i]
        while j != i:
            unseen.remove(j)
            cyc |= 1 << j
            j = pi[j]
        cycles.append(cyc)
    m = k - len(cycles)

    def permute(b: int) -> int:
        out = 0
        for i in range(k):
            if (b >> i) & 1:
                out |= 1 << pi[i]
        return out

    bucket_rep: dict[int, int] = {}
    for b in range(dim):
        x = permute(b) ^ b
        if x not in bucket_rep:
            bucket_rep[x] = b
    annihilator = [
        z for z in range(dim) if all((z & cyc).bit_count() % 2 == 0 for cyc in cycles)
    ]
    assert len(bucket_rep) == 1 << m and len(annihilator) == 1 << m
    xs, zs, coeffs = [], [], []
    for x, b0 in bucket_rep.items():
        for z in annihilator:
            xs.append(x)
            zs.append(z)
            coeffs.append(1 - 2 * ((z & b0).bit_count() & 1))
    xs = np.array(xs, dtype=np.int64)
    zs = np.array(zs, dtype=np.int64)
    coeffs = np.array(coeffs, dtype=np.int8)
    order = np.lexsort((zs, xs))
    return m, (xs[order], zs[order], coeffs[order])


def identify_permutations(basis: MonomialBasis) -> MonomialBasis:
    """Mark the monomials that are replica-permutation operators.

    Expands every T_pi independently and requires an exact match in the
    basis; the count must come out to exactly k!.
    """
    k = basis.k
    matched: dict[int, tuple[int, ...]] = {}
    for pi in itertools.permutations(range(k)):
        m, (xs, zs, coeffs) = _permutation_terms(k, pi)
        idx = basis.index_of_key(_term_key(k, xs, zs, coeffs))
        if idx is None:
            raise ConsistencyError(f"permutation {pi} missing from the basis")
        if basis[idx].m != m:
            raise ConsistencyError(
                f"permutation {pi}: m mismatch {basis[idx].m} != {m}"
            )
        if idx in matched:
            raise ConsistencyError(
                f"permutations {matched[idx]} and {pi} matched the same monomial"
            )
        matched[idx] = pi
    import math

    if len(matched) != math.factorial(k):
        raise ConsistencyError(
            f"found {len(matched)} permutations, expected {math.factorial(k)}"
        )
    for mono in basis.monomials:
        mono.is_permutation = False
        mono.perm = None
    for idx, pi in matched.items():
        basis[idx].is_permutation = True
        basis[idx].perm = pi
    order = sorted(matched, key=lambda idx: basis[idx].perm)
    basis.permutation_indices = order
    basis.perm_words = [basis[idx].perm for idx in order]
    return basis


def factor_inner(a: Monomial, b: Monomial) -> Fraction:
    """Exact tr(omega_a^dag omega_b); a positive dyadic rational."""
    if a.k != b.k:
        raise DimensionError(f"replica counts differ: {a.k} vs {b.k}")
    ta, tb = a.term_dict(), b.term_dict()
    if len(tb) < len(ta):
        ta, tb = tb, ta
    core = sum(c * tb.get(word, 0) for word, c in ta.items())
    return Fraction(core * (1 << a.k), 1 << (a.m + b.m))


def permutation_dense(k: int, pi: tuple[int, ...]) -> np.ndarray:
    """Dense representation matrix of a replica permutation on (C^2)^k."""
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=np.int64)
    for b in range(dim):
        a = 0
        for i in range(k):
            if (b >> i) & 1:
                a |= 1 << pi[i]
        out[a, b] = 1
    return out
