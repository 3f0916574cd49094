import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcw.errors import ConsistencyError, ResourceLimitError, SpecError, UsageError
from dcw.monomials import (
    Monomial,
    MonomialBasis,
    MonomialSpec,
    build_factor,
    enumerate_monomials,
    factor_inner,
    identify_permutations,
    monomial_count,
    permutation_dense,
)
from dcw.pauli import PauliString, chi

LETTER_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def omega_scaled_oracle(spec: MonomialSpec) -> np.ndarray:
    """Independent dense evaluation of the defining sum over {I,X,Y,Z}^m.

    Each P^{(v)} is the PauliString with that letter on the support of v
    (phase 0, the Hermitian representative), multiplied out as matrices.
    """
    k, m = spec.k, spec.m
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=complex)
    for letters in itertools.product("IXYZ", repeat=m):
        singles = [PauliString(1, *LETTER_XZ[L]) for L in letters]
        sign = 1
        for i in range(m):
            for j in range(i + 1, m):
                if (spec.M[i] >> j) & 1:
                    sign *= chi(singles[i], singles[j])
        mat = np.eye(dim, dtype=complex)
        for i, letter in enumerate(letters):
            xl, zl = LETTER_XZ[letter]
            v = spec.V[i]
            factor = PauliString(k, xl * v, zl * v, 0).dense(max_qubits=k)
            mat = mat @ factor
        out += sign * mat
    assert np.max(np.abs(out.imag)) == 0.0
    return out.real


def valid_specs(k):
    even = [v for v in range(1, 1 << k) if v.bit_count() % 2 == 0]
    for m in range(k):
        for V in itertools.product(even, repeat=m):
            if _rank(V) != m:
                continue
            pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
            for bits in range(1 << len(pairs)):
                rows = [0] * m
                for idx, (i, j) in enumerate(pairs):
                    if (bits >> idx) & 1:
                        rows[i] |= 1 << j
                        rows[j] |= 1 << i
                yield MonomialSpec(k=k, V=tuple(V), M=tuple(rows))


def _rank(cols):
    rows, rank = list(cols), 0
    while rows:
        rows = [r for r in rows if r]
        if not rows:
            break
        pivot = rows.pop()
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


# ------------------------------------------------------------- counting


def test_monomial_count_formula():
    assert [monomial_count(k) for k in range(2, 8)] == [2, 6, 30, 270, 4590, 151470]


def test_enumeration_counts():
    for k in (2, 3, 4, 5):
        assert len(enumerate_monomials(k)) == monomial_count(k)


def test_k_limit():
    with pytest.raises(ResourceLimitError):
        enumerate_monomials(7)  # default cap is 6
    with pytest.raises(ResourceLimitError):
        enumerate_monomials(8, k_max=8)  # hard cap is 7
    with pytest.raises(UsageError):
        enumerate_monomials(1)


# ------------------------------------------------------------- build_factor


def test_identity_factor():
    mono = build_factor(MonomialSpec(k=2, V=(), M=()))
    assert np.array_equal(mono.omega_scaled, np.eye(4, dtype=np.int64))
    assert mono.m == 0


def test_swap_factor():
    mono = build_factor(MonomialSpec(k=2, V=(0b11,), M=(0,)))
    paulis = [PauliString(1, *LETTER_XZ[L]).dense() for L in "IXYZ"]
    want = sum(np.kron(p, p) for p in paulis)
    assert np.max(np.abs(want.imag)) == 0
    assert np.array_equal(mono.omega_scaled, want.real.astype(np.int64))
    swap = np.zeros((4, 4))
    swap[[0, 1, 2, 3], [0, 2, 1, 3]] = 1
    assert np.array_equal(mono.omega_scaled, (2 * swap).astype(np.int64))


def test_k4_full_support_column():
    mono = build_factor(MonomialSpec(k=4, V=(0b1111,), M=(0,)))
    paulis = [PauliString(1, *LETTER_XZ[L]).dense() for L in "IXYZ"]
    want = sum(np.kron(np.kron(np.kron(p, p), p), p) for p in paulis)
    assert np.array_equal(mono.omega_scaled, want.real.astype(np.int64))
    # trace of the normalized factor is 2^{k-rank(V)} = 8
    assert mono.omega_scaled.trace() / (1 << mono.m) == 8


def test_dense_oracle_k2_k3_all():
    for k in (2, 3):
        for spec in valid_specs(k):
            got = build_factor(spec).omega_scaled
            assert np.array_equal(got, omega_scaled_oracle(spec).astype(np.int64)), spec


def test_dense_oracle_k4_enumerated():
    for mono in enumerate_monomials(4):
        want = omega_scaled_oracle(mono.spec)
        assert np.array_equal(mono.omega_scaled, want.astype(np.int64)), mono.spec


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_dense_oracle_k5_random(data):
    specs = None
    # draw one admissible spec at k=5 by rejection on rank
    even = [v for v in range(1, 32) if v.bit_count() % 2 == 0]
    m = data.draw(st.integers(1, 4))
    V = tuple(
        data.draw(st.sampled_from(even), label=f"v{i}") for i in range(m)
    )
    if _rank(V) != m:
        return
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    rows = [0] * m
    for i, j in pairs:
        if data.draw(st.booleans(), label=f"M{i}{j}"):
            rows[i] |= 1 << j
            rows[j] |= 1 << i
    spec = MonomialSpec(k=5, V=V, M=tuple(rows))
    got = build_factor(spec).omega_scaled
    assert np.array_equal(got, omega_scaled_oracle(spec).astype(np.int64))


def test_spec_validation():
    with pytest.raises(SpecError):
        build_factor(MonomialSpec(k=2, V=(0b01,), M=(0,)))  # odd weight
    with pytest.raises(SpecError):
        build_factor(MonomialSpec(k=3, V=(0b11, 0b11), M=(0, 0)))  # dependent
    with pytest.raises(SpecError):
        build_factor(MonomialSpec(k=3, V=(0b11, 0b110), M=(2, 0)))  # asymmetric
    with pytest.raises(SpecError):
        build_factor(MonomialSpec(k=3, V=(0b11, 0b110), M=(1, 2)))  # diagonal


# ------------------------------------------------------------- dedup walk


def test_canonical_walk_matches_brute_force():
    # every admissible (V, M), deduplicated by exact term equality, gives the
    # same monomial set as the canonical-subspace walk
    for k in (2, 3, 4):
        brute = {}
        for spec in valid_specs(k):
            mono = build_factor(spec)
            brute.setdefault(mono.key, spec)
        canon = {mono.key for mono in enumerate_monomials(k)}
        assert set(brute) == canon


def test_pairwise_distinct_dense_k3():
    basis = enumerate_monomials(3)
    denses = [mono.omega_scaled.tobytes() for mono in basis]
    assert len(set(denses)) == len(basis)


# ------------------------------------------------------------- permutations


def test_identify_permutations_counts():
    for k, expected_total in ((2, 2), (3, 6), (4, 30), (5, 270)):
        basis = identify_permutations(enumerate_monomials(k))
        n_perm = sum(mono.is_permutation for mono in basis)
        assert n_perm == math.factorial(k)
        assert len(basis.permutation_indices) == math.factorial(k)
        assert len(basis) == expected_total


def test_k3_all_permutations():
    basis = enumerate_monomials(3)
    assert all(mono.is_permutation for mono in basis)


def test_permutation_matrices_match_dense():
    for k in (2, 3, 4):
        basis = enumerate_monomials(k)
        for idx in basis.permutation_indices:
            mono = basis[idx]
            want = permutation_dense(k, mono.perm) * (1 << mono.m)
            assert np.array_equal(mono.omega_scaled, want), mono.perm


def test_permutation_m_is_k_minus_cycles():
    basis = enumerate_monomials(4)
    for idx in basis.permutation_indices:
        mono = basis[idx]
        seen, cycles = set(), 0
        for start in range(4):
            if start in seen:
                continue
            cycles += 1
            j = start
            while j not in seen:
                seen.add(j)
                j = mono.perm[j]
        assert mono.m == 4 - cycles


def test_canonical_ordering():
    basis = enumerate_monomials(4)
    words = [basis[i].perm for i in range(24)]
    assert words == sorted(words)
    assert basis[0].perm == (0, 1, 2, 3)
    assert basis.permutation_indices == list(range(24))
    tail = [(mono.m, mono.spec.V, mono.spec.M) for mono in basis.monomials[24:]]
    assert tail == sorted(tail)
    again = enumerate_monomials(4)
    assert [mono.key for mono in again] == [mono.key for mono in basis]


# ------------------------------------------------------------- inner products


def test_factor_inner_self_is_2k():
    for k in (2, 3, 4):
        for mono in enumerate_monomials(k):
            assert factor_inner(mono, mono) == 1 << k


def test_factor_inner_examples():
    basis = enumerate_monomials(2)
    ident = basis[0]
    swap = basis[1]
    assert factor_inner(ident, swap) == 2
    assert factor_inner(swap, ident) == 2


def test_factor_inner_bounds_and_dense_oracle():
    for k in (2, 3):
        basis = enumerate_monomials(k)
        for a in basis:
            da = a.omega_scaled / (1 << a.m)
            for b in basis:
                db = b.omega_scaled / (1 << b.m)
                want = np.trace(da.T @ db)
                got = factor_inner(a, b)
                assert got == Fraction(want).limit_denominator(1 << 12)
                if a is not b:
                    assert 1 <= got <= 1 << (k - 1)


def test_gram_core_matches_factor_inner():
    basis = enumerate_monomials(3)
    N = basis.gram_core()
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            assert Fraction(int(N[i, j]) << basis.k, 1 << (a.m + b.m)) == factor_inner(a, b)


# ------------------------------------------------------------- export


def test_json_export():
    basis = enumerate_monomials(3)
    doc = basis.to_json_dict()
    assert doc["k"] == 3 and doc["count"] == 6 and doc["permutation_count"] == 6
    for entry in doc["monomials"]:
        assert len(entry["V_rows"]) == 3
        assert all(len(row) == entry["m"] for row in entry["V_rows"])
        assert len(entry["M_rows"]) == entry["m"]
    assert "perm" in doc["monomials"][0]
