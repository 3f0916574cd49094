"""Analytic observables and convergence-bound evaluators.

Everything here reduces to functions of Delta = W^-1 T - L on the monomial
basis.  The two report builders expose the quantities experiments care
about:

  frame_potential   F_t = k! + tr(Delta^(2t)); with Delta^0 = I - L this
                    gives F_0 = |P|, the commutant dimension.
  state_report      purity of the averaged t-doped k-copy state,
                    purity_haar + (sum of all Delta^(2t) entries) / Z_n,
                    its relative frame potential, and the trace-distance
                    bound sqrt(relative_fp).

The bound evaluators (min doping for relative designs, the large-k variant,
the expander sandwich, the infinity-norm and diagonal-excess lower bounds)
evaluate closed forms with their regime preconditions enforced; they do not
certify channel inequalities.

All logarithms in thresholds and brackets are base 2; reports record that.
Numeric mode is chosen automatically (exact rationals for the diagonal
ensemble on small bases, float64 when 2^(nk) is representable, mpmath
otherwise) and can be forced with the mode argument.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .doping import (
    DopingEnsemble,
    MomentMatrices,
    ball_volume,
    build_delta,
    build_T,
    doped_weingarten,
    matrix_power,
)
from .errors import ConsistencyError, RegimeError, UsageError
from .linalg import RATIONAL
from .monomials import MonomialBasis, enumerate_monomials
from .weingarten import (
    GramData,
    build_L,
    gram,
    invert_gram,
    unitary_weingarten,
    z_normalization,
)

LOG_BASE = 2
FLOAT_EXP_LIMIT = 900


@lru_cache(maxsize=8)
def _basis(k: int) -> MonomialBasis:
    return enumerate_monomials(k)


def _auto_mode(n: int, k: int, ensemble: DopingEnsemble) -> str:
    if ensemble.kind == "diagonal" and k <= 4:
        return "exact"
    if n * k <= FLOAT_EXP_LIMIT:
        return "float"
    return "mp"


_pipelines: dict = {}


def _ensemble_key(ensemble: DopingEnsemble):
    if ensemble.kind == "discrete":
        return ("discrete", ensemble.gate.tobytes())
    return (ensemble.kind,)


def pipeline(n: int, k: int, ensemble: DopingEnsemble,
             mode: str | None = None,
             digits: int = 50) -> tuple[GramData, MomentMatrices]:
    """Inverted Gram plus filled MomentMatrices, cached per parameter set."""
    if mode is None:
        mode = _auto_mode(n, k, ensemble)
    key = (n, k, _ensemble_key(ensemble), mode, digits)
    hit = _pipelines.get(key)
    if hit is not None:
        return hit
    basis = _basis(k)
    g = invert_gram(gram(n, basis, mode=mode, digits=digits))
    ell = build_L(g, unitary_weingarten(k, n))
    mm = build_delta(build_T(g, basis, ensemble), ell, g.W_inv)
    _pipelines[key] = (g, mm)
    return g, mm


def _trace(mat: np.ndarray, mode: str):
    if mode == "float":
        return float(np.trace(mat))
    return sum(mat[i, i] for i in range(mat.shape[0]))


def _entry_sum(mat: np.ndarray, mode: str):
    if mode == "float":
        return float(np.sum(mat))
    total = mat.ravel()[0] * 0
    for v in mat.ravel():
        total = total + v
    return total


def _delta_even_power(mm: MomentMatrices, t: int) -> np.ndarray:
    """Delta^(2t), with the t = 0 convention Delta^0 = I - L."""
    if t == 0:
        size = mm.Delta.shape[0]
        if mm.mode == "float":
            return np.eye(size) - mm.L
        if mm.mode == "mp":
            with mpmath.workdps(mm.digits):
                eye = np.full((size, size), mpmath.mpf(0), dtype=object)
                for i in range(size):
                    eye[i, i] = mpmath.mpf(1)
                return eye - mm.L
        eye = np.full((size, size), RATIONAL(0), dtype=object)
        for i in range(size):
            eye[i, i] = RATIONAL(1)
        return eye - mm.L
    return matrix_power(mm.Delta, 2 * t, mm.mode, mm.digits)


def f_threshold(k: int, t: int) -> float:
    """Replica-count threshold (7/4)k^2 - 6k + 19 + 3t + log2 t + t log2 k."""
    if t < 1:
        raise UsageError("the threshold needs t >= 1")
    return (1.75 * k * k - 6 * k + 19 + 3 * t + math.log2(t)
            + t * math.log2(k))


def excess_bracket(k: int, t: int) -> tuple[float, float]:
    """Frame-potential excess bracket, exponents in base 2."""
    lower = 2.0 ** (k * k / 4 - 6 * t - t * math.log2(k) - 1)
    upper = 2.0 ** (k * k / 2 - 2 * t * math.log2(16 / 15) + 1)
    return lower, upper


@dataclass(frozen=True)
class FramePotentialReport:
    n: int
    k: int
    t: int
    ensemble: str
    f_haar: int
    f_t: object
    excess: object
    thm_lower: float | None
    thm_upper: float | None
    regime_n: int | None
    in_bracket: bool | None
    log_base: int = LOG_BASE

    CSV_COLUMNS = ("n", "k", "t", "ensemble", "f_haar", "f_t", "excess",
                   "thm_lower", "thm_upper", "regime_n", "in_bracket",
                   "log_base")

    def csv_row(self) -> list[str]:
        def fmt(v):
            return "" if v is None else str(v if not isinstance(v, bool)
                                            else int(v))
        return [fmt(self.n), fmt(self.k), fmt(self.t), self.ensemble,
                fmt(self.f_haar), repr(float(self.f_t)),
                repr(float(self.excess)), fmt(self.thm_lower),
                fmt(self.thm_upper), fmt(self.regime_n), fmt(self.in_bracket),
                fmt(self.log_base)]

    def to_json_dict(self) -> dict:
        out = {
            "n": self.n, "k": self.k, "t": self.t, "ensemble": self.ensemble,
            "f_haar": self.f_haar, "f_t": float(self.f_t),
            "excess": float(self.excess), "thm_lower": self.thm_lower,
            "thm_upper": self.thm_upper, "regime_n": self.regime_n,
            "in_bracket": self.in_bracket, "log_base": self.log_base,
        }
        if not isinstance(self.excess, float):
            out["excess_exact"] = str(self.excess)
        return out


def frame_potential(n: int, k: int, t: int, ensemble: DopingEnsemble,
                    mode: str | None = None,
                    digits: int = 50) -> FramePotentialReport:
    """F_t = k! + tr(Delta^(2t)) with the two-sided excess bracket when admissible.

    The bracket fields are filled for t >= 1; in_bracket is set only when
    n reaches the threshold ceil(f_threshold(k, t)) and is None below it.
    """
    if t < 0:
        raise UsageError(f"t must be >= 0, got {t}")
    if n < k - 1:
        raise RegimeError(
            f"need n >= k - 1 = {k - 1} for an invertible Gram, got n = {n}"
        )
    _, mm = pipeline(n, k, ensemble, mode, digits)
    excess = _trace(_delta_even_power(mm, t), mm.mode)
    f_haar = math.factorial(k)
    tol = 1e-9 if mm.mode != "exact" else 0
    if excess < -tol * f_haar:
        raise ConsistencyError(f"negative frame-potential excess {excess}")
    thm_lower = thm_upper = regime_n = in_bracket = None
    if t >= 1:
        thm_lower, thm_upper = excess_bracket(k, t)
        regime_n = math.ceil(f_threshold(k, t))
        if n >= regime_n:
            in_bracket = bool(thm_lower <= excess <= thm_upper)
    return FramePotentialReport(
        n=n, k=k, t=t, ensemble=ensemble.label, f_haar=f_haar,
        f_t=f_haar + excess, excess=excess, thm_lower=thm_lower,
        thm_upper=thm_upper, regime_n=regime_n, in_bracket=in_bracket,
    )


@dataclass(frozen=True)
class StateDesignReport:
    n: int
    k: int
    t: int
    ensemble: str
    z_n: int
    purity_haar: object
    purity_t: object
    relative_fp: object
    trace_distance_bound: float

    CSV_COLUMNS = ("n", "k", "t", "ensemble", "z_n", "purity_haar",
                   "purity_t", "relative_fp", "trace_distance_bound")

    def csv_row(self) -> list[str]:
        return [str(self.n), str(self.k), str(self.t), self.ensemble,
                str(self.z_n), repr(float(self.purity_haar)),
                repr(float(self.purity_t)), repr(float(self.relative_fp)),
                repr(self.trace_distance_bound)]

    def to_json_dict(self) -> dict:
        out = {
            "n": self.n, "k": self.k, "t": self.t, "ensemble": self.ensemble,
            "z_n": self.z_n, "purity_haar": float(self.purity_haar),
            "purity_t": float(self.purity_t),
            "relative_fp": float(self.relative_fp),
            "trace_distance_bound": self.trace_distance_bound,
        }
        if not isinstance(self.purity_t, float):
            out["purity_t_exact"] = str(self.purity_t)
        return out


def state_report(n: int, k: int, t: int, ensemble: DopingEnsemble,
                 mode: str | None = None,
                 digits: int = 50) -> StateDesignReport:
    """Purity and design-distance bounds of the averaged t-doped state.

    purity_t = purity_haar + (sum of all entries of Delta^(2t)) / Z_n;
    relative_fp = (purity_t - purity_haar) / purity_haar; the trace-distance
    bound is its square root.  At t = 0 the purity equals |P| / Z_n exactly.
    """
    if t < 0:
        raise UsageError(f"t must be >= 0, got {t}")
    if n < k - 1:
        raise RegimeError(
            f"need n >= k - 1 = {k - 1} for an invertible Gram, got n = {n}"
        )
    _, mm = pipeline(n, k, ensemble, mode, digits)
    d = 1 << n
    zn = z_normalization(k, n)
    sym_dim = math.comb(d + k - 1, k)
    total = _entry_sum(_delta_even_power(mm, t), mm.mode)
    if mm.mode == "float":
        tol = 1e-9
        purity_haar = 1.0 / sym_dim
        purity_t = purity_haar + total / zn
        relative_fp = total * sym_dim / zn
    elif mm.mode == "exact":
        tol = 0
        purity_haar = RATIONAL(1, sym_dim)
        purity_t = purity_haar + total / zn
        relative_fp = total * sym_dim / zn
    else:
        tol = 1e-9
        with mpmath.workdps(mm.digits):
            purity_haar = mpmath.mpf(1) / sym_dim
            purity_t = purity_haar + total / zn
            relative_fp = total * sym_dim / zn
    if relative_fp < -tol:
        raise ConsistencyError(
            f"averaged-state purity fell below the Haar floor: {relative_fp}"
        )
    bound = float(mpmath.sqrt(mpmath.mpf(float(relative_fp)))) \
        if relative_fp >= 0 else 0.0
    return StateDesignReport(
        n=n, k=k, t=t, ensemble=ensemble.label, z_n=zn,
        purity_haar=purity_haar, purity_t=purity_t, relative_fp=relative_fp,
        trace_distance_bound=bound,
    )


# ------------------------------------------------------- dense average state


def _kron_power(factor: np.ndarray, n: int) -> np.ndarray:
    out = np.array([[1.0]])
    for _ in range(n):
        out = np.kron(out, factor)
    return out


def average_state_coefficients(n: int, k: int, t: int,
                               ensemble: DopingEnsemble,
                               mode: str | None = None,
                               digits: int = 50) -> np.ndarray:
    """Monomial coefficients of the averaged t-doped k-copy state.

    The state is sum_Omega c_Omega Omega with c the row sums of
    (W^-1 T)^t W^-1, assembled from the embedded unitary-Weingarten block
    plus the doped correction Delta^t W^-1.  Returned as float64.
    """
    g, mm = pipeline(n, k, ensemble, mode, digits)
    basis = _basis(k)
    dw = doped_weingarten(mm, g.W_inv, t)
    uw = unitary_weingarten(k, n)
    coeff = np.zeros(len(basis))
    for i in range(len(basis)):
        coeff[i] = float(sum(dw[i, :].tolist()))
    for a, p in enumerate(basis.permutation_indices):
        coeff[p] += float(sum(uw.Lambda_inv[a, :].tolist()))
    return coeff


def dense_average_states(n: int, k: int, t: int, ensemble: DopingEnsemble,
                         mode: str | None = None,
                         digits: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Dense (2^(nk), 2^(nk)) averaged t-doped state and its Haar target.

    The Haar target is the normalized symmetric-subspace projector.  Both
    are assembled qubit-major (kron powers of one-qubit-factor blocks),
    which is the monomial factorization order.
    """
    if n * k > 14:
        raise UsageError(
            f"dense states need 4^(nk) memory; nk = {n * k} is too large"
        )
    basis = _basis(k)
    coeff = average_state_coefficients(n, k, t, ensemble, mode, digits)
    dim = 1 << (n * k)
    psi_t = np.zeros((dim, dim))
    for i, mon in enumerate(basis.monomials):
        psi_t += coeff[i] * _kron_power(mon.omega(), n)
    sym_dim = math.comb((1 << n) + k - 1, k)
    psi_haar = np.zeros((dim, dim))
    for p in basis.permutation_indices:
        psi_haar += _kron_power(basis.monomials[p].omega(), n)
    psi_haar /= math.factorial(k) * sym_dim
    return psi_t, psi_haar


def dense_trace_distance(n: int, k: int, t: int, ensemble: DopingEnsemble,
                         mode: str | None = None, digits: int = 50) -> float:
    """Trace norm of (averaged t-doped state) - (Haar k-copy state)."""
    psi_t, psi_haar = dense_average_states(n, k, t, ensemble, mode, digits)
    return float(np.sum(np.abs(np.linalg.eigvalsh(psi_t - psi_haar))))


@lru_cache(maxsize=8)
def _replica_major_map(n: int, k: int) -> np.ndarray:
    """Send each replica-major index to its qubit-major counterpart.

    Qubit-major layout (kron powers of one-qubit factors) keeps the bit for
    (qubit q, replica r) at position q*k + r; replica-major layout (kron
    powers U^(x k) of n-qubit operators) keeps it at r*n + q.
    """
    arr = np.arange(1 << (n * k))
    out = np.zeros_like(arr)
    for q in range(n):
        for r in range(k):
            out |= ((arr >> (r * n + q)) & 1) << (q * k + r)
    return out


def monomial_global_dense(n: int, k: int, index: int,
                          replica_major: bool = True) -> np.ndarray:
    """Dense n-qubit global monomial, replica-major unless told otherwise."""
    if n * k > 12:
        raise UsageError(
            f"dense global monomials are capped at nk = 12, got {n * k}"
        )
    basis = _basis(k)
    mat = _kron_power(basis.monomials[index].omega(), n)
    if replica_major:
        f = _replica_major_map(n, k)
        mat = mat[np.ix_(f, f)]
    return mat


def analytic_twirl(n: int, k: int, t: int, ensemble: DopingEnsemble,
                   observable: np.ndarray, mode: str | None = None,
                   digits: int = 50) -> np.ndarray:
    """Exact k-fold twirl of the t-doped ensemble, applied to an observable.

    Returns sum_Omega c_Omega Omega_global with coefficients c = M v, where
    M is the embedded inverse permutation Gram plus Delta^t W^-1 and
    v_Omega = tr(Omega_global^dag O).  The group average at t = 0 is the
    orthogonal projection onto the monomial span, so monomials are fixed
    points; basis matrices are replica-major so the result compares
    entrywise with empirical means of U^(x k) O U^(x k)^dag.
    """
    if n * k > 12:
        raise UsageError(
            f"dense twirls need 4^(nk) memory; nk = {n * k} is too large"
        )
    dim = 1 << (n * k)
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != (dim, dim):
        raise UsageError(
            f"observable must be {dim} x {dim} for n={n}, k={k}, "
            f"got {obs.shape}"
        )
    g, mm = pipeline(n, k, ensemble, mode, digits)
    basis = _basis(k)
    dw = doped_weingarten(mm, g.W_inv, t)
    uw = unitary_weingarten(k, n)
    nb = len(basis)
    coeff_map = np.zeros((nb, nb))
    for i in range(nb):
        for j in range(nb):
            coeff_map[i, j] = float(dw[i, j])
    for a, pa in enumerate(basis.permutation_indices):
        for b, pb in enumerate(basis.permutation_indices):
            coeff_map[pa, pb] += float(uw.Lambda_inv[a, b])
    overlaps = np.empty(nb, dtype=complex)
    for j in range(nb):
        om = monomial_global_dense(n, k, j)
        overlaps[j] = np.trace(om.conj().T @ obs)
    coeffs = coeff_map @ overlaps
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(nb):
        out += coeffs[i] * monomial_global_dense(n, k, i)
    return out


def _sym_irreps(k: int, d: int) -> list[tuple[int, dict]]:
    """(Weyl-module dimension, permutation -> irrep matrix) pairs, k <= 3.

    Schur-Weyl splits (C^d)^(tensor k) into isotypic blocks on which T_pi
    acts as identity x irrep(pi), so the trace norm of any permutation-span
    operator is the Weyl-dimension-weighted sum of tiny-matrix trace norms.
    """
    perms = list(itertools.permutations(range(k)))
    triv = {p: np.array([[1.0]]) for p in perms}
    if k == 1:
        return [(d, triv)]
    sign = {}
    for p in perms:
        s = 1.0
        for i in range(k):
            for j in range(i + 1, k):
                if p[i] > p[j]:
                    s = -s
        sign[p] = np.array([[s]])
    if k == 2:
        return [(math.comb(d + 1, 2), triv), (math.comb(d, 2), sign)]
    if k == 3:
        basis = np.array([[1 / math.sqrt(2), 1 / math.sqrt(6)],
                          [-1 / math.sqrt(2), 1 / math.sqrt(6)],
                          [0.0, -2 / math.sqrt(6)]])
        std = {}
        for p in perms:
            mat = np.zeros((3, 3))
            for i in range(3):
                mat[p[i], i] = 1.0
            std[p] = basis.T @ mat @ basis
        return [(math.comb(d + 2, 3), triv),
                (d * (d * d - 1) // 3, std),
                (math.comb(d, 3), sign)]
    raise UsageError(f"permutation-span trace norms are built for k <= 3, "
                     f"got k = {k}")


def perm_span_trace_norm(n: int, k: int, coeffs) -> float:
    """Trace norm of sum_pi coeffs[pi] T_pi on k copies of n qubits.

    coeffs is a sequence indexed like itertools.permutations(range(k)).
    Exact in the block structure (no 2^(nk) objects), float in the
    per-block singular values; works for any n but only k <= 3.
    """
    d = 1 << n
    perms = list(itertools.permutations(range(k)))
    if len(coeffs) != len(perms):
        raise UsageError(
            f"expected {len(perms)} coefficients for k = {k}, "
            f"got {len(coeffs)}"
        )
    blocks = _sym_irreps(k, d)
    if sum(w * next(iter(rep.values())).shape[0]
           for w, rep in blocks) != d**k:
        raise ConsistencyError("isotypic dimensions do not fill d^k")
    total = 0.0
    for weyl, rep in blocks:
        acc = np.zeros_like(next(iter(rep.values())))
        for c, p in zip(coeffs, perms):
            acc = acc + float(c) * rep[p]
        total += weyl * float(np.sum(np.linalg.svd(acc, compute_uv=False)))
    return total


def state_design_trace_distance(n: int, k: int, t: int,
                                ensemble: DopingEnsemble,
                                mode: str | None = None,
                                digits: int = 50) -> float:
    """Trace distance of the averaged t-doped state from its Haar target.

    For k <= 3 every monomial is a permutation, so the difference lives in
    the permutation span and the norm follows from the isotypic block
    structure at any n, with no 2^(nk)-sized object.
    """
    basis = _basis(k)
    if len(basis) != math.factorial(k):
        raise UsageError(
            f"the permutation-span route needs an all-permutation basis "
            f"(k <= 3), got k = {k}"
        )
    coeff = average_state_coefficients(n, k, t, ensemble, mode, digits)
    h = 1.0 / (math.factorial(k) * math.comb((1 << n) + k - 1, k))
    ordered = np.empty(len(basis))
    for a, p in enumerate(basis.permutation_indices):
        ordered[a] = coeff[p] - h
    return perm_span_trace_norm(n, k, ordered)


# --------------------------------------------------------- bound evaluators


def min_doping_relative_design(n: int, k: int, delta: float,
                               ensemble: DopingEnsemble) -> float:
    """Per-ensemble dose-count floors for a delta-relative design.

    discrete: nk delta / 18;
    haar1q:   nk delta / (6 log2(nk delta) (17 + 6 log2 k));
    diagonal: nk delta / (6 log2(nk delta) (2 + log2 k)).
    Requires n >= 2 k / delta.
    """
    if not 0 < delta <= 1:
        raise UsageError(f"need 0 < delta <= 1, got {delta}")
    if n < 2 * k / delta:
        raise RegimeError(
            f"need n >= 2 k / delta = {2 * k / delta:g}, got n = {n}"
        )
    nkd = n * k * delta
    if ensemble.kind == "discrete":
        return nkd / 18
    if ensemble.kind == "haar1q":
        return nkd / (6 * math.log2(nkd) * (17 + 6 * math.log2(k)))
    return nkd / (6 * math.log2(nkd) * (2 + math.log2(k)))


def min_doping_large_k(n: int, k: int, delta: float) -> float:
    """Dose lower bound k delta / 8 in the many-copy regime.

    Valid for 8 n / delta <= k <= 2^(n delta / 2) (the discrete pi/8-gate
    construction); raises outside it.
    """
    if not 0 < delta <= 1:
        raise UsageError(f"need 0 < delta <= 1, got {delta}")
    if k < 8 * n / delta or k > 2.0 ** (n * delta / 2):
        raise RegimeError(
            f"need 8 n / delta <= k <= 2^(n delta / 2); got k = {k} with "
            f"edges [{8 * n / delta:g}, {2.0 ** (n * delta / 2):g}]"
        )
    return k * delta / 8


def expander_sandwich(norm_diff: float, n: int, k: int
                      ) -> tuple[float, float]:
    """Spectral-gap bracket (2^(-nk/2 - 1) x, 2^(2kn) x)."""
    if norm_diff < 0:
        raise UsageError(f"need a nonnegative norm, got {norm_diff}")
    return (2.0 ** (-n * k / 2 - 1) * norm_diff,
            2.0 ** (2 * k * n) * norm_diff)


def infinity_norm_lower_bound(n: int, k: int, t: int,
                              ensemble: DopingEnsemble) -> float:
    """Largest-eigenvalue floor B^t d^(k/2) / (2 Z_n) of the doped state.

    The supporting projective monomial has m = k/2 when k is a multiple of
    8 and m = k/2 - 1 for other even k; odd k is not covered.
    """
    if k % 2:
        raise RegimeError(f"the bound needs even k, got {k}")
    if t < 0:
        raise UsageError(f"t must be >= 0, got {t}")
    ball = 1 if t == 0 else ball_volume(ensemble, k, t)
    base = RATIONAL(1 << (n * k // 2), 2 * z_normalization(k, n))
    if isinstance(ball, float):
        return ball**t * float(base)
    return float(ball**t * base)


def projective_monomial_m(k: int) -> int:
    """m of the projective monomial supporting infinity_norm_lower_bound."""
    if k % 2:
        raise RegimeError(f"the construction needs even k, got {k}")
    return k // 2 if k % 8 == 0 else k // 2 - 1


def diagonal_excess_lower_bound(k: int, t: int) -> float:
    """Floor (2 sqrt(pi) / (3 e^2 sqrt(k)))^t on the diagonal excess.

    Stated for k >= 9 and n >= diagonal_excess_regime(k); this evaluator
    returns the closed form for any k >= 1 so smaller-k surrogates can be
    compared against it.
    """
    if k < 1 or t < 0:
        raise UsageError(f"need k >= 1 and t >= 0, got k={k}, t={t}")
    return (2 * math.sqrt(math.pi) / (3 * math.e**2 * math.sqrt(k))) ** t


def diagonal_excess_regime(k: int) -> int:
    """Smallest n in the stated hypothesis of the diagonal excess floor."""
    return math.ceil(1.5 * (k * k - 3 * k + 18))


def convergence_profile(n: int, k: int, ensemble: DopingEnsemble,
                        t_max: int, mode: str | None = None,
                        digits: int = 50) -> list[FramePotentialReport]:
    """Frame-potential reports for t = 0..t_max at fixed (n, k, ensemble)."""
    if t_max < 0:
        raise UsageError(f"t_max must be >= 0, got {t_max}")
    return [frame_potential(n, k, t, ensemble, mode, digits)
            for t in range(t_max + 1)]


def envelope_crossing_time(factor: float = 1e-3,
                           rate: float = 15 / 16) -> int:
    """Smallest t with rate^(2t) < factor, the worst-case decay envelope."""
    if not 0 < factor < 1 or not 0 < rate < 1:
        raise UsageError("factor and rate must lie strictly in (0, 1)")
    return math.ceil(math.log(factor) / (2 * math.log(rate)))
