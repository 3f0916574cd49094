"""Single-qubit doping ensembles and the matrices controlling convergence.

A doped circuit alternates uniform Clifford layers with draws from a fixed
single-qubit measure.  Three measures are supported: `diagonal` (uniform
phase gate diag(1, e^{i theta})), `haar1q` (Haar on U(2)), and `discrete`
(uniform over {U, U-dagger, identity} for a fixed gate U, default the pi/8
phase gate).  What the analytics need from the measure is its k-fold twirl
kappa acting on one qubit's k replicas, a 2^k-dimensional space.

From kappa we build, on a monomial basis of size |P|:
  K      per-qubit factor, K[a, b] = tr(omega_a^dagger kappa(omega_b));
  T      full transfer matrix, entrywise G1^(n-1) * K;
  Delta  W^-1 T - L, the deviation from the permutation projector.

Since kappa fixes every permutation operator, the permutation rows and
columns of K coincide with those of G1 and the permutation columns of Delta
vanish identically (the permutation block in particular).  Exact modes
verify this and float modes enforce it after a tolerance check, so the
decomposition (W^-1 T)^t W^-1 = embedded-Lambda^-1 + Delta^t W^-1 holds
structurally in every representation.  By convention Delta^0 = I - L, which
extends that identity to t = 0.

Exact rational K/T/Delta are available for the diagonal ensemble only (its
kappa is an entrywise integer mask); the other two ensembles involve
algebraic numbers and run in float64 or mpmath.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.integrate import quad

from .errors import (
    ConditioningError,
    ConsistencyError,
    DimensionError,
    ResourceLimitError,
    UsageError,
)
from .linalg import RATIONAL, to_float
from .monomials import MonomialBasis, permutation_dense
from .weingarten import GramData, cycle_count, perm_compose, perm_inverse

KINDS = ("diagonal", "haar1q", "discrete")
KAPPA_K_MAX = 6
TGATE = np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(np.complex128)
_PERM_COLUMN_TOL = 1e-8


@dataclass(frozen=True)
class DopingEnsemble:
    """One of the three single-qubit doping measures."""

    kind: str
    gate: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "discrete":
            g = self.gate if self.gate is not None else TGATE
            g = np.asarray(g, dtype=np.complex128)
            if g.shape != (2, 2):
                raise DimensionError(f"gate must be 2x2, got {g.shape}")
            if np.max(np.abs(g.conj().T @ g - np.eye(2))) > 1e-12:
                raise UsageError("discrete gate is not unitary to 1e-12")
            object.__setattr__(self, "gate", g)
        elif self.gate is not None:
            raise UsageError(f"{self.kind} ensemble takes no gate")

    @classmethod
    def diagonal(cls) -> "DopingEnsemble":
        return cls("diagonal")

    @classmethod
    def haar1q(cls) -> "DopingEnsemble":
        return cls("haar1q")

    @classmethod
    def discrete(cls, gate: np.ndarray | None = None) -> "DopingEnsemble":
        return cls("discrete", gate if gate is not None else TGATE)

    @property
    def label(self) -> str:
        if self.kind != "discrete":
            return "haar" if self.kind == "haar1q" else self.kind
        if np.allclose(self.gate, TGATE, atol=1e-14):
            return "discrete:tgate"
        return "discrete:custom"


def parse_ensemble(text: str) -> DopingEnsemble:
    """CLI ensemble spec: diagonal | haar | discrete[:tgate|:<2x2 literal>]."""
    text = text.strip()
    if text == "diagonal":
        return DopingEnsemble.diagonal()
    if text in ("haar", "haar1q"):
        return DopingEnsemble.haar1q()
    if text in ("discrete", "discrete:tgate"):
        return DopingEnsemble.discrete()
    if text.startswith("discrete:"):
        literal = text[len("discrete:"):]
        try:
            rows = ast.literal_eval(literal)
            gate = np.array(rows, dtype=np.complex128)
        except (ValueError, SyntaxError) as exc:
            raise UsageError(
                f"cannot parse gate literal {literal!r}; expected e.g. "
                "[[1,0],[0,1j]]"
            ) from exc
        return DopingEnsemble.discrete(gate)
    raise UsageError(
        f"unknown ensemble {text!r}; expected diagonal, haar, or "
        "discrete[:tgate|:<matrix>]"
    )


def _k_from_dim(dim: int) -> int:
    k = dim.bit_length() - 1
    if dim <= 0 or (1 << k) != dim:
        raise DimensionError(f"matrix size {dim} is not a power of 2")
    return k


@lru_cache(maxsize=8)
def _weight_mask(k: int) -> np.ndarray:
    w = np.array([int(a).bit_count() for a in range(1 << k)])
    return (w[:, None] == w[None, :])


@lru_cache(maxsize=8)
def _perm_stack(k: int) -> tuple[tuple, np.ndarray]:
    """All k! permutation operators on (C^2)^k, each flattened to a row."""
    import itertools

    perms = tuple(itertools.permutations(range(k)))
    dim = 1 << k
    stack = np.empty((len(perms), dim * dim))
    for a, p in enumerate(perms):
        stack[a, :] = permutation_dense(k, p).ravel()
    return perms, stack


@lru_cache(maxsize=8)
def _perm_gram_pinv(k: int) -> np.ndarray:
    """Pseudo-inverse of the d=2 permutation Gram 2**cycles(p^-1 q).

    The Gram is singular for k > 2 at d = 2, so this is the rank-revealing
    route to the orthogonal projection onto the permutation span.
    """
    perms, _ = _perm_stack(k)
    size = len(perms)
    gram = np.empty((size, size))
    for a, p in enumerate(perms):
        pinv_word = perm_inverse(p)
        for b, s in enumerate(perms):
            gram[a, b] = 2.0 ** cycle_count(perm_compose(pinv_word, s))
    return np.linalg.pinv(gram, rcond=1e-10)


def _gate_power(gate: np.ndarray, k: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for _ in range(k):
        out = np.kron(out, gate)
    return out


def kappa(ensemble: DopingEnsemble, x: np.ndarray) -> np.ndarray:
    """k-fold twirl of the doping measure applied to a 2^k x 2^k matrix."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"square matrix required, got {x.shape}")
    k = _k_from_dim(x.shape[0])
    if k > KAPPA_K_MAX:
        raise ResourceLimitError(f"kappa is capped at k = {KAPPA_K_MAX}")
    if ensemble.kind == "diagonal":
        return np.where(_weight_mask(k), x, 0)
    if ensemble.kind == "discrete":
        u = _gate_power(ensemble.gate, k)
        return (u @ x @ u.conj().T + u.conj().T @ x @ u + x) / 3.0
    perms, stack = _perm_stack(k)
    overlaps = stack @ np.asarray(x, dtype=np.complex128).ravel()
    coeffs = _perm_gram_pinv(k) @ overlaps
    return (coeffs @ stack).reshape(x.shape)


def build_K(basis: MonomialBasis, ensemble: DopingEnsemble) -> np.ndarray:
    """Per-qubit factor matrix K[a, b] = tr(omega_a^dagger kappa(omega_b)).

    Exact rationals for the diagonal ensemble (object array), float64 for
    the other two.  The monomial factors are real matrices with entries
    j/2^m for integers j, so the integer cores here are computed by BLAS
    products that stay far below 2**53 and are exact.
    """
    k = basis.k
    if k > KAPPA_K_MAX:
        raise ResourceLimitError(f"build_K is capped at k = {KAPPA_K_MAX}")
    size = len(basis)
    dim = 1 << k
    scaled = np.empty((size, dim * dim))
    for i, mon in enumerate(basis.monomials):
        scaled[i, :] = mon.omega_scaled.ravel()
    ms = basis.m_values()
    if ensemble.kind == "diagonal":
        masked = scaled * _weight_mask(k).ravel()
        core = masked @ scaled.T
        out = np.empty((size, size), dtype=object)
        for i in range(size):
            for j in range(size):
                c = round(core[i, j])
                if c != core[i, j]:
                    raise ConsistencyError("non-integer diagonal-kappa core")
                out[i, j] = RATIONAL(c, 1 << int(ms[i] + ms[j]))
        return out
    if ensemble.kind == "discrete":
        u = _gate_power(ensemble.gate, k)
        mats = scaled.reshape(size, dim, dim).astype(np.complex128)
        twirled = (u @ mats @ u.conj().T + u.conj().T @ mats @ u + mats) / 3.0
        km = scaled @ twirled.reshape(size, dim * dim).T
        if np.max(np.abs(km.imag)) > 1e-12:
            raise ConsistencyError("K has a non-real entry beyond tolerance")
        km = km.real.copy()
    else:
        _, stack = _perm_stack(k)
        overlaps = stack @ scaled.T
        coeffs = _perm_gram_pinv(k) @ overlaps
        projected = coeffs.T @ stack
        km = scaled @ projected.T
    scale = np.exp2(-(ms[:, None] + ms[None, :]).astype(float))
    return km * scale


@dataclass
class MomentMatrices:
    """K, T, and Delta for one (k, n, ensemble) in one numeric mode."""

    k: int
    n: int
    ensemble: DopingEnsemble
    mode: str
    digits: int | None
    K: np.ndarray
    T: np.ndarray
    L: np.ndarray | None = field(default=None)
    Delta: np.ndarray | None = field(default=None)
    delta_norm: float | None = field(default=None)
    basis: MonomialBasis | None = field(default=None)


def build_T(g: GramData, basis: MonomialBasis,
            ensemble: DopingEnsemble) -> MomentMatrices:
    """Transfer matrix T = G1^(n-1) * K entrywise, in g's numeric mode.

    The permutation rows and columns of K equal those of G1 because kappa
    fixes permutation operators; the exact path verifies that identity and
    the float path enforces it after checking agreement to 1e-10, so T's
    permutation rows match W's exactly in every mode.
    """
    if basis is not g.basis:
        raise ConsistencyError("build_T needs the same basis object as gram")
    size = len(basis)
    perm_rows = list(basis.permutation_indices)
    km = build_K(basis, ensemble)
    if ensemble.kind == "diagonal":
        for p in perm_rows:
            for j in range(size):
                if km[p, j] != g.G1[p, j] or km[j, p] != g.G1[j, p]:
                    raise ConsistencyError(
                        "diagonal kappa moved a permutation row of K"
                    )
    else:
        g1f = to_float(g.G1)
        worst = max(
            np.max(np.abs(km[perm_rows, :] - g1f[perm_rows, :])),
            np.max(np.abs(km[:, perm_rows] - g1f[:, perm_rows])),
        )
        if worst > 1e-10:
            raise ConsistencyError(
                f"kappa moved a permutation row of K by {worst:.3e}"
            )
        km[perm_rows, :] = g1f[perm_rows, :]
        km[:, perm_rows] = g1f[:, perm_rows]
    n1 = g.n - 1
    if g.mode == "exact":
        if ensemble.kind != "diagonal":
            raise UsageError(
                "exact T is available for the diagonal ensemble only; "
                "use a float or mp GramData"
            )
        t = np.empty((size, size), dtype=object)
        for i in range(size):
            for j in range(size):
                t[i, j] = (g.G1[i, j] ** n1) * km[i, j]
    elif g.mode == "float":
        g1f = to_float(g.G1)
        kf = to_float(km) if km.dtype == object else km
        with np.errstate(over="raise"):
            try:
                t = g1f**n1 * kf
            except FloatingPointError as exc:
                raise ConditioningError(
                    f"2**((n-1)*k) = 2**{n1 * basis.k} exceeds float64 "
                    "range; use mode='mp'"
                ) from exc
    else:
        t = np.empty((size, size), dtype=object)
        with mpmath.workdps(g.digits):
            for i in range(size):
                for j in range(size):
                    kij = km[i, j]
                    if isinstance(kij, float):
                        kmp = mpmath.mpf(kij)
                    else:
                        kmp = mpmath.mpf(int(kij.numerator)) / int(kij.denominator)
                    t[i, j] = mpmath.mpf(int(g.G1[i, j])) ** n1 * kmp
    return MomentMatrices(k=g.k, n=g.n, ensemble=ensemble, mode=g.mode,
                          digits=g.digits, K=km, T=t, basis=basis)


def _zero_of(mode: str):
    return RATIONAL(0) if mode == "exact" else (
        mpmath.mpf(0) if mode == "mp" else 0.0)


def build_delta(mm: MomentMatrices, L: np.ndarray,
                W_inv: np.ndarray) -> MomentMatrices:
    """Fill Delta = W_inv @ T - L, zeroing the permutation columns.

    Every permutation column of Delta vanishes identically (T's permutation
    columns equal W's, so W_inv @ T has indicator columns there, and L's
    permutation block is the identity); in particular the permutation x
    permutation block is zero.  Exact mode asserts this outcome, float and
    mp modes verify it to tolerance and then write exact zeros.
    """
    size = mm.T.shape[0]
    perm_cols = list(mm.basis.permutation_indices)
    if mm.mode == "float":
        delta = W_inv @ mm.T - L
        worst = float(np.max(np.abs(delta[:, perm_cols])))
        if worst > _PERM_COLUMN_TOL:
            raise ConsistencyError(
                f"permutation column of Delta off by {worst:.3e}"
            )
        delta[:, perm_cols] = 0.0
    elif mm.mode == "exact":
        delta = np.dot(W_inv, mm.T) - L
        for j in perm_cols:
            for i in range(size):
                if delta[i, j] != 0:
                    raise ConsistencyError(
                        "exact permutation column of Delta is nonzero"
                    )
    else:
        with mpmath.workdps(mm.digits):
            delta = np.dot(W_inv, mm.T) - L
            tol = mpmath.mpf(10) ** (-(mm.digits - 15))
            worst = max(
                (abs(delta[i, j]) for j in perm_cols for i in range(size)),
                default=mpmath.mpf(0),
            )
            if worst > tol:
                raise ConsistencyError(
                    f"permutation column of Delta off by {float(worst):.3e}"
                )
        zero = mpmath.mpf(0)
        for j in perm_cols:
            for i in range(size):
                delta[i, j] = zero
    mm.Delta = delta
    mm.L = L
    mm.delta_norm = delta_norms(mm)["spectral"]
    return mm


def _delta_float(mm: MomentMatrices) -> np.ndarray:
    if mm.mode == "float":
        return mm.Delta
    if mm.mode == "exact":
        return to_float(mm.Delta)
    out = np.empty(mm.Delta.shape)
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            out[i, j] = float(mm.Delta[i, j])
    return out


def delta_norms(mm: MomentMatrices) -> dict[str, float]:
    """Spectral norm, max absolute row sum, and max entry of Delta.

    Reported together because convergence statements use an infinity-norm
    symbol that is sometimes the operator norm and sometimes the largest
    entry; callers pick the reading they need.
    """
    if mm.Delta is None:
        raise UsageError("build_delta has not run")
    df = _delta_float(mm)
    return {
        "spectral": float(np.linalg.norm(df, 2)),
        "max_row_sum": float(np.max(np.sum(np.abs(df), axis=1))),
        "max_entry": float(np.max(np.abs(df))),
    }


def delta_max_row_sum_exact(mm: MomentMatrices):
    """Exact rational max row sum of Delta (exact mode only)."""
    if mm.mode != "exact":
        raise UsageError("exact row sums need an exact-mode Delta")
    best = RATIONAL(0)
    for i in range(mm.Delta.shape[0]):
        s = sum(abs(v) for v in mm.Delta[i, :])
        if s > best:
            best = s
    return best


def _identity_like(mode: str, size: int, digits: int | None) -> np.ndarray:
    if mode == "float":
        return np.eye(size)
    one = RATIONAL(1) if mode == "exact" else mpmath.mpf(1)
    out = np.full((size, size), _zero_of(mode), dtype=object)
    for i in range(size):
        out[i, i] = one
    return out


def matrix_power(mat: np.ndarray, t: int, mode: str,
                 digits: int | None = None) -> np.ndarray:
    """Binary exponentiation; mp mode runs under its working precision."""
    if t < 0:
        raise UsageError(f"power must be >= 0, got {t}")
    size = mat.shape[0]
    if mode == "float":
        return np.linalg.matrix_power(mat, t)
    result = _identity_like(mode, size, digits)
    base = mat
    if mode == "mp":
        with mpmath.workdps(digits):
            while t:
                if t & 1:
                    result = np.dot(result, base)
                t >>= 1
                if t:
                    base = np.dot(base, base)
        return result
    while t:
        if t & 1:
            result = np.dot(result, base)
        t >>= 1
        if t:
            base = np.dot(base, base)
    return result


def doped_weingarten(mm: MomentMatrices, W_inv: np.ndarray,
                     t: int) -> np.ndarray:
    """Delta^t @ W_inv, with the convention Delta^0 = I - L.

    With that convention (W_inv @ T)^t @ W_inv equals the embedded inverse
    permutation Gram plus this matrix for every t >= 0.
    """
    if mm.Delta is None or mm.L is None:
        raise UsageError("build_delta has not run")
    if t == 0:
        size = mm.Delta.shape[0]
        if mm.mode == "mp":
            with mpmath.workdps(mm.digits):
                eye_minus_l = _identity_like(mm.mode, size, mm.digits) - mm.L
                return np.dot(eye_minus_l, W_inv)
        eye_minus_l = _identity_like(mm.mode, size, mm.digits) - mm.L
        return (eye_minus_l @ W_inv if mm.mode == "float"
                else np.dot(eye_minus_l, W_inv))
    power = matrix_power(mm.Delta, t, mm.mode, mm.digits)
    if mm.mode == "mp":
        with mpmath.workdps(mm.digits):
            return np.dot(power, W_inv)
    return power @ W_inv if mm.mode == "float" else np.dot(power, W_inv)


def contraction_coefficients(basis: MonomialBasis,
                             ensemble: DopingEnsemble) -> np.ndarray:
    """tr(omega^dagger kappa(omega)) / 2^k for every basis monomial.

    These diagonal coefficients control the per-dose suppression of each
    non-permutation monomial; permutation entries are exactly 1.  Exact
    rationals for the diagonal ensemble, float64 otherwise.
    """
    k = basis.k
    size = len(basis)
    if ensemble.kind == "diagonal":
        if k > KAPPA_K_MAX:
            raise ResourceLimitError(
                f"contraction coefficients are capped at k = {KAPPA_K_MAX}"
            )
        mask = _weight_mask(k)
        out = np.empty(size, dtype=object)
        for i, mon in enumerate(basis.monomials):
            ws = mon.omega_scaled
            core = int(np.sum(ws * ws, where=mask))
            out[i] = RATIONAL(core, 1 << (2 * mon.m + k))
        return out
    km = build_K(basis, ensemble)
    return np.diag(km).copy() / float(1 << k)


def delta_inf_regime(k: int) -> int:
    """n at or above which the diagonal ensemble has row-sum norm <= 15/16."""
    return k * k - 3 * k + 26


def doped_asymptotic_regime(k: int, delta_inf: float) -> int:
    """Smallest integer n satisfying n >= (3/2)(k^2 - 3k + 18 + log2(1/norm))."""
    if not 0 < delta_inf < 1:
        raise UsageError("need 0 < delta_inf < 1")
    return math.ceil(1.5 * (k * k - 3 * k + 18 + math.log2(1.0 / delta_inf)))


def spectral_form_factor(ensemble: DopingEnsemble, k: int):
    """Average of |tr u|^(2k) / 4^k over the single-qubit measure.

    Closed forms: diagonal C(2k,k)/4^k, haar1q C(2k,k)/(4^k (k+1)), both
    exact rationals; discrete is the three-point average (float).
    """
    if k < 0:
        raise UsageError(f"k must be >= 0, got {k}")
    four_k = 1 << (2 * k)
    if ensemble.kind == "diagonal":
        return RATIONAL(math.comb(2 * k, k), four_k)
    if ensemble.kind == "haar1q":
        return RATIONAL(math.comb(2 * k, k), four_k * (k + 1))
    tr = complex(np.trace(ensemble.gate))
    return (2.0 * abs(tr) ** (2 * k) + four_k) / (3.0 * four_k)


def sff_quadrature(ensemble: DopingEnsemble, k: int) -> float:
    """Independent check of spectral_form_factor by direct integration.

    diagonal: (1/2pi) integral of cos(theta/2)^(2k);
    haar1q:   eigenphase-difference integral (1/4pi) integral of
              (2 - 2cos phi)(2 + 2cos phi)^k, then divided by 4^k;
    discrete: the three-point average itself (no integral to do).
    """
    if ensemble.kind == "diagonal":
        val, _ = quad(lambda th: math.cos(th / 2) ** (2 * k), 0, 2 * math.pi,
                      limit=200)
        return val / (2 * math.pi)
    if ensemble.kind == "haar1q":
        val, _ = quad(
            lambda phi: (2 - 2 * math.cos(phi)) * (2 + 2 * math.cos(phi)) ** k,
            0, 2 * math.pi, limit=200,
        )
        return val / (4 * math.pi) / float(1 << (2 * k))
    return float(spectral_form_factor(ensemble, k))


def _haar_ball(c) -> mpmath.mpf:
    """Measure of the |alpha| <= c ball in U(2) under Haar.

    Equals (2/pi)(asin(s) - s sqrt(1 - s^2)) with s = sin(c)^2; normalized
    so the c = pi/2 ball has measure 1.  Computed in mpmath because the
    leading behaviour is (4/(3 pi)) c^6 and float64 cancels catastrophically
    for small c.
    """
    extra = int(6 * max(0.0, -mpmath.log10(c))) + 30
    with mpmath.workdps(extra):
        cc = mpmath.mpf(c)
        s = mpmath.sin(cc) ** 2
        return (2 / mpmath.pi) * (mpmath.asin(s) - s * mpmath.sqrt(1 - s * s))


def ball_volume(ensemble: DopingEnsemble, k: int, t: int):
    """Measure of gates within distance 1/(8kt) of the identity.

    discrete -> 1/3 (the identity is one of three atoms); diagonal ->
    1/(4kt); haar1q -> the closed-form ball measure, which stays above
    63/(48 pi (8kt)^6).
    """
    if k < 1 or t < 1:
        raise UsageError(f"need k >= 1 and t >= 1, got k={k}, t={t}")
    if ensemble.kind == "discrete":
        return RATIONAL(1, 3)
    if ensemble.kind == "diagonal":
        return RATIONAL(1, 4 * k * t)
    return float(_haar_ball(mpmath.mpf(1) / (8 * k * t)))
