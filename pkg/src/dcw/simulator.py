"""Monte-Carlo ground truth: uniform Cliffords, doped circuits, estimators.

Clifford elements are sampled exactly uniformly by the anticommuting-pair
sweep: for each target qubit i draw a uniform signed anticommuting Pauli
pair on qubits i..n-1, record the elementary circuit that maps the pair to
(+X_i, +Z_i), and push the circuit onto a tableau.  The pair counts match
the group-order ratio 2(4^m - 1) * 4^m exactly, so every element is
equiprobable; uniformity is also counting-tested rather than assumed.

Dense matrices come from the tableau, not a gate replay: column x of C is
P_x C|0>, where C|0> is the stabilizer state of the Z-image rows and P_x
multiplies the X-image rows selected by the bits of x.  That is O(n) masked
Pauli applications per matrix, which is what makes 10^6-sample estimates
affordable.  Dense matrices carry an arbitrary global phase; every
estimator here is phase-invariant.

Estimators draw in fixed 32768-sample chunks, one counter-based generator
per chunk keyed by (seed, chunk index), so results are bit-identical for a
given (seed, samples) regardless of worker count.  DCW_THREADS caps the
process pool; the default is single-process.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .doping import TGATE, DopingEnsemble
from .errors import ConsistencyError, ResourceLimitError, UsageError

CHUNK = 32768
DENSE_LIMIT = 10
STATEVECTOR_LIMIT = 14
TWIRL_LIMIT = 12

_SQRT_HALF = 1.0 / math.sqrt(2.0)


# ------------------------------------------------------------- tableau rules


def _rule(op, xs, zs, signs):
    """Conjugate every row Pauli (x, z, sign bitmask form) by one gate."""
    kind = op[0]
    if kind == "h":
        q = 1 << op[1]
        for r in range(len(xs)):
            x, z = xs[r], zs[r]
            signs[r] ^= 1 if (x & z & q) else 0
            xb, zb = x & q, z & q
            xs[r] = (x & ~q) | zb
            zs[r] = (z & ~q) | xb
    elif kind == "s":
        q = 1 << op[1]
        for r in range(len(xs)):
            x = xs[r]
            signs[r] ^= 1 if (x & zs[r] & q) else 0
            zs[r] ^= x & q
    elif kind == "sdg":
        q = 1 << op[1]
        for r in range(len(xs)):
            x = xs[r]
            signs[r] ^= 1 if (x & q) else 0
            signs[r] ^= 1 if (x & zs[r] & q) else 0
            zs[r] ^= x & q
    elif kind == "cx":
        c, t = 1 << op[1], 1 << op[2]
        for r in range(len(xs)):
            x, z = xs[r], zs[r]
            xc, zt = x & c, z & t
            if xc and zt:
                xt = 1 if (x & t) else 0
                zc = 1 if (z & c) else 0
                signs[r] ^= xt ^ zc ^ 1
            xs[r] = x ^ (t if xc else 0)
            zs[r] = z ^ (c if zt else 0)
    elif kind == "swap":
        a, b = op[1], op[2]
        qa, qb = 1 << a, 1 << b
        for r in range(len(xs)):
            x, z = xs[r], zs[r]
            xa, xb = (x >> a) & 1, (x >> b) & 1
            za, zb = (z >> a) & 1, (z >> b) & 1
            xs[r] = (x & ~qa & ~qb) | (xb << a) | (xa << b)
            zs[r] = (z & ~qa & ~qb) | (zb << a) | (za << b)
    elif kind == "x":
        q = 1 << op[1]
        for r in range(len(xs)):
            signs[r] ^= 1 if (zs[r] & q) else 0
    elif kind == "z":
        q = 1 << op[1]
        for r in range(len(xs)):
            signs[r] ^= 1 if (xs[r] & q) else 0
    else:
        raise UsageError(f"unknown tableau op {op!r}")


# --------------------------------------------------------------- dense atoms


@lru_cache(maxsize=32)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.uint32)
    out = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        out += (idx >> b) & 1
    return out


@lru_cache(maxsize=64)
def _bit_rows(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n)
    low = idx[(idx >> q) & 1 == 0]
    return low, low | (1 << q)


def _pauli_apply(arr: np.ndarray, n: int, x: int, z: int,
                 sign: int) -> np.ndarray:
    """Rows of arr under the Hermitian Pauli i^|Y| X^x Z^z times (-1)^sign."""
    idx = np.arange(1 << n)
    src = idx ^ x
    pc = _popcounts(n)
    coeff = (1j ** (pc[x & z] % 4)) * (-1.0 if sign else 1.0)
    phases = coeff * (1.0 - 2.0 * (pc[z & src] & 1))
    return phases[:, None] * arr[src] if arr.ndim == 2 else phases * arr[src]


def _apply_1q(arr: np.ndarray, n: int, q: int, g: np.ndarray) -> None:
    i0, i1 = _bit_rows(n, q)
    a, b = arr[i0], arr[i1]
    arr[i0] = g[0, 0] * a + g[0, 1] * b
    arr[i1] = g[1, 0] * a + g[1, 1] * b


# ---------------------------------------------------------- Clifford element


@dataclass(frozen=True)
class CliffordElement:
    """A Clifford unitary as a signed stabilizer tableau.

    Row r < n is the conjugated image of X_r, row n + r the image of Z_r,
    each as (x bitmask, z bitmask, sign).  ops is the elementary-gate word
    the sampler used; replaying it reproduces the element (same tableau,
    fixed global phase), which dense() does not need but vector application
    above the dense limit does.
    """

    n: int
    xs: tuple
    zs: tuple
    signs: tuple
    ops: tuple

    def key(self) -> tuple:
        return (self.xs, self.zs, self.signs)

    def row(self, r: int) -> tuple[int, int, int]:
        return (self.xs[r], self.zs[r], self.signs[r])

    def symplectic_ok(self) -> bool:
        n = self.n
        for a in range(2 * n):
            for b in range(a, 2 * n):
                form = ((self.xs[a] & self.zs[b]).bit_count()
                        + (self.zs[a] & self.xs[b]).bit_count()) & 1
                want = 1 if b == a + n else 0
                if form != want:
                    return False
        return True

    def state0(self) -> np.ndarray:
        """C|0...0> as a dense statevector (global phase arbitrary)."""
        n, dim = self.n, 1 << self.n
        for r in range(dim):
            v = np.zeros(dim, dtype=complex)
            v[r] = 1.0
            for j in range(n):
                x, z, s = self.row(n + j)
                v = 0.5 * (v + _pauli_apply(v, n, x, z, s))
            nrm = float(np.real(np.vdot(v, v)))
            if nrm > 0.5 / dim:
                return v / math.sqrt(nrm)
        raise ConsistencyError("stabilizer projector annihilated every "
                               "basis vector; tableau is not symplectic")

    def dense(self) -> np.ndarray:
        """Dense 2^n x 2^n unitary, up to a global phase."""
        n, dim = self.n, 1 << self.n
        if n > DENSE_LIMIT:
            raise ResourceLimitError(
                f"dense Clifford matrices are capped at n = {DENSE_LIMIT}, "
                f"got n = {n}"
            )
        mat = np.empty((dim, dim), dtype=complex)
        mat[:, :] = self.state0()[:, None]
        for q in range(n):
            sel = (np.arange(dim) >> q) & 1 == 1
            x, z, s = self.row(q)
            mat[:, sel] = _pauli_apply(mat[:, sel], n, x, z, s)
        return mat

    def apply_to_vector(self, vec: np.ndarray) -> np.ndarray:
        """Elementary-gate replay of the element on a statevector."""
        n = self.n
        out = np.array(vec, dtype=complex)
        h = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF
        s = np.diag([1.0, 1j])
        for op in self.ops:
            kind = op[0]
            if kind == "h":
                _apply_1q(out, n, op[1], h)
            elif kind == "s":
                _apply_1q(out, n, op[1], s)
            elif kind == "sdg":
                _apply_1q(out, n, op[1], s.conj())
            elif kind == "cx":
                i10, i11 = _cx_rows(n, op[1], op[2])
                fwd = np.concatenate((i10, i11))
                out[fwd] = out[np.concatenate((i11, i10))]
            elif kind == "swap":
                perm = _swap_perm(n, op[1], op[2])
                out = out[perm]
            elif kind == "x":
                out = _pauli_apply(out, n, 1 << op[1], 0, 0)
            elif kind == "z":
                out = _pauli_apply(out, n, 0, 1 << op[1], 0)
        return out


@lru_cache(maxsize=64)
def _cx_rows(n: int, c: int, t: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n)
    on = idx[(idx >> c) & 1 == 1]
    i10 = on[(on >> t) & 1 == 0]
    return i10, i10 | (1 << t)


@lru_cache(maxsize=64)
def _swap_perm(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(1 << n)
    ba, bb = (idx >> a) & 1, (idx >> b) & 1
    return (idx & ~(1 << a) & ~(1 << b)) | (bb << a) | (ba << b)


# ------------------------------------------------------------------ sampling


def _sample_pair(rng, i: int, n: int) -> tuple[list, list]:
    """Uniform signed anticommuting Pauli pair on qubits i..n-1."""
    m = n - i
    while True:
        v = int(rng.integers(0, 1 << (2 * m + 1)))
        if v & ((1 << (2 * m)) - 1):
            break
    p = [(v & ((1 << m) - 1)) << i, ((v >> m) & ((1 << m) - 1)) << i,
         (v >> (2 * m)) & 1]
    while True:
        w = int(rng.integers(0, 1 << (2 * m + 1)))
        xq = (w & ((1 << m) - 1)) << i
        zq = ((w >> m) & ((1 << m) - 1)) << i
        if ((p[0] & zq).bit_count() + (p[1] & xq).bit_count()) & 1:
            return p, [xq, zq, (w >> (2 * m)) & 1]


def _pair_to_ops(n: int, i: int, p: list, q: list) -> list:
    """Elementary circuit mapping the signed pair to (+X_i, +Z_i)."""
    xs = [p[0], q[0]]
    zs = [p[1], q[1]]
    signs = [p[2], q[2]]
    ops = []

    def ap(op):
        _rule(op, xs, zs, signs)
        ops.append(op)

    for col in range(i, n):
        if (zs[0] >> col) & 1:
            ap(("s", col) if (xs[0] >> col) & 1 else ("h", col))
    support = [c for c in range(i, n) if (xs[0] >> c) & 1]
    pivot = i if (xs[0] >> i) & 1 else support[0]
    for c in support:
        if c != pivot:
            ap(("cx", pivot, c))
    if pivot != i:
        ap(("swap", i, pivot))
    ap(("h", i))
    for col in range(i, n):
        if (zs[1] >> col) & 1:
            ap(("s", col) if (xs[1] >> col) & 1 else ("h", col))
    for c in range(i, n):
        if c != i and (xs[1] >> c) & 1:
            ap(("cx", i, c))
    ap(("h", i))
    if signs[0]:
        ap(("z", i))
    if signs[1]:
        ap(("x", i))
    if xs != [1 << i, 0] or zs != [0, 1 << i] or signs != [0, 0]:
        raise ConsistencyError("pair sweep failed to reach (+X_i, +Z_i)")
    return ops


def sample_clifford(n: int, rng) -> CliffordElement:
    """One exactly uniform n-qubit Clifford element."""
    if n < 1:
        raise UsageError(f"need n >= 1, got {n}")
    xs = [1 << r for r in range(n)] + [0] * n
    zs = [0] * n + [1 << r for r in range(n)]
    signs = [0] * (2 * n)
    all_ops = []
    for i in range(n):
        p, q = _sample_pair(rng, i, n)
        ops = _pair_to_ops(n, i, p, q)
        for op in ops:
            _rule(op, xs, zs, signs)
        all_ops.extend(ops)
    return CliffordElement(n=n, xs=tuple(xs), zs=tuple(zs),
                           signs=tuple(signs), ops=tuple(all_ops))


def _sample_doped_gate(ensemble: DopingEnsemble, rng) -> np.ndarray:
    if ensemble.kind == "diagonal":
        theta = rng.uniform(0.0, 2.0 * math.pi)
        return np.diag([1.0, np.exp(1j * theta)])
    if ensemble.kind == "haar1q":
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        qmat, rmat = np.linalg.qr(g)
        d = np.diagonal(rmat)
        return qmat * (d / np.abs(d))
    gate = ensemble.gate if ensemble.gate is not None else TGATE
    pick = int(rng.integers(0, 3))
    if pick == 0:
        return np.eye(2, dtype=complex)
    return gate if pick == 1 else gate.conj().T


def sample_doped_unitary(n: int, t: int, ensemble: DopingEnsemble,
                         rng) -> np.ndarray:
    """Dense draw of a t-doped circuit: Cliffords alternating with doses.

    The product is C_t K_t ... C_1 K_1 C_0 with uniform Cliffords C_i and
    single-qubit doses K_i on qubit 0; global phase is arbitrary.
    """
    if n > DENSE_LIMIT:
        raise ResourceLimitError(
            f"dense doped circuits are capped at n = {DENSE_LIMIT}, "
            f"got n = {n}"
        )
    if t < 0:
        raise UsageError(f"t must be >= 0, got {t}")
    u = sample_clifford(n, rng).dense()
    for _ in range(t):
        _apply_1q(u, n, 0, _sample_doped_gate(ensemble, rng))
        u = sample_clifford(n, rng).dense() @ u
    return u


def _doped_state(n: int, t: int, ensemble: DopingEnsemble,
                 rng) -> np.ndarray:
    vec = sample_clifford(n, rng).state0()
    for _ in range(t):
        _apply_1q(vec, n, 0, _sample_doped_gate(ensemble, rng))
        vec = sample_clifford(n, rng).apply_to_vector(vec)
    return vec


# ---------------------------------------------------------------- estimators


@dataclass(frozen=True)
class McEstimate:
    estimator: str
    n: int
    k: int
    t: int
    ensemble: str
    samples: int
    seed: int
    mean: float
    std_error: float

    CSV_COLUMNS = ("estimator", "n", "k", "t", "ensemble", "samples",
                   "seed", "mean", "std_error")

    def csv_row(self) -> list[str]:
        return [self.estimator, str(self.n), str(self.k), str(self.t),
                self.ensemble, str(self.samples), str(self.seed),
                repr(self.mean), repr(self.std_error)]

    def to_json_dict(self) -> dict:
        return {c: getattr(self, c) for c in self.CSV_COLUMNS}


def _chunk_rng(seed: int, index: int):
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def _fp_chunk(args) -> tuple:
    n, k, t, kind, gate, seed, index, count, single = args
    ens = _rebuild_ensemble(kind, gate)
    rng = _chunk_rng(seed, index)
    vals = np.empty(count)
    for j in range(count):
        if single and t == 0:
            tr = np.trace(sample_clifford(n, rng).dense())
        else:
            u = sample_doped_unitary(n, t, ens, rng)
            v = sample_doped_unitary(n, t, ens, rng)
            tr = np.vdot(u, v)
        vals[j] = abs(tr) ** (2 * k)
    return (np.sum(vals, dtype=np.longdouble),
            np.sum(vals * vals, dtype=np.longdouble))


def _purity_chunk(args) -> tuple:
    n, k, t, kind, gate, seed, index, count, _ = args
    ens = _rebuild_ensemble(kind, gate)
    rng = _chunk_rng(seed, index)
    vals = np.empty(count)
    for j in range(count):
        u = _doped_state(n, t, ens, rng)
        v = _doped_state(n, t, ens, rng)
        vals[j] = abs(np.vdot(u, v)) ** (2 * k)
    return (np.sum(vals, dtype=np.longdouble),
            np.sum(vals * vals, dtype=np.longdouble))


def _rebuild_ensemble(kind: str, gate) -> DopingEnsemble:
    if kind == "discrete":
        return DopingEnsemble.discrete(
            None if gate is None else np.frombuffer(gate, dtype=complex)
            .reshape(2, 2))
    return DopingEnsemble(kind=kind)


def _ensemble_wire(ensemble: DopingEnsemble) -> tuple:
    if ensemble.kind == "discrete" and ensemble.gate is not None:
        return ("discrete", np.ascontiguousarray(ensemble.gate).tobytes())
    return (ensemble.kind, None)


def _workers(threads: int | None) -> int:
    cap = os.environ.get("DCW_THREADS")
    want = threads if threads is not None else (os.cpu_count() or 1)
    if cap is not None:
        want = min(want, max(1, int(cap)))
    return max(1, want)


def _run_scalar(worker, estimator: str, n: int, k: int, t: int,
                ensemble: DopingEnsemble, samples: int, seed: int,
                threads: int | None, single: bool = False) -> McEstimate:
    if samples < 2:
        raise UsageError(f"need samples >= 2, got {samples}")
    if k < 1 or t < 0:
        raise UsageError(f"need k >= 1 and t >= 0, got k={k}, t={t}")
    kind, gate = _ensemble_wire(ensemble)
    counts = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        counts.append(samples % CHUNK)
    jobs = [(n, k, t, kind, gate, seed, i, c, single)
            for i, c in enumerate(counts)]
    nproc = min(_workers(threads), len(jobs))
    if nproc > 1:
        with ProcessPoolExecutor(max_workers=nproc) as pool:
            parts = list(pool.map(worker, jobs))
    else:
        parts = [worker(j) for j in jobs]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = float(s1 / samples)
    var = float((s2 - s1 * s1 / samples) / (samples - 1))
    std_error = math.sqrt(max(var, 0.0) / samples)
    return McEstimate(estimator=estimator, n=n, k=k, t=t,
                      ensemble=ensemble.label, samples=samples, seed=seed,
                      mean=mean, std_error=std_error)


def mc_frame_potential(n: int, k: int, t: int, ensemble: DopingEnsemble,
                       samples: int, seed: int, threads: int | None = None,
                       single_draw: bool = False) -> McEstimate:
    """Mean of |tr(U^dag V)|^(2k) over independent t-doped draws U, V.

    single_draw replaces the pair with one uniform Clifford at t = 0 (the
    two laws agree by group invariance; the estimators differ only in
    variance), and is rejected for t > 0.
    """
    if n > DENSE_LIMIT:
        raise ResourceLimitError(
            f"frame-potential sampling is capped at n = {DENSE_LIMIT}, "
            f"got n = {n}"
        )
    if single_draw and t != 0:
        raise UsageError("single_draw draws one group element, which only "
                         "matches the pair law at t = 0")
    return _run_scalar(_fp_chunk, "frame_potential", n, k, t, ensemble,
                       samples, seed, threads, single_draw)


def mc_state_purity(n: int, k: int, t: int, ensemble: DopingEnsemble,
                    samples: int, seed: int,
                    threads: int | None = None) -> McEstimate:
    """Mean of |<0|U^dag V|0>|^(2k) over independent t-doped draws."""
    if n > STATEVECTOR_LIMIT:
        raise ResourceLimitError(
            f"statevector sampling is capped at n = {STATEVECTOR_LIMIT}, "
            f"got n = {n}"
        )
    return _run_scalar(_purity_chunk, "state_purity", n, k, t, ensemble,
                       samples, seed, threads)


@dataclass(frozen=True)
class McTwirlEstimate:
    estimator: str
    n: int
    k: int
    t: int
    ensemble: str
    samples: int
    seed: int
    mean: np.ndarray
    std_error: np.ndarray

    def max_sigma_distance(self, reference: np.ndarray,
                           floor: float = 1e-12) -> float:
        """Largest entrywise |mean - reference| in std-error units."""
        gap = np.abs(self.mean - reference)
        return float(np.max(gap / np.maximum(self.std_error, floor)))


def mc_twirl(n: int, k: int, t: int, ensemble: DopingEnsemble,
             observable: np.ndarray, samples: int,
             seed: int) -> McTwirlEstimate:
    """Empirical mean of U^(x k) O U^(x k)^dag over t-doped draws."""
    if n * k > TWIRL_LIMIT:
        raise ResourceLimitError(
            f"dense twirls are capped at nk = {TWIRL_LIMIT}, "
            f"got nk = {n * k}"
        )
    if samples < 2:
        raise UsageError(f"need samples >= 2, got {samples}")
    dim = 1 << (n * k)
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != (dim, dim):
        raise UsageError(
            f"observable must be {dim} x {dim} for n={n}, k={k}, "
            f"got {obs.shape}"
        )
    acc = np.zeros((dim, dim), dtype=complex)
    acc2 = np.zeros((dim, dim))
    done = 0
    index = 0
    while done < samples:
        count = min(CHUNK, samples - done)
        rng = _chunk_rng(seed, index)
        for _ in range(count):
            u = sample_doped_unitary(n, t, ensemble, rng)
            w = u
            for _ in range(k - 1):
                w = np.kron(w, u)
            val = w @ obs @ w.conj().T
            acc += val
            acc2 += np.abs(val) ** 2
        done += count
        index += 1
    mean = acc / samples
    var = (acc2 / samples - np.abs(mean) ** 2) * samples / (samples - 1)
    std_error = np.sqrt(np.maximum(var, 0.0) / samples)
    return McTwirlEstimate(estimator="twirl", n=n, k=k, t=t,
                           ensemble=ensemble.label, samples=samples,
                           seed=seed, mean=mean, std_error=std_error)
