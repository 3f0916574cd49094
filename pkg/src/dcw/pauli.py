"""Binary symplectic algebra for n-qubit Pauli operators.

Encoding: a Pauli is (n, x, z, phase) where x and z are n-bit integers
(bit q addresses qubit q) and phase is an exponent of i modulo 4.  The
operator value is

    P = i^phase * sigma(x, z),      sigma(x, z) := i^(x.z) X^x Z^z,

with X^x Z^z the tensor product over qubits of X^{x_q} Z^{z_q} and x.z the
integer dot product popcount(x & z).  sigma is the Hermitian representative:
sigma(1,0) = X, sigma(0,1) = Z, sigma(1,1) = Y, so phase measures the
deviation from the plain Pauli letter string and the adjoint is phase
negation.

Products compose as sigma(a) sigma(b) = i^g sigma(a xor b) with

    g = xa.za + xb.zb - (xa^xb).(za^zb) + 2*(za & xb popcount)   (mod 4),

e.g. X*Z = (x=1, z=1, phase=3) = -iY and Z*X = (x=1, z=1, phase=1) = +iY.
The commutation sign chi(a, b) = (-1)^(xa.zb + za.xb) ignores phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ResourceLimitError, UsageError

_LETTER_FOR_XZ = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_XZ_FOR_LETTER = {v: k for k, v in _LETTER_FOR_XZ.items()}

_DENSE_LETTER = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASE_PREFIX = {0: "", 1: "i*", 2: "-", 3: "-i*"}


@dataclass(frozen=True)
class PauliString:
    """Immutable signed Pauli operator in binary symplectic form."""

    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise UsageError(f"need at least one qubit, got n={self.n}")
        if not (0 <= self.x < (1 << self.n) and 0 <= self.z < (1 << self.n)):
            raise UsageError(
                f"bit-vectors must fit in {self.n} bits: x={self.x}, z={self.z}"
            )
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliString":
        """Build from a string like "XIZ"; letter 0 is qubit 0."""
        x = z = 0
        for q, ch in enumerate(letters):
            try:
                xb, zb = _XZ_FOR_LETTER[ch]
            except KeyError:
                raise UsageError(f"unknown Pauli letter {ch!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(letters), x, z, phase)

    def letters(self) -> str:
        return "".join(
            _LETTER_FOR_XZ[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in range(self.n)
        )

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + self.letters()

    def weight(self) -> int:
        """Number of non-identity tensor factors."""
        return (self.x | self.z).bit_count()

    def adjoint(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, -self.phase)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def commutes(self, other: "PauliString") -> bool:
        return chi(self, other) == 1

    def dense(self, max_qubits: int = 12) -> np.ndarray:
        return pauli_dense(self, max_qubits=max_qubits)


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Product a*b with exact phase tracking."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
    x, z = a.x ^ b.x, a.z ^ b.z
    g = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        - (x & z).bit_count()
        + 2 * (a.z & b.x).bit_count()
    )
    return PauliString(a.n, x, z, a.phase + b.phase + g)


def chi(a: PauliString, b: PauliString) -> int:
    """Commutation sign: +1 if a and b commute, -1 otherwise."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
    return -1 if ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) & 1 else 1


def pauli_dense(p: PauliString, max_qubits: int = 12) -> np.ndarray:
    """Exact dense 2^n x 2^n matrix (entries in {0, +-1, +-i} up to phase).

    Qubit 0 is the least significant bit of the computational-basis index
    (little-endian, matching every other index convention in the package),
    so from_letters("XZ").dense() == kron(Z, X).
    """
    if p.n > max_qubits:
        raise ResourceLimitError(
            f"dense Pauli on {p.n} qubits exceeds the {max_qubits}-qubit limit"
        )
    out = np.array([[1j ** p.phase]], dtype=complex)
    for q in range(p.n):
        out = np.kron(_DENSE_LETTER[_LETTER_FOR_XZ[((p.x >> q) & 1, (p.z >> q) & 1)]], out)
    return out
