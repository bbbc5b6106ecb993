"""Exact n-qubit Pauli operators with phases.

A :class:`PauliString` is stored as two bit masks plus a phase exponent::

    P = i**phase * sigma(x_0, z_0) (x) ... (x) sigma(x_{n-1}, z_{n-1})

with ``sigma(0,0)=I, sigma(1,0)=X, sigma(0,1)=Z, sigma(1,1)=Y``. Qubit ``q`` lives
at bit ``n-1-q`` of each mask, so the X mask is directly the bit-flip pattern
on computational basis indices. Hermitian Paulis have ``phase`` in ``{0, 2}``.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from rescorr.linalg import MAX_QUBITS

_CHARS = "IXZY"  # index = x + 2*z
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("bit masks exceed the qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse labels such as ``"ZZIIIIIII"``, ``"-XY"`` or ``"+iZ"``."""
        body = label.lstrip("+-i")
        prefix = label[: len(label) - len(body)]
        if prefix not in _PREFIX_PHASE:
            raise ValueError(f"bad phase prefix {prefix!r} in {label!r}")
        n = len(body)
        x = z = 0
        for q, ch in enumerate(body.upper()):
            try:
                code = _CHARS.index(ch)
            except ValueError:
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}") from None
            bit = 1 << (n - 1 - q)
            if code & 1:
                x |= bit
            if code & 2:
                z |= bit
        return cls(n, x, z, _PREFIX_PHASE[prefix])

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0, 0)

    @classmethod
    def from_sparse(cls, n: int, ops: Mapping[int, str], phase: int = 0) -> PauliString:
        """Build from ``{qubit: "X"|"Y"|"Z"}``; unspecified qubits are identity."""
        chars = ["I"] * n
        for q, p in ops.items():
            if not 0 <= q < n:
                raise IndexError(f"qubit index {q} out of range for {n} qubits")
            chars[q] = p
        return cls.from_label("".join(chars)).with_phase(phase)

    @classmethod
    def single(cls, n: int, qubit: int, pauli: str) -> PauliString:
        return cls.from_sparse(n, {qubit: pauli})

    @classmethod
    def from_symplectic(cls, vec: Sequence[int], phase: int = 0) -> PauliString:
        """Inverse of :meth:`symplectic`: ``vec = (x_0..x_{n-1}, z_0..z_{n-1})``."""
        n = len(vec) // 2
        x = z = 0
        for q in range(n):
            if vec[q] & 1:
                x |= 1 << (n - 1 - q)
            if vec[n + q] & 1:
                z |= 1 << (n - 1 - q)
        return cls(n, x, z, phase)

    # -- views --------------------------------------------------------------

    def char(self, q: int) -> str:
        bit = 1 << (self.n - 1 - q)
        return _CHARS[bool(self.x & bit) + 2 * bool(self.z & bit)]

    @property
    def body(self) -> str:
        """Label without any phase prefix."""
        return "".join(self.char(q) for q in range(self.n))

    @property
    def label(self) -> str:
        prefix = _PHASE_PREFIX[self.phase]
        return (prefix if prefix != "+" else "") + self.body

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n) if mask >> (self.n - 1 - q) & 1)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def symplectic(self) -> np.ndarray:
        """Binary vector ``(x bits, z bits)`` of length ``2n``, qubit order."""
        v = np.zeros(2 * self.n, dtype=np.uint8)
        for q in range(self.n):
            v[q] = self.x >> (self.n - 1 - q) & 1
            v[self.n + q] = self.z >> (self.n - 1 - q) & 1
        return v

    def with_phase(self, phase: int) -> PauliString:
        return PauliString(self.n, self.x, self.z, phase)

    def unsigned(self) -> PauliString:
        return self.with_phase(0)

    def same_up_to_phase(self, other: PauliString) -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    # -- algebra ------------------------------------------------------------

    def _xz_phase(self) -> int:
        # exponent in the X^x Z^z convention (Y = i X Z)
        return (self.phase + _popcount(self.x & self.z)) % 4

    def _check_size(self, other: PauliString) -> None:
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n} qubits")

    def multiply(self, other: PauliString) -> PauliString:
        """Exact product ``self @ other`` including phase."""
        self._check_size(other)
        k = self._xz_phase() + other._xz_phase() + 2 * _popcount(self.z & other.x)
        x, z = self.x ^ other.x, self.z ^ other.z
        return PauliString(self.n, x, z, k - _popcount(x & z))

    __mul__ = multiply
    __matmul__ = multiply

    def __neg__(self) -> PauliString:
        return self.with_phase(self.phase + 2)

    def adjoint(self) -> PauliString:
        # sigma factors are Hermitian; only the scalar conjugates
        return self.with_phase(-self.phase)

    def commutes_with(self, other: PauliString) -> bool:
        self._check_size(other)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def tensor(self, other: PauliString) -> PauliString:
        return PauliString(
            self.n + other.n,
            self.x << other.n | other.x,
            self.z << other.n | other.z,
            self.phase + other.phase,
        )

    def pad(self, extra: int) -> PauliString:
        """Extend with ``extra`` identity factors on the right."""
        return self.tensor(PauliString.identity(extra)) if extra else self

    # -- dense action --------------------------------------------------------

    def _column_phases(self) -> np.ndarray:
        # P|b> = c[b] |b ^ x>
        b = np.arange(1 << self.n)
        parity = np.zeros(b.shape, dtype=np.int64)
        for j in range(self.n):
            if self.z >> j & 1:
                parity ^= (b >> j) & 1
        return (1j ** self._xz_phase()) * (1 - 2 * parity).astype(complex)

    def _perm(self) -> np.ndarray:
        return np.arange(1 << self.n) ^ self.x

    def _check_dense(self) -> None:
        if self.n > MAX_QUBITS:
            raise ValueError(f"{self.n} qubits exceeds the dense cap of {MAX_QUBITS}")

    def to_matrix(self) -> np.ndarray:
        self._check_dense()
        d = 1 << self.n
        m = np.zeros((d, d), dtype=complex)
        m[self._perm(), np.arange(d)] = self._column_phases()
        return m

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """``P |vec>``."""
        self._check_dense()
        return (self._column_phases() * np.asarray(vec))[self._perm()]

    def dot(self, mat: np.ndarray) -> np.ndarray:
        """``P @ mat`` in O(d^2)."""
        self._check_dense()
        return (self._column_phases()[:, None] * np.asarray(mat))[self._perm()]

    def rdot(self, mat: np.ndarray) -> np.ndarray:
        """``mat @ P`` in O(d^2)."""
        self._check_dense()
        return np.asarray(mat)[:, self._perm()] * self._column_phases()[None, :]

    def trace_product(self, mat: np.ndarray) -> complex:
        """``tr(P @ mat)`` in O(d)."""
        self._check_dense()
        d = 1 << self.n
        return complex(np.dot(self._column_phases(), np.asarray(mat)[np.arange(d), self._perm()]))

    def conjugate(self, rho: np.ndarray) -> np.ndarray:
        """``P rho P^dag``."""
        self._check_dense()
        c = self._column_phases()
        idx = self._perm()
        m = c[:, None] * np.asarray(rho) * c.conj()[None, :]
        return m[np.ix_(idx, idx)]


def commutes_with(a: PauliString, b: PauliString) -> bool:
    return a.commutes_with(b)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    return a.multiply(b)


def product(paulis: Iterable[PauliString], n: int) -> PauliString:
    """Ordered product ``p_0 p_1 ...``; identity if empty."""
    out = PauliString.identity(n)
    for p in paulis:
        out = out * p
    return out


def paulis_of_weight(n: int, weight: int, alphabet: str = "XYZ") -> list[PauliString]:
    """All Paulis with exactly ``weight`` non-identity sites, in label order."""
    out = []
    for sites in itertools.combinations(range(n), weight):
        for chars in itertools.product(alphabet, repeat=weight):
            out.append(PauliString.from_sparse(n, dict(zip(sites, chars))))
    return sorted(out, key=lambda p: p.body)
