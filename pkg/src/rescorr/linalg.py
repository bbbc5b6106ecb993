"""Dense complex linear-algebra kernel.

Every operator and state in the package is a plain ``numpy`` array. Qubit 0 is
the leftmost (most significant) tensor factor, so the basis index of
``|b_0 b_1 ... b_{n-1}>`` is ``int("b_0b_1...b_{n-1}", 2)``.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

MAX_QUBITS = 10
HERMITIAN_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def num_qubits(dim: int) -> int:
    """Number of qubits for a power-of-two dimension."""
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def tensor_product(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of the arguments, left to right."""
    if not mats:
        raise ValueError("tensor_product needs at least one operand")
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m))
    return out


def _qubit_set(qubits: Iterable[int], n: int) -> list[int]:
    qs = sorted(set(int(q) for q in qubits))
    for q in qs:
        if not 0 <= q < n:
            raise IndexError(f"qubit index {q} out of range for {n} qubits")
    return qs


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the qubits listed in ``keep``.

    The kept qubits retain their relative order.
    """
    rho = np.asarray(rho)
    n = num_qubits(rho.shape[0])
    keep = _qubit_set(keep, n)
    t = rho.reshape([2] * (2 * n))
    m = n
    for q in reversed(range(n)):
        if q in keep:
            continue
        t = np.trace(t, axis1=q, axis2=q + m)
        m -= 1
    d = 1 << len(keep)
    return t.reshape(d, d)


def partial_transpose(rho: np.ndarray, subsystem: Iterable[int]) -> np.ndarray:
    """Transpose ``rho`` on the qubits in ``subsystem`` only."""
    rho = np.asarray(rho)
    n = num_qubits(rho.shape[0])
    qs = _qubit_set(subsystem, n)
    t = rho.reshape([2] * (2 * n))
    axes = list(range(2 * n))
    for q in qs:
        axes[q], axes[q + n] = axes[q + n], axes[q]
    return t.transpose(axes).reshape(rho.shape)


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.max(np.abs(h - h.conj().T), initial=0.0) <= tol


def trace_norm(h: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix.

    Raises:
        ValueError: if ``h`` is not Hermitian within ``tol``.
    """
    if not is_hermitian(h, tol):
        raise ValueError("trace_norm expects a Hermitian matrix")
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    num_qubits(rho.shape[0])
    if not is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace is {tr.real:.3g}, expected 1")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam:.3g}")


def normalize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return vec / nrm


def ket(bits: str) -> np.ndarray:
    """Computational basis state for a bit string such as ``"010"``."""
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def dm(vec: np.ndarray) -> np.ndarray:
    """Projector ``|v><v|``."""
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """``tr(op @ rho)`` without forming the product."""
    return complex(np.einsum("ij,ji->", op, rho))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector."""
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state ``G G^dag / tr(G G^dag)`` with ``G`` Ginibre of shape ``dim x rank``."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def embed(ops: Sequence[tuple[int, np.ndarray]], n: int) -> np.ndarray:
    """Place single-qubit operators on the given qubits of an ``n``-qubit register."""
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
    factors = [I2] * n
    for q, op in ops:
        if not 0 <= q < n:
            raise IndexError(f"qubit index {q} out of range for {n} qubits")
        factors[q] = np.asarray(op, dtype=complex)
    return tensor_product(*factors)
