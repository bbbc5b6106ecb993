"""Resource quantifiers: l1-norm coherence and negativity, incoherent bases, free-unitary recognizers."""
from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from rescorr.codes import StabilizerCode, code_projector, logical_basis
from rescorr.linalg import num_qubits, partial_transpose, trace_norm

RECOGNIZER_TOL = 1e-8
ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IncoherentBasis:
    """Ordered orthonormal vectors (columns of ``vectors``) fixing an l1 measure.

    ``kind`` is ``"physical"`` when the vectors span the whole space and
    ``"logical"`` when they span a code subspace (possibly tensored with bare
    reference qubits).
    """

    vectors: np.ndarray
    labels: tuple[str, ...]
    kind: str = "physical"

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[1] > v.shape[0]:
            raise ValueError(f"basis matrix must be dim x count with count <= dim, got {v.shape}")
        if len(self.labels) != v.shape[1]:
            raise ValueError("one label per basis vector required")
        gram_dev = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))
        if gram_dev > ORTHONORMAL_TOL:
            raise ValueError(f"basis vectors are not orthonormal (Gram deviation {gram_dev:.3g})")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_complete(self) -> bool:
        return self.size == self.dim

    def coordinates(self, op: np.ndarray) -> np.ndarray:
        """Matrix elements ``<b_i| op |b_j>``."""
        return self.vectors.conj().T @ np.asarray(op) @ self.vectors

    def tensor(self, other: IncoherentBasis) -> IncoherentBasis:
        labels = tuple(f"{a},{b}" for a, b in itertools.product(self.labels, other.labels))
        kind = "physical" if self.kind == other.kind == "physical" else "logical"
        return IncoherentBasis(np.kron(self.vectors, other.vectors), labels, kind)

    def rephased(self, phases: Sequence[float]) -> IncoherentBasis:
        """Same rays with ``|b_i> -> e^{i phase_i} |b_i>``."""
        return IncoherentBasis(self.vectors * np.exp(1j * np.asarray(phases))[None, :], self.labels, self.kind)


def standard_basis(n: int) -> IncoherentBasis:
    d = 1 << n
    return IncoherentBasis(np.eye(d, dtype=complex), tuple(format(i, f"0{n}b") if n else "" for i in range(d)))


def logical_incoherent_basis(code: StabilizerCode) -> IncoherentBasis:
    """The encoded computational basis ``{|b>}`` of ``code`` (spans the code space only)."""
    labels = tuple("L=" + format(b, f"0{code.k}b") for b in range(1 << code.k))
    return IncoherentBasis(logical_basis(code), labels, kind="logical")


def physical_pauli_basis(code: StabilizerCode) -> IncoherentBasis:
    """Pauli orbit of ``|0bar>`` labelled by syndrome and logical class.

    Vector ``(s, l)`` is ``D(s) Xbar^l |0bar>`` with ``D(s)`` the destabilizer
    product for syndrome ``s``. Ordering is lexicographic in ``(s, l)``, so the
    first ``2^k`` vectors are the logical basis. Distinct syndromes are
    orthogonal because they are different joint eigenvalues of the generators;
    within one syndrome the logical classes differ in their ``Zbar`` eigenvalues.
    """
    if len(code.destabilizers) != len(code.generators):
        raise ValueError("code has no destabilizers")
    logical = logical_basis(code)
    m = len(code.generators)
    cols, labels = [], []
    for s in itertools.product((0, 1), repeat=m):
        d_s = code.pure_error(s)
        for ell in range(1 << code.k):
            cols.append(d_s.apply(logical[:, ell]))
            labels.append(f"s={''.join(map(str, s))}|l={format(ell, f'0{code.k}b')}")
    return IncoherentBasis(np.stack(cols, axis=1), tuple(labels), kind="physical")


def l1_coherence(rho: np.ndarray, basis: IncoherentBasis | None = None, allow_subspace: bool = False) -> float:
    """``sum_{i != j} |<b_i| rho |b_j>|``; the standard basis when ``basis`` is None.

    A basis spanning only a subspace is rejected unless ``allow_subspace``, in
    which case the coherence of the restriction ``B^dag rho B`` is returned.
    """
    rho = np.asarray(rho)
    if basis is None:
        c = rho
    else:
        if basis.dim != rho.shape[0]:
            raise ValueError(f"basis dimension {basis.dim} does not match state dimension {rho.shape[0]}")
        if not basis.is_complete and not allow_subspace:
            raise ValueError("incomplete basis; pass allow_subspace=True for a restricted measure")
        c = basis.coordinates(rho)
    a = np.abs(c)
    return float(a.sum() - np.trace(a))


def logical_coherence(rho: np.ndarray, code: StabilizerCode, ref_qubits: int = 0) -> float:
    """l1 coherence in the logical basis of ``code`` tensored with ``ref_qubits`` bare qubits."""
    basis = logical_incoherent_basis(code)
    if ref_qubits:
        basis = basis.tensor(standard_basis(ref_qubits))
    return l1_coherence(rho, basis, allow_subspace=True)


def negativity(rho: np.ndarray, cut: Iterable[int]) -> float:
    """``(||rho^{T_A}||_1 - 1)/2`` with ``A`` the qubits in ``cut``."""
    rho = np.asarray(rho)
    n = num_qubits(rho.shape[0])
    cut = sorted(set(cut))
    if not cut or len(cut) >= n or cut[0] < 0 or cut[-1] >= n:
        raise ValueError(f"cut {cut} is not a proper bipartition of {n} qubits")
    return (trace_norm(partial_transpose(rho, cut)) - 1) / 2


def encoded_coordinates(rho: np.ndarray, code: StabilizerCode, ref_qubits: int = 0) -> tuple[np.ndarray, float]:
    """``W^dag rho W`` with ``W = V (x) I_ref`` and ``V`` the logical basis, plus the leaked weight ``1 - tr``."""
    w = np.kron(logical_basis(code), np.eye(1 << ref_qubits))
    small = w.conj().T @ np.asarray(rho) @ w
    return small, float(1 - np.trace(small).real)


def code_reference_negativity(rho: np.ndarray, code: StabilizerCode, ref_qubits: int, tol: float = 1e-9) -> float:
    """Negativity across the code-block / reference cut for a state inside the code space.

    ``W = V (x) I`` is a local isometry, so the negativity of ``rho = W sigma W^dag``
    equals that of the small ``sigma``. States leaking out of the code space by
    more than ``tol`` are rejected; use :func:`negativity` for those.
    """
    small, leak = encoded_coordinates(rho, code, ref_qubits)
    if abs(leak) > tol:
        raise ValueError(f"state leaks {leak:.3g} out of the code space")
    return negativity(small, range(code.k, code.k + ref_qubits))


# -- free unitaries -----------------------------------------------------------------


@dataclass(frozen=True)
class FreeUnitaryResult:
    """Outcome of a recognizer. Truthiness is ``is_free``.

    On success ``permutation[j]`` is the image of basis index ``j`` and
    ``phases[j]`` the angle carried by that entry (see the recognizers for
    the sign convention).
    """

    is_free: bool
    permutation: tuple[int, ...] | None = None
    phases: tuple[float, ...] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.is_free


def _check_unitary(u: np.ndarray, tol: float) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise ValueError("matrix is not unitary")
    return u


def _monomial_structure(m: np.ndarray, tol: float) -> tuple[tuple[int, ...], np.ndarray] | str:
    big = np.abs(m) > tol
    if not np.all(big.sum(axis=0) == 1) or not np.all(big.sum(axis=1) == 1):
        return "more than one nonzero entry in some row or column"
    perm = tuple(int(i) for i in np.argmax(big, axis=0))
    entries = m[perm, np.arange(m.shape[1])]
    if np.max(np.abs(np.abs(entries) - 1)) > tol:
        return "nonzero entries are not of unit modulus"
    return perm, entries


def is_free_unitary(u: np.ndarray, basis: IncoherentBasis | None = None, tol: float = RECOGNIZER_TOL) -> FreeUnitaryResult:
    """Is ``u = sum_j e^{-i phi_j} |pi(j)><j|`` in ``basis`` (standard if None)?

    Returns ``permutation = pi`` and ``phases = phi`` on success.
    """
    u = _check_unitary(u, tol)
    m = u if basis is None else basis.coordinates(u)
    found = _monomial_structure(m, tol)
    if isinstance(found, str):
        return FreeUnitaryResult(False, reason=found)
    perm, entries = found
    return FreeUnitaryResult(True, perm, tuple(float(-np.angle(e)) for e in entries))


def is_logical_free_unitary(u: np.ndarray, code: StabilizerCode, tol: float = RECOGNIZER_TOL) -> FreeUnitaryResult:
    """Does ``u`` preserve the code space and act as ``|j> -> e^{i a_j} |b_j>`` on it?

    Returns ``permutation = (b_j)`` and ``phases = (a_j)`` on success.
    """
    u = _check_unitary(u, tol)
    p = code_projector(code)
    disp = np.max(np.abs(u @ p @ u.conj().T - p))
    if disp > tol:
        return FreeUnitaryResult(False, reason=f"code projector displaced by {disp:.3g}")
    b = logical_basis(code)
    found = _monomial_structure(b.conj().T @ u @ b, tol)
    if isinstance(found, str):
        return FreeUnitaryResult(False, reason=found)
    perm, entries = found
    return FreeUnitaryResult(True, perm, tuple(float(np.angle(e)) for e in entries))


def logical_pauli_matrices(code: StabilizerCode) -> dict[str, np.ndarray]:
    """Dense logical Paulis keyed ``"X"``, ``"Z"``, ... (k=1) for quick checks."""
    out = {}
    for xb in itertools.product((0, 1), repeat=code.k):
        for zb in itertools.product((0, 1), repeat=code.k):
            label = "".join("IXZY"[x + 2 * z] for x, z in zip(xb, zb))
            out[label] = code.logical_pauli(xb, zb).to_matrix()
    return out


# -- named measures -------------------------------------------------------------------


@dataclass(frozen=True)
class ResourceMeasure:
    """A named quantifier ``Q``; call it on a density matrix."""

    name: str
    evaluate: Callable[[np.ndarray], float]

    def __call__(self, rho: np.ndarray) -> float:
        return self.evaluate(rho)


def measure_from_name(name: str, code: StabilizerCode | None = None, ref_qubits: int = 0) -> ResourceMeasure:
    """Resolve ``"l1:standard"``, ``"l1:physical"``, ``"l1:logical"`` or ``"negativity:cut=9"``.

    ``l1:physical`` uses :func:`physical_pauli_basis` of ``code`` (tensored with
    the standard basis of ``ref_qubits`` bare qubits); cut indices are
    separated by ``/``.
    """
    kind, _, arg = name.partition(":")
    kind = kind.strip().lower()
    arg = arg.strip()
    if kind == "l1":
        if arg in ("", "standard"):
            return ResourceMeasure(name, lambda rho: l1_coherence(rho))
        if code is None:
            raise ValueError(f"measure {name!r} needs a code")
        if arg == "physical":
            basis = physical_pauli_basis(code)
            if ref_qubits:
                basis = basis.tensor(standard_basis(ref_qubits))
            return ResourceMeasure(name, lambda rho: l1_coherence(rho, basis))
        if arg == "logical":
            return ResourceMeasure(name, lambda rho: logical_coherence(rho, code, ref_qubits))
    if kind == "negativity":
        key, sep, value = arg.partition("=")
        if key != "cut" or not sep:
            raise ValueError(f"negativity measure needs 'cut=...', got {name!r}")
        cut = [int(q) for q in value.split("/")]
        return ResourceMeasure(name, lambda rho: negativity(rho, cut))
    raise KeyError(f"unknown measure {name!r}")


__all__ = [
    "FreeUnitaryResult",
    "IncoherentBasis",
    "ResourceMeasure",
    "code_reference_negativity",
    "encoded_coordinates",
    "is_free_unitary",
    "is_logical_free_unitary",
    "l1_coherence",
    "logical_coherence",
    "logical_incoherent_basis",
    "logical_pauli_matrices",
    "measure_from_name",
    "negativity",
    "physical_pauli_basis",
    "standard_basis",
]
