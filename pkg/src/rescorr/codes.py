"""Stabilizer codes: generators, logical operators, destabilizers and encoded states."""
from __future__ import annotations

import functools
import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rescorr.linalg import MAX_QUBITS, normalize
from rescorr.pauli import PauliString, product

Syndrome = tuple[int, ...]


# -- GF(2) helpers -------------------------------------------------------------


def gf2_rank(rows: np.ndarray) -> int:
    a = np.array(rows, dtype=np.uint8) % 2
    if a.size == 0:
        return 0
    rank = 0
    for col in range(a.shape[1]):
        pivots = np.nonzero(a[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        a[[rank, p]] = a[[p, rank]]
        others = np.nonzero(a[:, col])[0]
        others = others[others != rank]
        a[others] ^= a[rank]
        rank += 1
        if rank == a.shape[0]:
            break
    return rank


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of ``a @ x = b (mod 2)`` with free variables set to 0, or None."""
    a = np.array(a, dtype=np.uint8) % 2
    b = np.array(b, dtype=np.uint8) % 2
    m, ncols = a.shape
    aug = np.concatenate([a, b[:, None]], axis=1)
    pivot_cols = []
    r = 0
    for col in range(ncols):
        rows = np.nonzero(aug[r:, col])[0]
        if rows.size == 0:
            continue
        p = r + rows[0]
        aug[[r, p]] = aug[[p, r]]
        others = np.nonzero(aug[:, col])[0]
        others = others[others != r]
        aug[others] ^= aug[r]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break
    if np.any(aug[r:, -1]):
        return None
    x = np.zeros(ncols, dtype=np.uint8)
    for i, col in enumerate(pivot_cols):
        x[col] = aug[i, -1]
    return x


def _commutation_row(p: PauliString) -> np.ndarray:
    # <v, p> = v_x . p_z + v_z . p_x
    v = p.symplectic()
    return np.concatenate([v[p.n :], v[: p.n]])


# -- code object -------------------------------------------------------------


def syndrome_of(error: PauliString, measured_ops: Sequence[PauliString]) -> Syndrome:
    """Bit ``i`` is 1 iff ``error`` anticommutes with ``measured_ops[i]``."""
    return tuple(0 if error.commutes_with(m) else 1 for m in measured_ops)


@dataclass(frozen=True)
class StabilizerCode:
    """An ``[[n, k, d]]`` stabilizer code.

    ``destabilizers`` is filled in by symplectic Gaussian elimination when not
    supplied. Validation runs on construction; a code object that exists is
    consistent.
    """

    n: int
    generators: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]
    distance: int | None = None
    name: str = ""
    # Pauli types the stored distance holds against ("X" for bit-flip codes)
    distance_paulis: str = "XYZ"
    destabilizers: tuple[PauliString, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "logical_x", tuple(self.logical_x))
        object.__setattr__(self, "logical_z", tuple(self.logical_z))
        self._validate()
        if not self.destabilizers:
            object.__setattr__(self, "destabilizers", tuple(compute_destabilizers(self)))
        else:
            object.__setattr__(self, "destabilizers", tuple(self.destabilizers))
            self._validate_destabilizers()

    @property
    def k(self) -> int:
        return len(self.logical_x)

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @property
    def t(self) -> int:
        """Number of correctable errors, ``floor((d-1)/2)``."""
        if self.distance is None:
            raise ValueError(f"code {self.name!r} has no stored distance")
        return (self.distance - 1) // 2

    def _validate(self) -> None:
        ops = self.generators + self.logical_x + self.logical_z
        for p in ops:
            if p.n != self.n:
                raise ValueError(f"operator {p} has {p.n} qubits, code has {self.n}")
            if not p.is_hermitian:
                raise ValueError(f"operator {p} is not Hermitian")
        if len(self.logical_x) != len(self.logical_z):
            raise ValueError("need as many logical X as logical Z operators")
        if len(self.generators) + self.k != self.n:
            raise ValueError(f"{len(self.generators)} generators and k={self.k} do not add up to n={self.n}")
        for a, b in itertools.combinations(self.generators, 2):
            if not a.commutes_with(b):
                raise ValueError(f"generators {a} and {b} anticommute")
        for g in self.generators:
            for lo in self.logical_x + self.logical_z:
                if not g.commutes_with(lo):
                    raise ValueError(f"logical {lo} anticommutes with generator {g}")
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                if lx.commutes_with(lz) == (i == j):
                    raise ValueError(f"logical pair X{i}, Z{j} has wrong commutation")
        for a, b in itertools.combinations(self.logical_x, 2):
            if not a.commutes_with(b):
                raise ValueError("logical X operators must commute")
        for a, b in itertools.combinations(self.logical_z, 2):
            if not a.commutes_with(b):
                raise ValueError("logical Z operators must commute")
        if ops:
            rank = gf2_rank(np.array([p.symplectic() for p in ops]))
            if rank != len(ops):
                raise ValueError("generators and logical operators are not independent")

    def _validate_destabilizers(self) -> None:
        if len(self.destabilizers) != len(self.generators):
            raise ValueError("need one destabilizer per generator")
        for i, d in enumerate(self.destabilizers):
            if syndrome_of(d, self.generators) != tuple(int(i == j) for j in range(len(self.generators))):
                raise ValueError(f"destabilizer {d} does not flip generator {i} alone")
            for lo in self.logical_x + self.logical_z:
                if not d.commutes_with(lo):
                    raise ValueError(f"destabilizer {d} anticommutes with logical {lo}")

    def within_distance(self, error: PauliString) -> bool:
        """True if ``error`` has weight at most ``t`` and only Pauli types the distance covers."""
        return error.weight <= self.t and all(c in "I" + self.distance_paulis for c in error.body)

    def syndrome(self, error: PauliString) -> Syndrome:
        return syndrome_of(error, self.generators)

    def pure_error(self, s: Sequence[int]) -> PauliString:
        """Destabilizer product ``D(s)`` with syndrome ``s``."""
        if len(s) != len(self.generators):
            raise ValueError(f"syndrome length {len(s)} != {len(self.generators)} generators")
        return product((d for d, bit in zip(self.destabilizers, s) if bit), self.n)

    def logical_pauli(self, xbits: Sequence[int], zbits: Sequence[int]) -> PauliString:
        """``prod X_j^{x_j} Z_j^{z_j}`` over logical qubits (Hermitian representative)."""
        p = product(
            [lx for lx, b in zip(self.logical_x, xbits) if b] + [lz for lz, b in zip(self.logical_z, zbits) if b],
            self.n,
        )
        return p if p.is_hermitian else p.with_phase(p.phase + 1)

    def is_stabilizer_element(self, p: PauliString) -> bool:
        """True if ``p`` is in the stabilizer group up to sign."""
        rows = np.array([g.symplectic() for g in self.generators]).reshape(-1, 2 * self.n)
        if not rows.size:
            return p.x == 0 and p.z == 0
        return gf2_solve(rows.T, p.symplectic()) is not None

    def to_text(self) -> str:
        return code_to_text(self)


def compute_destabilizers(code: StabilizerCode) -> list[PauliString]:
    """Pure errors ``D_i`` flipping generator ``i`` only and commuting with every logical.

    Each ``D_i`` solves a linear system over GF(2); free variables are set to 0,
    which keeps the result deterministic.
    """
    logicals = code.logical_x + code.logical_z
    constraints = [_commutation_row(g) for g in code.generators] + [_commutation_row(lo) for lo in logicals]
    if not constraints:
        return []
    a = np.array(constraints)
    out = []
    for i in range(len(code.generators)):
        rhs = np.zeros(len(constraints), dtype=np.uint8)
        rhs[i] = 1
        sol = gf2_solve(a, rhs)
        if sol is None:
            raise ValueError("singular symplectic system; code definition is corrupted")
        out.append(PauliString.from_symplectic(sol))
    return out


# -- dense realizations ----------------------------------------------------------


def _check_dense(code: StabilizerCode) -> None:
    if code.n > MAX_QUBITS:
        raise ValueError(f"{code.n} qubits exceeds the dense cap of {MAX_QUBITS}")


def project(ops: Sequence[PauliString], mat: np.ndarray, signs: Sequence[int] | None = None) -> np.ndarray:
    """Apply ``prod_i (I + (-1)^{s_i} M_i)/2`` from the left to a vector or matrix."""
    signs = signs or [0] * len(ops)
    out = np.asarray(mat, dtype=complex)
    for m, s in zip(ops, signs):
        moved = m.apply(out) if out.ndim == 1 else m.dot(out)
        out = (out - moved) / 2 if s else (out + moved) / 2
    return out


@functools.lru_cache(maxsize=16)
def _projector(code: StabilizerCode) -> np.ndarray:
    p = project(code.generators, np.eye(1 << code.n, dtype=complex))
    p.setflags(write=False)
    return p


def code_projector(code: StabilizerCode) -> np.ndarray:
    """Projector onto the code space, ``prod_i (I + g_i)/2`` (read-only array)."""
    _check_dense(code)
    return _projector(code)


@functools.lru_cache(maxsize=16)
def _logical_basis(code: StabilizerCode) -> np.ndarray:
    d = 1 << code.n
    ops = code.generators + code.logical_z
    zero = None
    for j in range(d):
        seed = np.zeros(d, dtype=complex)
        seed[j] = 1
        v = project(ops, seed)
        if np.linalg.norm(v) > 1e-8:
            zero = normalize(v)
            break
    assert zero is not None, "stabilizer group has no joint +1 eigenvector"
    cols = []
    for b in range(1 << code.k):
        bits = [(b >> (code.k - 1 - j)) & 1 for j in range(code.k)]
        lx = product([x for x, bit in zip(code.logical_x, bits) if bit], code.n)
        cols.append(lx.apply(zero))
    basis = np.stack(cols, axis=1)
    basis.setflags(write=False)
    return basis


def logical_basis(code: StabilizerCode) -> np.ndarray:
    """Columns ``|b>`` = ``Xbar^b |0bar>``, ``b`` in index order (logical qubit 0 most significant).

    ``|0bar>`` is the normalized image of the first computational basis state
    not annihilated by the projector onto the +1 eigenspace of every generator
    and every logical Z.
    """
    _check_dense(code)
    return _logical_basis(code)


def logical_state(code: StabilizerCode, logical_amplitudes: Sequence[complex], tol: float = 1e-10) -> np.ndarray:
    """Encoded state ``sum_b amp_b |b>``."""
    amps = np.asarray(logical_amplitudes, dtype=complex)
    if amps.shape != (1 << code.k,):
        raise ValueError(f"expected {1 << code.k} amplitudes, got shape {amps.shape}")
    if abs(np.linalg.norm(amps) - 1) > tol:
        raise ValueError("logical amplitudes are not normalized")
    return logical_basis(code) @ amps


# -- built-in codes -------------------------------------------------------------


def build_repetition(n_odd: int) -> StabilizerCode:
    """Bit-flip repetition code: generators ``Z_i Z_{i+1}``, ``Xbar = X^n``, ``Zbar = Z_0``."""
    if n_odd not in (3, 5, 7):
        raise ValueError(f"repetition code length must be 3, 5 or 7, got {n_odd}")
    gens = [PauliString.from_sparse(n_odd, {i: "Z", i + 1: "Z"}) for i in range(n_odd - 1)]
    return StabilizerCode(
        n=n_odd,
        generators=tuple(gens),
        logical_x=(PauliString.from_label("X" * n_odd),),
        logical_z=(PauliString.single(n_odd, 0, "Z"),),
        distance=n_odd,
        name=f"rep{n_odd}",
        distance_paulis="X",
    )


SHOR_GENERATORS = (
    "ZZIIIIIII",
    "IZZIIIIII",
    "IIIZZIIII",
    "IIIIZZIII",
    "IIIIIIZZI",
    "IIIIIIIZZ",
    "XXXXXXIII",
    "IIIXXXXXX",
)


def build_shor9() -> StabilizerCode:
    """Shor's [[9,1,3]] code.

    ``Xbar = ZIIZIIZII`` and ``Zbar = XXXIIIIII`` so that
    ``|0bar> = ((|000> + |111>)/sqrt2)^{(x)3}``.
    """
    return StabilizerCode(
        n=9,
        generators=tuple(PauliString.from_label(g) for g in SHOR_GENERATORS),
        logical_x=(PauliString.from_label("ZIIZIIZII"),),
        logical_z=(PauliString.from_label("XXXIIIIII"),),
        distance=3,
        name="shor9",
    )


# data qubit (r, c) of the 3x3 patch is index 3r + c
SURFACE3_GENERATORS = (
    "XXIXXIIII",
    "IIIIXXIXX",
    "IXXIIIIII",
    "IIIIIIXXI",
    "IZZIZZIII",
    "IIIZZIZZI",
    "ZIIZIIIII",
    "IIIIIZIIZ",
)


def build_surface_d3() -> StabilizerCode:
    """Distance-3 rotated surface code on a 3x3 grid of data qubits.

    Weight-4 X plaquettes on the top-left and bottom-right faces, Z plaquettes on
    the other two, with weight-2 X checks on the top/bottom edges and Z checks
    on the left/right edges. ``Xbar`` is the left column, ``Zbar`` the top row.
    """
    return StabilizerCode(
        n=9,
        generators=tuple(PauliString.from_label(g) for g in SURFACE3_GENERATORS),
        logical_x=(PauliString.from_label("XIIXIIXII"),),
        logical_z=(PauliString.from_label("ZZZIIIIII"),),
        distance=3,
        name="surface3",
    )


def build_trivial(n: int = 1) -> StabilizerCode:
    """No encoding: ``n`` bare qubits with ``Xbar_j = X_j``, ``Zbar_j = Z_j``."""
    return StabilizerCode(
        n=n,
        generators=(),
        logical_x=tuple(PauliString.single(n, j, "X") for j in range(n)),
        logical_z=tuple(PauliString.single(n, j, "Z") for j in range(n)),
        distance=1,
        name=f"bare{n}",
    )


_BUILTIN = {
    "rep3": lambda: build_repetition(3),
    "rep5": lambda: build_repetition(5),
    "rep7": lambda: build_repetition(7),
    "shor9": build_shor9,
    "shor": build_shor9,
    "surface3": build_surface_d3,
    "surface-d3": build_surface_d3,
    "bare1": lambda: build_trivial(1),
}


@functools.lru_cache(maxsize=None)
def get_code(name: str) -> StabilizerCode:
    """Built-in code by name, or a code file path (see :func:`code_from_text`)."""
    key = name.lower()
    if key in _BUILTIN:
        return _BUILTIN[key]()
    path = Path(name)
    if path.is_file():
        return code_from_text(path.read_text())
    raise KeyError(f"unknown code {name!r}; built-ins are {sorted(_BUILTIN)}")


# -- text interchange -------------------------------------------------------------

_TEXT_KEYS = ("stabilizer", "logical_x", "logical_z", "destabilizer")


def code_to_text(code: StabilizerCode) -> str:
    """Line-oriented text block::

        name rep3
        distance 3
        stabilizer ZZI
        stabilizer IZZ
        logical_x XXX
        logical_z ZII
    """
    lines = []
    if code.name:
        lines.append(f"name {code.name}")
    if code.distance is not None:
        lines.append(f"distance {code.distance}")
    if code.distance_paulis != "XYZ":
        lines.append(f"distance_paulis {code.distance_paulis}")
    lines += [f"stabilizer {g.label}" for g in code.generators]
    lines += [f"logical_x {p.label}" for p in code.logical_x]
    lines += [f"logical_z {p.label}" for p in code.logical_z]
    lines += [f"destabilizer {p.label}" for p in code.destabilizers]
    return "\n".join(lines) + "\n"


def code_from_text(text: str) -> StabilizerCode:
    fields: dict[str, list[PauliString]] = {k: [] for k in _TEXT_KEYS}
    name, distance, distance_paulis = "", None, "XYZ"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = line.split(None, 1)
        except ValueError:
            raise ValueError(f"line {lineno}: expected '<key> <value>'") from None
        key = key.lower()
        if key == "name":
            name = value.strip()
        elif key == "distance":
            distance = int(value)
        elif key == "distance_paulis":
            distance_paulis = value.strip().upper()
        elif key in fields:
            fields[key].append(PauliString.from_label(value.strip()))
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    ops = fields["stabilizer"] + fields["logical_x"] + fields["logical_z"]
    if not ops:
        raise ValueError("code text defines no operators")
    return StabilizerCode(
        n=ops[0].n,
        generators=tuple(fields["stabilizer"]),
        logical_x=tuple(fields["logical_x"]),
        logical_z=tuple(fields["logical_z"]),
        distance=distance,
        name=name,
        distance_paulis=distance_paulis,
        destabilizers=tuple(fields["destabilizer"]),
    )
