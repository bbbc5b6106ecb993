"""Syndrome decoding: minimum-weight lookup tables, gauge-relaxed decoding, recovery and Pauli frames.

For resource correction any correction consistent with the syndrome is good
enough: it differs from the true error by a stabilizer times a logical Pauli,
and logical Paulis preserve both logical l1 coherence and entanglement with
an outside reference. :func:`gauge_decode` exploits this by returning the
destabilizer product for the syndrome, with no search at all.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from rescorr.channels import MeasurementChannel
from rescorr.codes import StabilizerCode, Syndrome, code_projector
from rescorr.linalg import num_qubits
from rescorr.pauli import PauliString, paulis_of_weight

MIN_WEIGHT = "min-weight"
GAUGE = "gauge"
POLICIES = (MIN_WEIGHT, GAUGE)


@dataclass(frozen=True, eq=False)
class DecoderTable:
    """Map from syndrome bits to a correction Pauli."""

    code: StabilizerCode
    entries: Mapping[Syndrome, PauliString]
    policy: str
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown decoder policy {self.policy!r}")
        for s, c in self.entries.items():
            if self.code.syndrome(c) != tuple(s):
                raise ValueError(f"correction {c} does not reproduce syndrome {s}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, s) -> bool:
        return tuple(s) in self.entries

    def lookup(self, s: Syndrome) -> PauliString:
        try:
            return self.entries[tuple(s)]
        except KeyError:
            bits = "".join(map(str, s))
            raise KeyError(f"no {self.policy} table entry for syndrome {bits}") from None

    def to_text(self) -> str:
        """One ``<syndrome bits> -> <Pauli label>`` line per entry, sorted by syndrome."""
        lines = [f"# code={self.code.name} policy={self.policy}"]
        lines += [f"# {k}={v}" for k, v in self.metadata.items()]
        for s in sorted(self.entries):
            lines.append(f"{''.join(map(str, s))} -> {self.entries[s].label}")
        return "\n".join(lines) + "\n"


def build_min_weight_table(code: StabilizerCode, max_weight: int | None = None) -> DecoderTable:
    """Lowest-weight Pauli for every syndrome reachable with at most ``max_weight`` errors.

    Candidates are scanned by weight, then by label (``I < X < Y < Z``); the first
    hit for each syndrome is kept.
    """
    t = code.t
    max_weight = t if max_weight is None else max_weight
    if not 0 <= max_weight <= t:
        raise ValueError(f"max_weight {max_weight} outside 0..{t} for a distance-{code.distance} code")
    entries: dict[Syndrome, PauliString] = {}
    for w in range(max_weight + 1):
        for p in paulis_of_weight(code.n, w):
            entries.setdefault(code.syndrome(p), p)
    return DecoderTable(code, entries, MIN_WEIGHT, {"max_weight": str(max_weight), "tie_break": "lexicographic"})


def gauge_decode(code: StabilizerCode, s: Syndrome) -> PauliString:
    """Any Pauli with syndrome ``s``: the destabilizer product ``D(s)``.

    Not minimum weight. The product with the true error is a stabilizer times a
    logical Pauli, which is a free operation for logical coherence and for
    entanglement across the code block.
    """
    return code.pure_error(s)


def build_gauge_table(code: StabilizerCode) -> DecoderTable:
    entries = {s: gauge_decode(code, s) for s in itertools.product((0, 1), repeat=code.num_generators)}
    return DecoderTable(code, entries, GAUGE, {"construction": "destabilizer products"})


def build_table(code: StabilizerCode, policy: str) -> DecoderTable:
    if policy == MIN_WEIGHT:
        return build_min_weight_table(code)
    if policy == GAUGE:
        return build_gauge_table(code)
    raise ValueError(f"unknown decoder policy {policy!r}; choose from {POLICIES}")


def _ref_qubits(rho: np.ndarray, code: StabilizerCode) -> int:
    extra = num_qubits(np.asarray(rho).shape[0]) - code.n
    if extra < 0:
        raise ValueError(f"state has fewer qubits than the {code.n}-qubit code")
    return extra


def syndrome_measurement(code: StabilizerCode, ref_qubits: int = 0) -> MeasurementChannel:
    """Measurement of every generator, acting trivially on ``ref_qubits`` trailing qubits."""
    return MeasurementChannel([g.pad(ref_qubits) for g in code.generators])


def recover(rho: np.ndarray, code: StabilizerCode, table: DecoderTable) -> np.ndarray:
    """Measure all generators, apply the table correction in each branch, recombine.

    The code block is the first ``code.n`` qubits; any further qubits are bare
    references the recovery never touches.
    """
    extra = _ref_qubits(rho, code)
    out = np.zeros_like(rho, dtype=complex)
    for branch in syndrome_measurement(code, extra).branches(rho):
        correction = table.lookup(branch.syndrome).pad(extra)
        out += branch.probability * correction.conjugate(branch.state)
    return out


@dataclass(frozen=True)
class GaugeCertificate:
    """A logical Pauli ``L`` (class ``label``) with ``L rho_in L^dag = rho_out``."""

    label: str
    operator: PauliString
    residual: float


def logical_classes(code: StabilizerCode) -> list[tuple[str, PauliString]]:
    """All ``4^k`` logical Pauli classes as (label, Hermitian representative), identity first."""
    out = []
    for xb in itertools.product((0, 1), repeat=code.k):
        for zb in itertools.product((0, 1), repeat=code.k):
            label = "".join("IXZY"[x + 2 * z] for x, z in zip(xb, zb))
            out.append((label, code.logical_pauli(xb, zb)))
    return sorted(out, key=lambda item: item[0])


def certify_gauge_equivalence(
    rho_in: np.ndarray, rho_out: np.ndarray, code: StabilizerCode, tol: float = 1e-9
) -> GaugeCertificate | None:
    """Find a logical Pauli relating two code states, or None.

    Both states must lie in the code space (tensored with any trailing
    reference qubits) up to ``tol``; otherwise there is nothing to certify.
    """
    extra = _ref_qubits(rho_in, code)
    if np.asarray(rho_out).shape != np.asarray(rho_in).shape:
        return None
    p = np.kron(code_projector(code), np.eye(1 << extra))
    for rho in (rho_in, rho_out):
        if abs(1 - np.einsum("ij,ji->", p, rho).real) > tol:
            return None
    for label, op in logical_classes(code):
        res = float(np.max(np.abs(op.pad(extra).conjugate(rho_in) - rho_out)))
        if res < tol:
            return GaugeCertificate(label, op, res)
    return None


@dataclass(frozen=True)
class PauliFrame:
    """Classical record of corrections that have been decided but not applied."""

    frame: PauliString

    @classmethod
    def empty(cls, n: int) -> PauliFrame:
        return cls(PauliString.identity(n))

    def update(self, correction: PauliString) -> PauliFrame:
        """Frame after ``correction`` is scheduled later than everything already recorded."""
        return PauliFrame(correction * self.frame)

    def syndrome_offset(self, code: StabilizerCode) -> Syndrome:
        """Syndrome bits the pending frame would flip; XOR them out of fresh measurements."""
        return code.syndrome(self.frame)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        extra = num_qubits(np.asarray(rho).shape[0]) - self.frame.n
        return self.frame.pad(extra).conjugate(rho)


__all__ = [
    "DecoderTable",
    "GAUGE",
    "GaugeCertificate",
    "MIN_WEIGHT",
    "PauliFrame",
    "build_gauge_table",
    "build_min_weight_table",
    "build_table",
    "certify_gauge_equivalence",
    "gauge_decode",
    "logical_classes",
    "recover",
    "syndrome_measurement",
]
