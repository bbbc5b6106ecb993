"""Numerical checks of the correctability conditions and of coherence invariance on a code space."""
from __future__ import annotations

import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from rescorr.channels import KrausChannel, PauliChannel
from rescorr.codes import StabilizerCode, logical_basis, logical_state
from rescorr.linalg import dm, random_state
from rescorr.measures import IncoherentBasis, l1_coherence, physical_pauli_basis

DEFAULT_TOL = 1e-9
DEFAULT_SEED = 20251016


@dataclass(frozen=True, eq=False)
class CorrectabilityReport:
    """Result of testing ``P E_i^dag E_k P = alpha_ik P`` for every Kraus pair.

    ``pair_residuals[i, k]`` is the spectral norm of
    ``P E_i^dag E_k P - alpha_ik P``.
    """

    alpha: np.ndarray
    hermiticity_residual: float
    proportionality_residual: float
    pair_residuals: np.ndarray
    tol: float
    channel_label: str = ""
    code_name: str = ""

    @property
    def correctable(self) -> bool:
        return self.hermiticity_residual < self.tol and self.proportionality_residual < self.tol

    @property
    def verdict(self) -> str:
        return "correctable" if self.correctable else "not-correctable"

    def to_dict(self) -> dict:
        return {
            "code": self.code_name,
            "channel": self.channel_label,
            "verdict": self.verdict,
            "tol": self.tol,
            "hermiticity_residual": self.hermiticity_residual,
            "proportionality_residual": self.proportionality_residual,
            "alpha": {"real": self.alpha.real.tolist(), "imag": self.alpha.imag.tolist()},
            "pair_residuals": self.pair_residuals.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _code_dim_check(code: StabilizerCode, channel: KrausChannel) -> None:
    if channel.dim != 1 << code.n:
        raise ValueError(f"channel dimension {channel.dim} does not match {code.n}-qubit code")


def kl_gram(code: StabilizerCode, channel: KrausChannel, tol: float = DEFAULT_TOL) -> CorrectabilityReport:
    """Correctability report for ``channel`` on ``code``.

    Free logical unitaries leave ``P`` invariant, so the gauge-covariant condition
    reduces to ``P E_i^dag E_k P = alpha_ik P``. Everything is evaluated in
    code-space coordinates ``V`` (``P = V V^dag``), where the condition reads
    ``V^dag E_i^dag E_k V = alpha_ik I`` and spectral norms are unchanged.
    """
    _code_dim_check(code, channel)
    v = logical_basis(code)
    f = np.stack([e @ v for e in channel.kraus_ops])  # (m, d, 2^k)
    gram = np.einsum("iab,kac->ikbc", f.conj(), f)  # V^dag E_i^dag E_k V
    dk = v.shape[1]
    alpha = np.trace(gram, axis1=2, axis2=3) / dk
    diff = gram - alpha[:, :, None, None] * np.eye(dk)
    pair = np.linalg.norm(diff, ord=2, axis=(2, 3))
    return CorrectabilityReport(
        alpha=alpha,
        hermiticity_residual=float(np.max(np.abs(alpha - alpha.conj().T))),
        proportionality_residual=float(pair.max()),
        pair_residuals=pair,
        tol=tol,
        channel_label=channel.label,
        code_name=code.name,
    )


def merge_proportional(channel: KrausChannel, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators with proportional ones combined.

    ``c1 E rho E^dag c1* + c2 E rho E^dag c2*`` is a single branch with weight
    ``|c1|^2 + |c2|^2``; composed rounds produce many such repeats.
    """
    if isinstance(channel, PauliChannel):
        weights: dict[tuple[int, int], float] = {}
        ops = {}
        for w, p in channel.terms:
            key = (p.x, p.z)
            weights[key] = weights.get(key, 0.0) + w
            ops.setdefault(key, p.unsigned())
        return [np.sqrt(weights[key]) * ops[key].to_matrix() for key in weights if weights[key] > 0]
    merged: list[np.ndarray] = []
    for k in channel.kraus_ops:
        nk = np.linalg.norm(k)
        if nk <= tol:
            continue
        for i, m in enumerate(merged):
            nm = np.linalg.norm(m)
            ip = np.vdot(m, k)
            if abs(abs(ip) - nm * nk) <= tol * max(1.0, nm * nk):
                # k = c m with |c| = nk/nm; combined operator sqrt(nm^2 + nk^2) m/nm
                merged[i] = m * np.sqrt(nm**2 + nk**2) / nm
                break
        else:
            merged.append(k)
    return merged


def code_probe_states(code: StabilizerCode) -> list[np.ndarray]:
    """Logical basis states plus ``(|j>+|k>)/sqrt2`` and ``(|j>+i|k>)/sqrt2`` for all pairs.

    The outer products of these span all operators on the code space.
    """
    b = logical_basis(code)
    states = [b[:, j] for j in range(b.shape[1])]
    for j in range(b.shape[1]):
        for k in range(j + 1, b.shape[1]):
            states.append((b[:, j] + b[:, k]) / np.sqrt(2))
            states.append((b[:, j] + 1j * b[:, k]) / np.sqrt(2))
    return states


@dataclass(frozen=True)
class OrthogonalityResult:
    orthogonal: bool
    max_overlap: float
    worst_pair: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.orthogonal


def verify_orthogonal_branches(channel: KrausChannel, code: StabilizerCode, tol: float = DEFAULT_TOL) -> OrthogonalityResult:
    """Check ``tr[(E_i rho E_i^dag)^dag (E_j rho E_j^dag)] < tol`` for ``i != j`` on code states.

    Proportional Kraus operators are merged first (see :func:`merge_proportional`).
    For pure ``rho = |psi><psi|`` the overlap is ``|<psi|E_i^dag E_j|psi>|^2``.
    """
    _code_dim_check(code, channel)
    ops = merge_proportional(channel)
    worst, worst_pair = 0.0, None
    for psi in code_probe_states(code):
        vs = np.stack([e @ psi for e in ops])
        ov = np.abs(vs.conj() @ vs.T) ** 2
        np.fill_diagonal(ov, 0.0)
        if ov.size and ov.max() > worst:
            worst = float(ov.max())
            i, j = np.unravel_index(np.argmax(ov), ov.shape)
            worst_pair = (int(i), int(j))
    return OrthogonalityResult(worst < tol, worst, worst_pair)


def random_code_states(code: StabilizerCode, n_samples: int, seed: int) -> list[np.ndarray]:
    """Haar-random logical amplitudes, encoded; reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return [logical_state(code, random_state(1 << code.k, rng)) for _ in range(n_samples)]


@dataclass(frozen=True)
class CoherenceInvarianceReport:
    max_deviation: float
    deviations: tuple[float, ...]
    seed: int
    n_samples: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol


def coherence_invariance_check(
    channel: KrausChannel,
    code: StabilizerCode,
    basis: IncoherentBasis | None = None,
    n_samples: int = 100,
    tol: float = DEFAULT_TOL,
    seed: int = DEFAULT_SEED,
    states: Sequence[np.ndarray] | None = None,
) -> CoherenceInvarianceReport:
    """Largest ``|C(rho) - C(E(rho))|`` over sampled pure code states.

    ``basis`` defaults to the physical Pauli basis of ``code``. Explicit
    ``states`` (vectors) replace the random sample.
    """
    _code_dim_check(code, channel)
    basis = physical_pauli_basis(code) if basis is None else basis
    if states is None:
        states = random_code_states(code, n_samples, seed)
    devs = []
    for psi in states:
        rho = dm(psi)
        devs.append(abs(l1_coherence(rho, basis) - l1_coherence(channel.apply(rho), basis)))
    return CoherenceInvarianceReport(max(devs), tuple(devs), seed, len(devs), tol)


def resource_correction_equality(
    rho: np.ndarray,
    error_ch: KrausChannel,
    recovery_ch: KrausChannel | Callable[[np.ndarray], np.ndarray],
    measure: Callable[[np.ndarray], float],
) -> float:
    """``Q(rho) - Q(R(E(rho)))``; zero certifies that the recovery corrects the resource."""
    recover = recovery_ch.apply if isinstance(recovery_ch, KrausChannel) else recovery_ch
    return measure(rho) - measure(recover(error_ch.apply(rho)))


__all__ = [
    "CoherenceInvarianceReport",
    "CorrectabilityReport",
    "OrthogonalityResult",
    "code_probe_states",
    "coherence_invariance_check",
    "kl_gram",
    "merge_proportional",
    "random_code_states",
    "resource_correction_equality",
    "verify_orthogonal_branches",
]
