"""CPTP maps in Kraus form.

:class:`KrausChannel` is the general object. Subclasses keep extra structure
(Pauli weights, commuting measurement observables, tensor-power factors) so
that ``apply`` avoids materializing thousands of dense ``512 x 512`` Kraus
operators; their ``kraus_ops`` are built on demand and always agree with
``apply``.
"""
from __future__ import annotations

import itertools
from collections.abc import Callable, Iterator, Sequence
from typing import NamedTuple

import numpy as np

from rescorr.codes import Syndrome, project
from rescorr.linalg import I2, X, num_qubits
from rescorr.pauli import PauliString

COMPLETENESS_TOL = 1e-9
ZERO_PROB = 1e-12


class KrausChannel:
    """``rho -> sum_i E_i rho E_i^dag`` with weights folded into the ``E_i``."""

    def __init__(self, kraus_ops: Sequence[np.ndarray], label: str = "", tol: float = COMPLETENESS_TOL):
        ops = tuple(np.asarray(k, dtype=complex) for k in kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"Kraus operators must all be {d}x{d}, got {k.shape}")
            k.setflags(write=False)
        self._ops: tuple[np.ndarray, ...] | None = ops
        self._dim = d
        self.label = label
        res = self.completeness_residual()
        if res > tol:
            raise ValueError(f"Kraus operators are not trace preserving (residual {res:.3g})")

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def num_qubits(self) -> int:
        return num_qubits(self._dim)

    @property
    def kraus_ops(self) -> tuple[np.ndarray, ...]:
        if self._ops is None:
            ops = tuple(self._build_ops())
            for k in ops:
                k.setflags(write=False)
            self._ops = ops
        return self._ops

    def _build_ops(self) -> Iterator[np.ndarray]:
        raise NotImplementedError

    @property
    def num_kraus(self) -> int:
        return len(self.kraus_ops)

    def completeness_residual(self) -> float:
        acc = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.max(np.abs(acc - np.eye(self._dim))))

    def _check_input(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self._dim, self._dim):
            raise ValueError(f"channel acts on dimension {self._dim}, got state of shape {rho.shape}")
        return rho

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = self._check_input(rho)
        out = np.zeros_like(rho, dtype=complex)
        for k in self.kraus_ops:
            out += k @ rho @ k.conj().T
        return out

    __call__ = apply

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label!r}, dim={self._dim})"


class PauliChannel(KrausChannel):
    """Mixture of Pauli conjugations ``sum_j w_j P_j rho P_j``."""

    def __init__(self, terms: Sequence[tuple[float, PauliString]], label: str = "", tol: float = COMPLETENESS_TOL):
        terms = tuple((float(w), p) for w, p in terms)
        if not terms:
            raise ValueError("a Pauli channel needs at least one term")
        n = terms[0][1].n
        for w, p in terms:
            if p.n != n:
                raise ValueError("all Pauli terms must act on the same number of qubits")
            if w < -tol:
                raise ValueError(f"negative Pauli weight {w}")
        total = sum(w for w, _ in terms)
        if abs(total - 1) > tol:
            raise ValueError(f"Pauli weights sum to {total}, expected 1")
        self.terms = terms
        self._ops = None
        self._dim = 1 << n
        self.label = label

    def _build_ops(self):
        for w, p in self.terms:
            yield np.sqrt(max(w, 0.0)) * p.to_matrix()

    def completeness_residual(self) -> float:
        return abs(sum(w for w, _ in self.terms) - 1)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = self._check_input(rho)
        out = np.zeros_like(rho, dtype=complex)
        for w, p in self.terms:
            if w:
                out += w * p.conjugate(rho)
        return out


class Branch(NamedTuple):
    probability: float
    state: np.ndarray
    syndrome: Syndrome


class MeasurementChannel(KrausChannel):
    """Non-selective measurement of commuting Hermitian Pauli observables.

    Kraus operators are the joint spectral projectors
    ``prod_i (I + (-1)^{s_i} M_i)/2`` with the zero ones dropped.
    """

    def __init__(self, observables: Sequence[PauliString], label: str = ""):
        obs = tuple(observables)
        if not obs:
            raise ValueError("need at least one observable")
        n = obs[0].n
        for m in obs:
            if m.n != n:
                raise ValueError("observables must act on the same number of qubits")
            if not m.is_hermitian:
                raise ValueError(f"observable {m} is not Hermitian")
        for a, b in itertools.combinations(obs, 2):
            if not a.commutes_with(b):
                raise ValueError(f"observables {a} and {b} do not commute")
        self.observables = obs
        self._ops = None
        self._dim = 1 << n
        self.label = label or "measure[" + ",".join(m.label for m in obs) + "]"

    def projector(self, syndrome: Sequence[int]) -> np.ndarray:
        return project(self.observables, np.eye(self._dim, dtype=complex), syndrome)

    def _build_ops(self):
        for s in itertools.product((0, 1), repeat=len(self.observables)):
            proj = self.projector(s)
            if np.trace(proj).real > 0.5:
                yield proj

    def completeness_residual(self) -> float:
        return 0.0 if self._ops is None else super().completeness_residual()

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = self._check_input(rho).astype(complex)
        # sum_s Pi_s rho Pi_s factorizes into (rho + M rho M)/2 per observable
        for m in self.observables:
            rho = (rho + m.conjugate(rho)) / 2
        return rho

    def branches(self, rho: np.ndarray, prob_tol: float = ZERO_PROB) -> list[Branch]:
        """Selective outcomes ``(p_s, Pi_s rho Pi_s / p_s, s)``, dropping ``p_s < prob_tol``."""
        rho = self._check_input(rho).astype(complex)
        out: list[Branch] = []

        def split(state: np.ndarray, p: float, depth: int, bits: tuple[int, ...]) -> None:
            if depth == len(self.observables):
                state /= p
                out.append(Branch(p, state, bits))
                return
            m = self.observables[depth]
            # outcome probabilities first, so empty outcomes are never built
            tm = m.trace_product(state).real
            for sign, bit in ((1, 0), (-1, 1)):
                pb = (p + sign * tm) / 2
                if pb < prob_tol:
                    continue
                half = m.dot(state)
                if sign < 0:
                    np.negative(half, out=half)
                half += state
                child = m.rdot(half)
                if sign < 0:
                    np.negative(child, out=child)
                child += half
                child /= 4
                split(child, pb, depth + 1, bits + (bit,))

        p0 = np.trace(rho).real
        if p0 >= prob_tol:
            split(rho, p0, 0, ())
        return out


class TensorPowerChannel(KrausChannel):
    """``single`` applied independently to each of ``n`` qubits."""

    def __init__(self, single: KrausChannel, n: int, max_terms: int = 4**9, truncate: float = 1e-14, label: str = ""):
        if single.dim != 2:
            raise ValueError("tensor-power channels take a single-qubit channel")
        if n < 1:
            raise ValueError("n must be positive")
        self.single = single
        self.n = n
        self.max_terms = max_terms
        self.truncate = truncate
        self._ops = None
        self._dim = 1 << n
        self.label = label or f"iid[{single.label}]x{n}"

    def completeness_residual(self) -> float:
        return self.single.completeness_residual()

    def _build_ops(self):
        singles = [k for k in self.single.kraus_ops if np.linalg.norm(k, 2) >= self.truncate]
        count = len(singles) ** self.n
        if count > self.max_terms:
            raise ValueError(f"{count} Kraus terms exceeds the cap of {self.max_terms}")
        for combo in itertools.product(singles, repeat=self.n):
            out = combo[0]
            for k in combo[1:]:
                out = np.kron(out, k)
            yield out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = self._check_input(rho)
        for q in range(self.n):
            rho = apply_local(rho, self.single.kraus_ops, q)
        return rho


class ComposedChannel(KrausChannel):
    """``outer o inner``; Kraus operators ``R_j E_i`` are formed only on request."""

    def __init__(self, outer: KrausChannel, inner: KrausChannel, label: str = ""):
        if outer.dim != inner.dim:
            raise ValueError(f"cannot compose channels of dimension {outer.dim} and {inner.dim}")
        self.outer = outer
        self.inner = inner
        self._ops = None
        self._dim = outer.dim
        self.label = label or f"{outer.label}o{inner.label}"

    def completeness_residual(self) -> float:
        return self.outer.completeness_residual() + self.inner.completeness_residual()

    def _build_ops(self):
        for r in self.outer.kraus_ops:
            for e in self.inner.kraus_ops:
                prod = r @ e
                if np.any(prod):
                    yield prod

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.outer.apply(self.inner.apply(rho))


def apply_local(rho: np.ndarray, ops: Sequence[np.ndarray], qubit: int) -> np.ndarray:
    """Apply a single-qubit channel (Kraus list ``ops``) to ``qubit`` of ``rho``."""
    n = num_qubits(rho.shape[0])
    t = np.asarray(rho).reshape(2**qubit, 2, 2 ** (n - qubit - 1), 2**qubit, 2, 2 ** (n - qubit - 1))
    out = np.zeros_like(t, dtype=complex)
    for k in ops:
        out += np.einsum("ab,ibjkcl,dc->iajkdl", k, t, k.conj(), optimize=True)
    return out.reshape(rho.shape)


def apply(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    return ch.apply(rho)


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """Channel ``outer o inner`` with Kraus list ``{R_j E_i}``.

    Pauli channels compose to a Pauli channel with the full product list (no
    merging of equal products); exact-zero products are the only ones dropped.
    """
    if outer.dim != inner.dim:
        raise ValueError(f"cannot compose channels of dimension {outer.dim} and {inner.dim}")
    label = f"{outer.label}o{inner.label}"
    if isinstance(outer, PauliChannel) and isinstance(inner, PauliChannel):
        terms = [(wr * we, r * e) for wr, r in outer.terms for we, e in inner.terms if wr * we > 0]
        return PauliChannel([(w, p.unsigned()) for w, p in terms], label=label)
    if type(outer) is KrausChannel and type(inner) is KrausChannel:
        ops = [r @ e for r in outer.kraus_ops for e in inner.kraus_ops]
        return KrausChannel([k for k in ops if np.any(k)], label=label)
    return ComposedChannel(outer, inner, label=label)


def power(ch: KrausChannel, rounds: int) -> KrausChannel:
    """``ch`` composed with itself ``rounds`` times."""
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    out = ch
    for _ in range(rounds - 1):
        out = compose(ch, out)
    return out


# -- constructors ----------------------------------------------------------------


def _check_prob(p: float, name: str = "p") -> float:
    if not 0 <= p <= 1:
        raise ValueError(f"{name}={p} is not a probability")
    return float(p)


def identity_channel(n: int) -> PauliChannel:
    return PauliChannel([(1.0, PauliString.identity(n))], label="identity")


def pauli_channel_1q(px: float, py: float, pz: float) -> PauliChannel:
    """``(1-px-py-pz) rho + px X rho X + py Y rho Y + pz Z rho Z``."""
    for name, v in (("px", px), ("py", py), ("pz", pz)):
        _check_prob(v, name)
    p0 = 1 - px - py - pz
    if p0 < -1e-12:
        raise ValueError("Pauli probabilities exceed 1")
    terms = [(max(p0, 0.0), "I"), (px, "X"), (py, "Y"), (pz, "Z")]
    return PauliChannel(
        [(w, PauliString.from_label(c)) for w, c in terms if w > 0],
        label=f"pauli(px={px:g},py={py:g},pz={pz:g})",
    )


def bit_flip(p: float) -> PauliChannel:
    """Single-qubit ``(1-p) rho + p X rho X``."""
    _check_prob(p)
    return pauli_channel_1q(p, 0.0, 0.0)


def dephasing(p: float) -> PauliChannel:
    _check_prob(p)
    return pauli_channel_1q(0.0, 0.0, p)


def depolarizing(p: float) -> PauliChannel:
    """``(1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z)``."""
    _check_prob(p)
    return pauli_channel_1q(p / 3, p / 3, p / 3)


def amplitude_damping(gamma: float) -> KrausChannel:
    _check_prob(gamma, "gamma")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel([k0, k1], label=f"amplitude_damping(gamma={gamma:g})")


def rx(theta: float) -> np.ndarray:
    """``R_x(theta) = cos(theta/2) I - i sin(theta/2) X``."""
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * X


def bit_flip_code_channel(n: int, p: float, prune_zero: bool = True) -> PauliChannel:
    """``(1-p) rho + (p/n) sum_k X_k rho X_k``: at most one bit flip per round.

    With ``prune_zero`` (default) terms of weight exactly 0 are left out, so
    ``p=0`` gives the single Kraus operator ``I``.
    """
    _check_prob(p)
    if n < 1:
        raise ValueError("n must be positive")
    terms = [(1 - p, PauliString.identity(n))] + [(p / n, PauliString.single(n, k, "X")) for k in range(n)]
    if prune_zero:
        terms = [(w, q) for w, q in terms if w > 0]
    return PauliChannel(terms, label=f"bitflip(n={n},p={p:g})")


def random_site_channel(single: KrausChannel, n: int) -> KrausChannel:
    """One uniformly chosen qubit of ``n`` undergoes ``single``.

    ``rho -> (1/n) sum_k single_k(rho)``. For ``single = bit_flip(p)`` this is
    exactly :func:`bit_flip_code_channel`. Pauli inputs give a Pauli channel
    with the identity contributions merged.
    """
    if single.dim != 2:
        raise ValueError("random_site_channel takes a single-qubit channel")
    if isinstance(single, PauliChannel):
        merged: dict[PauliString, float] = {}
        for k in range(n):
            for w, p in single.terms:
                op = PauliString.identity(n) if p.weight == 0 else PauliString.single(n, k, p.body)
                merged[op] = merged.get(op, 0.0) + w / n
        return PauliChannel([(w, op) for op, w in merged.items()], label=f"site[{single.label}]x{n}")
    ops = []
    for k in range(n):
        for kr in single.kraus_ops:
            ops.append(np.kron(np.kron(np.eye(2**k), kr), np.eye(2 ** (n - k - 1))) / np.sqrt(n))
    return KrausChannel(ops, label=f"site[{single.label}]x{n}")


def iid_single_qubit_channel(single: KrausChannel, n: int, max_terms: int = 4**9, truncate: float = 1e-14) -> TensorPowerChannel:
    """Tensor power ``single^{(x) n}``.

    ``apply`` works qubit by qubit. The explicit Kraus list (``m^n`` products,
    single-qubit operators with norm below ``truncate`` dropped first) is only
    built on request and refuses to exceed ``max_terms``.
    """
    if n > 10:
        raise ValueError("at most 10 qubits")
    return TensorPowerChannel(single, n, max_terms=max_terms, truncate=truncate)


def rx_mixture_channel(p: Sequence[float], theta: Sequence[float]) -> KrausChannel:
    """``p_0 rho + sum_k p_k R_x^{(k)}(theta_k) rho R_x^{(k)}(theta_k)^dag``.

    ``len(theta)`` fixes the qubit count; ``p`` has one extra leading entry for
    the no-error term.
    """
    p = np.asarray(p, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n = len(theta)
    if p.shape != (n + 1,):
        raise ValueError(f"need {n + 1} probabilities for {n} angles, got {p.shape}")
    if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("probabilities must lie on the simplex")
    p = np.clip(p, 0, None)
    d = 1 << n
    ops = [np.sqrt(p[0]) * np.eye(d, dtype=complex)]
    for k in range(n):
        ops.append(np.sqrt(p[k + 1]) * np.kron(np.kron(np.eye(2**k), rx(theta[k])), np.eye(2 ** (n - k - 1))))
    return KrausChannel([o for o in ops if np.any(o)], label="rx_mixture")


def measurement_channel(observables: Sequence[PauliString]) -> MeasurementChannel:
    return MeasurementChannel(observables)


# -- name + parameter specs ---------------------------------------------------------

_SINGLE: dict[str, Callable[..., KrausChannel]] = {
    "pauli": lambda px=0.0, py=0.0, pz=0.0: pauli_channel_1q(px, py, pz),
    "bitflip": lambda p: bit_flip(p),
    "dephasing": lambda p: dephasing(p),
    "depolarizing": lambda p: depolarizing(p),
    "amplitude_damping": lambda gamma: amplitude_damping(gamma),
}


def _parse_params(text: str) -> dict[str, object]:
    params: dict[str, object] = {}
    if not text:
        return params
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"bad channel parameter {item!r}; expected key=value")
        vals = [float(v) for v in value.split("/")]
        params[key.strip()] = vals if len(vals) > 1 else vals[0]
    return params


def single_qubit_from_spec(spec: str) -> KrausChannel:
    """``"pauli:px=0.04,py=0.03,pz=0.03"``, ``"amplitude_damping:gamma=0.1"``, ..."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _SINGLE:
        raise KeyError(f"unknown single-qubit channel {name!r}; known: {sorted(_SINGLE)}")
    return _SINGLE[name](**_parse_params(rest))


def channel_from_spec(spec: str, n: int) -> KrausChannel:
    """Build an ``n``-qubit channel from ``name[:k=v,...]``.

    * ``identity``
    * ``bitflip:p=0.2`` -- at most one bit flip per round, weight ``p/n`` each
    * ``site-<single>:...`` -- one random qubit suffers ``<single>``
    * ``iid-<single>:...`` -- every qubit suffers ``<single>`` independently
    * ``rx:p=p0/p1/.../pn,theta=t1/.../tn``

    ``<single>`` is one of ``pauli``, ``bitflip``, ``dephasing``,
    ``depolarizing``, ``amplitude_damping``.
    """
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == "identity":
        return identity_channel(n)
    if name == "bitflip":
        return bit_flip_code_channel(n, **_parse_params(rest))
    if name == "rx":
        params = _parse_params(rest)
        theta = np.atleast_1d(params["theta"])
        if len(theta) != n:
            raise ValueError(f"rx channel needs {n} angles")
        return rx_mixture_channel(np.atleast_1d(params["p"]), theta)
    if name.startswith("site-"):
        return random_site_channel(single_qubit_from_spec(name[5:] + ":" + rest), n)
    if name.startswith("iid-"):
        return iid_single_qubit_channel(single_qubit_from_spec(name[4:] + ":" + rest), n)
    raise KeyError(f"unknown channel {name!r}")


__all__ = [
    "Branch",
    "ComposedChannel",
    "KrausChannel",
    "MeasurementChannel",
    "PauliChannel",
    "TensorPowerChannel",
    "amplitude_damping",
    "apply",
    "apply_local",
    "bit_flip",
    "bit_flip_code_channel",
    "channel_from_spec",
    "compose",
    "dephasing",
    "depolarizing",
    "identity_channel",
    "iid_single_qubit_channel",
    "measurement_channel",
    "pauli_channel_1q",
    "power",
    "random_site_channel",
    "rx",
    "rx_mixture_channel",
    "single_qubit_from_spec",
]
