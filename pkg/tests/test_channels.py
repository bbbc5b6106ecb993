import itertools

import numpy as np
import pytest

from rescorr.channels import (
    ComposedChannel,
    KrausChannel,
    MeasurementChannel,
    PauliChannel,
    TensorPowerChannel,
    amplitude_damping,
    apply_local,
    bit_flip,
    bit_flip_code_channel,
    channel_from_spec,
    compose,
    dephasing,
    depolarizing,
    identity_channel,
    iid_single_qubit_channel,
    pauli_channel_1q,
    power,
    random_site_channel,
    rx,
    rx_mixture_channel,
    single_qubit_from_spec,
)
from rescorr.linalg import I2, X, Y, Z, random_density_matrix
from rescorr.pauli import PauliString


def kraus_sum(ops, rho):
    return sum(k @ rho @ k.conj().T for k in ops)


def test_single_qubit_channels_trace_preserving():
    for ch in (bit_flip(0.2), dephasing(0.3), depolarizing(0.1), amplitude_damping(0.4), pauli_channel_1q(0.1, 0.2, 0.3)):
        assert ch.completeness_residual() < 1e-12
        rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
        out = ch.apply(rho)
        assert np.trace(out).real == pytest.approx(1)
        assert np.allclose(out, kraus_sum(ch.kraus_ops, rho))


def test_depolarizing_shrinks_bloch_vector():
    rho = np.array([[1, 0], [0, 0]], dtype=complex)
    out = depolarizing(0.3).apply(rho)
    # p/3 each for X, Y, Z: z component scales by 1 - 4p/3
    assert out[0, 0].real - out[1, 1].real == pytest.approx(1 - 4 * 0.3 / 3)


def test_amplitude_damping_values():
    out = amplitude_damping(0.25).apply(np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex))
    assert np.allclose(out, [[0.625, 0.5 * np.sqrt(0.75)], [0.5 * np.sqrt(0.75), 0.375]])


def test_kraus_channel_validation():
    with pytest.raises(ValueError, match="trace preserving"):
        KrausChannel([X, Z])
    with pytest.raises(ValueError):
        KrausChannel([np.eye(2), np.eye(4)])
    with pytest.raises(ValueError):
        KrausChannel([])
    with pytest.raises(ValueError):
        bit_flip(0.2).apply(np.eye(4) / 4)
    with pytest.raises(ValueError):
        bit_flip(1.5)


def test_pauli_channel_validation():
    with pytest.raises(ValueError, match="sum"):
        PauliChannel([(0.5, PauliString.from_label("X"))])
    with pytest.raises(ValueError):
        PauliChannel([(1.2, PauliString.from_label("X")), (-0.2, PauliString.from_label("Z"))])


def test_bit_flip_code_channel(rng):
    ch = bit_flip_code_channel(3, 0.3)
    rho = random_density_matrix(8, rng)
    xs = [np.kron(np.kron(a, b), c) for a, b, c in ((X, I2, I2), (I2, X, I2), (I2, I2, X))]
    expected = 0.7 * rho + 0.1 * sum(x @ rho @ x for x in xs)
    assert np.allclose(ch.apply(rho), expected)
    assert np.allclose(ch.apply(rho), kraus_sum(ch.kraus_ops, rho))
    assert bit_flip_code_channel(3, 0.0).num_kraus == 1
    assert bit_flip_code_channel(3, 0.0, prune_zero=False).num_kraus == 4
    assert bit_flip_code_channel(3, 1.0, prune_zero=False).num_kraus == 4


def test_measurement_channel_matches_projectors(rng):
    obs = [PauliString.from_label(s) for s in ("ZZI", "IZZ")]
    ch = MeasurementChannel(obs)
    rho = random_density_matrix(8, rng)
    d = 8
    projs = []
    for s in itertools.product((0, 1), repeat=2):
        p = np.eye(d)
        for m, b in zip(obs, s):
            p = p @ (np.eye(d) + (-1) ** b * m.to_matrix()) / 2
        projs.append(p)
    assert np.allclose(ch.apply(rho), kraus_sum(projs, rho))
    assert ch.num_kraus == 4
    assert ch.completeness_residual() < 1e-12
    branches = ch.branches(rho)
    assert sum(b.probability for b in branches) == pytest.approx(1)
    for b, proj in zip(branches, projs):
        assert np.allclose(b.probability * b.state, proj @ rho @ proj)
    assert np.allclose(sum(b.probability * b.state for b in branches), ch.apply(rho))


def test_measurement_channel_drops_empty_outcomes():
    # ZZI, IZZ, ZIZ are dependent: only 4 of 8 sign patterns occur
    ch = MeasurementChannel([PauliString.from_label(s) for s in ("ZZI", "IZZ", "ZIZ")])
    assert ch.num_kraus == 4
    rho = np.zeros((8, 8), dtype=complex)
    rho[2, 2] = 1
    (b,) = ch.branches(rho)
    assert b.syndrome == (1, 1, 0)
    assert b.probability == pytest.approx(1)


def test_measurement_channel_rejects_bad_observables():
    with pytest.raises(ValueError, match="commute"):
        MeasurementChannel([PauliString.from_label("XI"), PauliString.from_label("ZI")])
    with pytest.raises(ValueError, match="Hermitian"):
        MeasurementChannel([PauliString.from_label("iZ")])


def test_apply_local(rng):
    rho = random_density_matrix(8, rng)
    ops = amplitude_damping(0.3).kraus_ops
    full = [np.kron(np.kron(np.eye(2), k), np.eye(2)) for k in ops]
    assert np.allclose(apply_local(rho, ops, 1), kraus_sum(full, rho))


def test_tensor_power_matches_explicit(rng):
    single = amplitude_damping(0.2)
    ch = iid_single_qubit_channel(single, 3)
    rho = random_density_matrix(8, rng)
    assert ch.num_kraus == 8
    assert np.allclose(ch.apply(rho), kraus_sum(ch.kraus_ops, rho))
    ops = [np.kron(np.kron(a, b), c) for a, b, c in itertools.product(single.kraus_ops, repeat=3)]
    assert np.allclose(ch.apply(rho), kraus_sum(ops, rho))


def test_tensor_power_cap():
    ch = TensorPowerChannel(depolarizing(0.1), 4, max_terms=100)
    with pytest.raises(ValueError, match="cap"):
        ch.kraus_ops
    ch.apply(np.eye(16) / 16)
    # identity-only single channel truncates to one term
    assert TensorPowerChannel(bit_flip(0.0), 3).num_kraus == 1


def test_random_site_channel(rng):
    rho = random_density_matrix(4, rng)
    site = random_site_channel(amplitude_damping(0.3), 2)
    ops0 = [np.kron(k, np.eye(2)) for k in amplitude_damping(0.3).kraus_ops]
    ops1 = [np.kron(np.eye(2), k) for k in amplitude_damping(0.3).kraus_ops]
    assert np.allclose(site.apply(rho), 0.5 * kraus_sum(ops0, rho) + 0.5 * kraus_sum(ops1, rho))
    pauli_site = random_site_channel(bit_flip(0.3), 3)
    assert isinstance(pauli_site, PauliChannel)
    r8 = random_density_matrix(8, rng)
    assert np.allclose(pauli_site.apply(r8), bit_flip_code_channel(3, 0.3).apply(r8))


def test_compose_orders_and_counts(rng):
    a = bit_flip_code_channel(5, 0.3)
    two = compose(a, a)
    assert isinstance(two, PauliChannel)
    assert two.num_kraus == 36
    rho = random_density_matrix(32, rng)
    assert np.allclose(two.apply(rho), a.apply(a.apply(rho)))
    assert np.allclose(power(a, 2).apply(rho), two.apply(rho))

    ad = amplitude_damping(0.3)
    u = KrausChannel([rx(0.7)])
    explicit = compose(u, ad)
    r2 = random_density_matrix(2, rng)
    assert np.allclose(explicit.apply(r2), u.apply(ad.apply(r2)))
    assert np.allclose(explicit.apply(r2), kraus_sum(explicit.kraus_ops, r2))
    lazy = compose(MeasurementChannel([PauliString.from_label("Z")]), ad)
    assert isinstance(lazy, ComposedChannel)
    assert np.allclose(lazy.apply(r2), kraus_sum(lazy.kraus_ops, r2))
    with pytest.raises(ValueError):
        compose(a, ad)
    with pytest.raises(ValueError):
        power(a, 0)


def test_rx_mixture_channel(rng):
    p = [0.5, 0.1, 0.1, 0.1, 0.1, 0.1]
    theta = [0.4, 0.9, 1.3, 2.0, 2.7]
    ch = rx_mixture_channel(p, theta)
    assert ch.completeness_residual() < 1e-12
    rho = random_density_matrix(32, rng)
    direct = p[0] * rho
    for k, t in enumerate(theta):
        r = np.kron(np.kron(np.eye(2**k), rx(t)), np.eye(2 ** (4 - k)))
        direct = direct + p[k + 1] * r @ rho @ r.conj().T
    assert np.allclose(ch.apply(rho), direct)
    assert np.allclose(rx(np.pi), -1j * X)
    with pytest.raises(ValueError):
        rx_mixture_channel([0.5, 0.5], theta)
    with pytest.raises(ValueError):
        rx_mixture_channel([0.6, 0.1, 0.1, 0.1, 0.1, 0.1], theta)


def test_identity_channel():
    ch = identity_channel(2)
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    assert np.allclose(ch.apply(rho), rho)


def test_specs():
    single = single_qubit_from_spec("pauli:px=0.04,py=0.03,pz=0.03")
    assert [round(w, 12) for w, _ in single.terms] == [0.9, 0.04, 0.03, 0.03]
    assert [p.body for _, p in single.terms] == ["I", "X", "Y", "Z"]
    ch = channel_from_spec("bitflip:p=0.2", 3)
    assert isinstance(ch, PauliChannel) and ch.num_kraus == 4
    assert isinstance(channel_from_spec("iid-depolarizing:p=0.1", 3), TensorPowerChannel)
    assert channel_from_spec("site-amplitude_damping:gamma=0.1", 2).num_kraus == 4
    rxc = channel_from_spec("rx:p=0.5/0.25/0.25,theta=0.3/0.6", 2)
    assert rxc.num_kraus == 3
    assert channel_from_spec("identity", 2).num_kraus == 1
    with pytest.raises(KeyError):
        channel_from_spec("nonsense", 2)
    with pytest.raises(KeyError):
        single_qubit_from_spec("twirl:p=0.1")
    with pytest.raises(ValueError):
        channel_from_spec("bitflip:0.2", 2)
    with pytest.raises(ValueError):
        channel_from_spec("rx:p=0.5/0.5,theta=0.3", 2)


def test_pauli_channel_fast_apply_matches_kraus(rng):
    ch = pauli_channel_1q(0.1, 0.2, 0.3)
    rho = random_density_matrix(2, rng)
    expected = 0.4 * rho + 0.1 * X @ rho @ X + 0.2 * Y @ rho @ Y + 0.3 * Z @ rho @ Z
    assert np.allclose(ch.apply(rho), expected)
