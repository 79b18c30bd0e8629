import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarqfi.channels import (
    AnisotropicLindblad,
    ChannelPipeline,
    ConvexRotations,
    DiattenuatorSpec,
    IsotropicLindblad,
    RetarderSpec,
)
from polarqfi.errors import SingularityError
from polarqfi.estimation import (
    POVM,
    QFIResult,
    StateWithDerivative,
    cfi_from_swd,
    cfi_povm,
    cfi_sum,
    derivative_through_pipeline,
    finite_difference_derivative,
    pauli_povms,
    qcrb,
    qfi_mixed,
    qfi_pure,
    sld,
    unitary_family,
)
from polarqfi.hilbert import (
    FockBasis,
    RotationAxis,
    TwoModeState,
    blocks_to_packed,
    make_coherent,
    make_fock,
    make_noon,
)
from polarqfi.oracles import variance_qfi

FIXTURES = json.loads((Path(__file__).parent / "fixtures" / "regression.json").read_text())
THETA = math.pi / 10
AXIS = RotationAxis(math.pi / 5, 0.0)
Z_AXIS = RotationAxis(0.0, 0.0)
X_AXIS = RotationAxis(math.pi / 2, 0.0)

NOISE_MATRIX = {
    "none": (None, None),
    "diattenuator": (DiattenuatorSpec(0.9, 0.9), None),
    "tilted-diattenuator": (DiattenuatorSpec(0.7, 0.95, 0.4, -0.6), None),
    "isotropic": (None, IsotropicLindblad(0.03)),
    "anisotropic": (None, AnisotropicLindblad(0.15)),
    "convex": (None, ConvexRotations()),
    "all-isotropic": (DiattenuatorSpec(0.9, 0.9), IsotropicLindblad(0.003)),
    "all-convex": (DiattenuatorSpec(0.9, 0.9), ConvexRotations(-math.pi, math.pi, 20, math.pi / 8)),
}


def _pipe(order, dia=None, dep=None, axis=AXIS):
    return ChannelPipeline.build(order, RetarderSpec(THETA, axis), dia, dep)


def _probes(basis):
    return {"noon3": make_noon(basis, 3), "coherent": make_coherent(basis, 1.2), "fock21": make_fock(basis, 2, 1)}


# --------------------------------------------------------------- derivative


def test_derivative_vanishes_for_s3_eigenstate():
    b = FockBasis(3)
    swd = derivative_through_pipeline(make_fock(b, 1, 0), _pipe("forward", axis=Z_AXIS), 0.77)
    assert np.max(np.abs(swd.drho_packed())) == 0


def test_derivative_noon2_matches_finite_difference():
    b = FockBasis(4)
    pipe = _pipe("forward", axis=Z_AXIS)
    swd = derivative_through_pipeline(make_noon(b, 2), pipe, THETA)
    fd = finite_difference_derivative(make_noon(b, 2), pipe, THETA, 1e-5)
    assert np.max(np.abs(swd.drho_packed() - fd)) <= 1e-8


def test_derivative_forward_isotropic_matches_finite_difference():
    b = FockBasis(4)
    pipe = _pipe("forward", None, IsotropicLindblad(0.003))
    swd = derivative_through_pipeline(make_noon(b, 2), pipe, THETA)
    fd = finite_difference_derivative(make_noon(b, 2), pipe, THETA, 1e-5)
    assert np.max(np.abs(swd.drho_packed() - fd)) <= 1e-8


@pytest.mark.parametrize("noise", list(NOISE_MATRIX))
@pytest.mark.parametrize("order", ["forward", "reverse"])
def test_derivative_matrix_matches_finite_difference(noise, order):
    b = FockBasis(6)
    pipe = _pipe(order, *NOISE_MATRIX[noise])
    for probe in _probes(b).values():
        swd = derivative_through_pipeline(probe, pipe, THETA)
        swd.check()
        fd = finite_difference_derivative(probe, pipe, THETA, 1e-5)
        assert np.max(np.abs(swd.drho_packed() - fd)) <= 1e-7


def test_swd_check_rejects_traceful_derivative():
    b = FockBasis(3)
    swd = StateWithDerivative(make_fock(b, 1, 0), {(1, 1): np.eye(2)})
    with pytest.raises(ValueError):
        swd.check()


# --------------------------------------------------------------- pure QFI


@pytest.mark.parametrize("N", range(1, 7))
def test_noon_qfi_is_n_squared(N):
    b = FockBasis(8)
    probe = make_noon(b, N)
    psi, dpsi = unitary_family(probe, _pipe("forward", axis=Z_AXIS), THETA)
    res = qfi_pure(psi, dpsi)
    assert res.method == "pure"
    assert res.value == pytest.approx(N**2, rel=1e-12)
    assert res.value == pytest.approx(variance_qfi(probe, Z_AXIS), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5 * np.exp(0.3j)])
def test_coherent_qfi_is_mean_photon_number(alpha):
    b = FockBasis(20)
    probe = make_coherent(b, alpha)
    psi, dpsi = unitary_family(probe, _pipe("forward", axis=X_AXIS), THETA)
    value = qfi_pure(psi, dpsi).value
    assert value == pytest.approx(abs(alpha) ** 2, abs=1e-6)
    assert value == pytest.approx(variance_qfi(probe, X_AXIS), rel=1e-10)


def test_qfi_pure_zero_derivative():
    psi = np.array([1.0, 0.0])
    assert qfi_pure(psi, np.zeros(2)).value == 0


def test_qfi_pure_rejects_unnormalized():
    with pytest.raises(ValueError):
        qfi_pure(np.array([1.0, 1.0]), np.zeros(2))


def test_misaligned_noon_matches_variance_oracle():
    b = FockBasis(8)
    for N in (4, 5, 6):
        probe = make_noon(b, N)
        psi, dpsi = unitary_family(probe, _pipe("forward"), THETA)
        expected = N**2 * math.cos(math.pi / 5) ** 2 + N * math.sin(math.pi / 5) ** 2
        assert qfi_pure(psi, dpsi).value == pytest.approx(expected, rel=1e-10)
        assert variance_qfi(probe, AXIS) == pytest.approx(expected, rel=1e-10)


# -------------------------------------------------------------- mixed QFI


@pytest.mark.parametrize("N", [1, 3, 5])
def test_mixed_matches_pure_without_noise(N):
    b = FockBasis(8)
    probe = make_noon(b, N)
    pipe = _pipe("forward")
    pure = qfi_pure(*unitary_family(probe, pipe, THETA)).value
    mixed = qfi_mixed(derivative_through_pipeline(probe, pipe, THETA))
    assert abs(mixed.value - pure) / pure <= 1e-7
    assert mixed.method == "mixed-eigen"


def test_mixed_qfi_of_fixed_point_is_zero():
    b = FockBasis(3)
    rho = TwoModeState(b, {(1, 1): np.eye(2, dtype=complex) / 2})
    res = qfi_mixed(derivative_through_pipeline(rho, _pipe("forward"), 0.4))
    assert abs(res.value) <= 1e-15
    assert res.spectrum_cut == 0


def test_mixed_qfi_regression_noon2_isotropic():
    b = FockBasis(12)
    swd = derivative_through_pipeline(make_noon(b, 2), _pipe("forward", None, IsotropicLindblad(0.003)), THETA)
    res = qfi_mixed(swd)
    assert res.value == pytest.approx(FIXTURES["qfi_noon2_isotropic"], rel=1e-7)
    assert res.spectrum_cut == 0


def test_spectrum_cut_reports_discarded_terms():
    # a state with a derivative leaking into the kernel of rho
    b = FockBasis(3)
    rho = TwoModeState(b, {(1, 1): np.diag([1.0, 0.0]).astype(complex)})
    drho = {(1, 1): np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)}
    res = qfi_mixed(StateWithDerivative(rho, drho))
    # kept pairs: (0,0) has zero element, (0,1) and (1,0) carry 0.5 each over lam=1
    assert res.value == pytest.approx(2 * 2 * 0.25, abs=1e-15)
    drho_kernel = {(1, 1): np.array([[0.0, 0.0], [0.0, 1e-3]], dtype=complex)}
    assert qfi_mixed(StateWithDerivative(rho, drho_kernel)).spectrum_cut == 1


def test_mixed_qfi_rejects_negative_state():
    b = FockBasis(3)
    rho = TwoModeState(b, {(1, 1): np.diag([1.1, -0.1]).astype(complex)})
    with pytest.raises(ValueError):
        qfi_mixed(StateWithDerivative(rho, {(1, 1): np.zeros((2, 2), dtype=complex)}))


# -------------------------------------------------------------------- SLD


def test_sld_zero_derivative():
    b = FockBasis(3)
    rho = TwoModeState(b, {(1, 1): np.eye(2, dtype=complex) / 2})
    L = sld(StateWithDerivative(rho, {(1, 1): np.zeros((2, 2), dtype=complex)}))
    assert np.max(np.abs(L.matrix)) == 0


def test_sld_pure_state_is_twice_derivative():
    b = FockBasis(5)
    swd = derivative_through_pipeline(make_noon(b, 3), _pipe("forward"), THETA)
    L = sld(swd).matrix
    rho, drho = swd.rho.to_dense(), swd.drho_dense()
    assert np.max(np.abs((L @ rho + rho @ L) / 2 - drho)) <= 1e-9
    # on a pure state 2 drho solves the defining equation as well
    two = 2 * drho
    assert np.max(np.abs((two @ rho + rho @ two) / 2 - drho)) <= 1e-9


@pytest.mark.parametrize("noise", ["all-isotropic", "anisotropic", "convex"])
def test_sld_identity_on_mixed_states(noise):
    b = FockBasis(8)
    swd = derivative_through_pipeline(make_noon(b, 4), _pipe("forward", *NOISE_MATRIX[noise]), THETA)
    q = qfi_mixed(swd).value
    L = sld(swd).matrix
    rho = swd.rho.to_dense()
    assert abs(np.trace(rho @ L @ L).real - q) / max(q, 1) <= 1e-8


# ------------------------------------------------------------- invariants


@pytest.mark.parametrize("noise", list(NOISE_MATRIX))
def test_qfi_invariant_under_trailing_unitary(noise):
    b = FockBasis(6)
    pipe = _pipe("forward", *NOISE_MATRIX[noise])
    # a fixed rotation appended as a generic stage, so it is not the estimand
    extra = pipe.append(_Fixed(0.9, RotationAxis(1.0, 2.0)))
    for probe in _probes(b).values():
        a = qfi_mixed(derivative_through_pipeline(probe, pipe, THETA)).value
        c = qfi_mixed(derivative_through_pipeline(probe, extra, THETA)).value
        assert abs(a - c) <= 1e-8 * max(a, 1)


class _Fixed:
    """theta-independent rotation; not a RetarderSpec, so not the estimand."""

    def __init__(self, angle, axis):
        self.inner = RetarderSpec(angle, axis)

    def apply_blocks(self, basis, blocks):
        return self.inner.apply_blocks(basis, blocks)


@pytest.mark.parametrize(
    "noise",
    [
        DiattenuatorSpec(0.6, 0.8, 0.3, 0.2),
        IsotropicLindblad(0.05),
        AnisotropicLindblad(0.2, 0.1),
        ConvexRotations(-0.5, 0.5, 7, 0.3),
    ],
    ids=lambda s: type(s).__name__,
)
def test_data_processing_inequality(noise):
    b = FockBasis(8)
    for name, (dia, dep) in NOISE_MATRIX.items():
        pipe = _pipe("forward", dia, dep)
        for probe in _probes(b).values():
            before = qfi_mixed(derivative_through_pipeline(probe, pipe, THETA)).value
            after = qfi_mixed(derivative_through_pipeline(probe, pipe.append(noise), THETA)).value
            assert after <= before + 1e-8, name


@given(st.floats(0.0, 1.0), st.floats(0.0, 0.5), st.floats(-math.pi, math.pi))
@settings(max_examples=15, deadline=None)
def test_qfi_nonnegative_and_bounded(q, nu, theta):
    b = FockBasis(6)
    pipe = ChannelPipeline.forward(RetarderSpec(theta, AXIS), DiattenuatorSpec(q, q), IsotropicLindblad(nu))
    swd = derivative_through_pipeline(make_noon(b, 4), pipe, theta)
    value = qfi_mixed(swd).value
    assert -1e-9 <= value <= 16 + 1e-8


# -------------------------------------------------------------------- CFI


def test_cfi_trivial_povm_is_zero():
    b = FockBasis(4)
    povm = POVM((np.eye(b.dim),), "trivial")
    assert cfi_povm(_pipe("forward"), make_noon(b, 2), THETA, povm) == 0


def test_pauli_povms_are_valid():
    b = FockBasis(4)
    for povm in pauli_povms(b):
        povm.check()
        assert len(povm.effects) == 3


def test_pauli_cfi_single_photon_noon_sums_to_two():
    b = FockBasis(4)
    pipe = _pipe("forward", axis=Z_AXIS)
    total = cfi_sum(pipe, make_noon(b, 1), THETA, pauli_povms(b))
    assert total == pytest.approx(2.0, abs=1e-6)


def test_pauli_cfi_single_photon_coherent_sums_to_two_over_e():
    b = FockBasis(12)
    pipe = _pipe("forward", axis=X_AXIS)
    total = cfi_sum(pipe, make_coherent(b, 1.0), THETA, pauli_povms(b))
    assert total == pytest.approx(2 / math.e, abs=1e-6)


@pytest.mark.parametrize("noise", ["none", "all-isotropic", "anisotropic", "convex"])
def test_cfi_never_exceeds_qfi(noise):
    b = FockBasis(8)
    pipe = _pipe("forward", *NOISE_MATRIX[noise])
    for probe in (make_noon(b, 1), make_coherent(b, 1.0), make_fock(b, 1, 0)):
        swd = derivative_through_pipeline(probe, pipe, THETA)
        q = qfi_mixed(swd).value
        for povm in pauli_povms(b):
            assert cfi_from_swd(swd, povm) <= q + 1e-8


def test_cfi_singular_probability():
    b = FockBasis(3)
    rho = make_fock(b, 1, 0)
    # derivative pushes weight into an outcome of probability zero
    swd = StateWithDerivative(rho, {(1, 1): np.diag([-0.1, 0.1]).astype(complex)})
    with pytest.raises(SingularityError):
        cfi_from_swd(swd, pauli_povms(b)[2])


# ------------------------------------------------------------------- QCRB


def test_qcrb_examples():
    assert qcrb(QFIResult(4.0)) == 0.25
    for N in range(1, 7):
        assert qcrb(QFIResult(float(N**2))) == pytest.approx(1 / N**2)
    assert qcrb(QFIResult(3.0), nu=100) == pytest.approx(1 / 300)


def test_qcrb_zero_qfi_is_unbounded():
    assert qcrb(QFIResult(0.0)) == math.inf


def test_qcrb_rejects_bad_repetitions():
    with pytest.raises(ValueError):
        qcrb(1.0, nu=0)


def test_packed_derivative_is_hermitian():
    b = FockBasis(6)
    swd = derivative_through_pipeline(make_coherent(b, 1.0), _pipe("reverse", *NOISE_MATRIX["all-convex"]), THETA)
    d = blocks_to_packed(b, swd.drho)
    assert np.max(np.abs(d - d.conj().T)) <= 1e-12
