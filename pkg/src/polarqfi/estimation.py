"""Quantum and classical Fisher information for the retarder angle."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from polarqfi.channels import ChannelPipeline, RetarderSpec, apply_stages
from polarqfi.errors import BasisMismatchError, SingularityError
from polarqfi.hilbert import (
    Blocks,
    FockBasis,
    TwoModeOperator,
    TwoModeState,
    blocks_to_dense,
    blocks_to_packed,
    packed_to_blocks,
    sector_generator,
    sector_stokes,
)

log = logging.getLogger(__name__)

NEG_EIG_TOL = 1e-10
DEFAULT_EIGEN_CUT = 1e-12


@dataclass(frozen=True)
class StateWithDerivative:
    rho: TwoModeState
    drho: Blocks

    @property
    def basis(self) -> FockBasis:
        return self.rho.basis

    def drho_packed(self) -> np.ndarray:
        return blocks_to_packed(self.basis, self.drho)

    def drho_dense(self) -> np.ndarray:
        return blocks_to_dense(self.basis, self.drho)

    def check(self, trace_tol=1e-10, herm_tol=1e-12) -> None:
        d = self.drho_packed()
        if abs(np.trace(d)) > trace_tol:
            raise ValueError(f"Tr(drho) = {np.trace(d):.3g}")
        if d.size and np.max(np.abs(d - d.conj().T)) > herm_tol:
            raise ValueError("drho is not Hermitian")


@dataclass(frozen=True)
class QFIResult:
    value: float
    spectrum_cut: int = 0
    method: str = "mixed-eigen"


def derivative_through_pipeline(
    probe: TwoModeState, pipeline: ChannelPipeline, theta: float
) -> StateWithDerivative:
    """Propagate ``rho`` and ``d rho / d theta`` through the pipeline.

    At the retarder ``d(R s R^dag) = i [n.S, R s R^dag]``; later stages are
    linear and act on the derivative as on the state.  Stages before the
    retarder do not depend on theta, so the derivative starts there.
    """
    pipe = pipeline.with_theta(theta)
    basis = probe.basis
    i = pipe.retarder_index
    rho = apply_stages(basis, probe.blocks, pipe.stages[: i + 1])
    axis = pipe.retarder.axis
    gens = {}

    def gen(n):
        if n not in gens:
            gens[n] = sector_generator(n, axis)
        return gens[n]

    drho = {(n, m): 1j * (gen(n) @ b - b @ gen(m)) for (n, m), b in rho.items()}
    rest = pipe.stages[i + 1:]
    rho = apply_stages(basis, rho, rest)
    drho = apply_stages(basis, drho, rest)
    pure = probe.purity_hint and not rest
    return StateWithDerivative(TwoModeState(basis, rho, pure), drho)


def finite_difference_derivative(
    probe: TwoModeState, pipeline: ChannelPipeline, theta: float, h: float = 1e-5
) -> np.ndarray:
    """Central difference of the packed output state; test oracle only."""
    basis = probe.basis
    plus = apply_stages(basis, probe.blocks, pipeline.with_theta(theta + h).stages)
    minus = apply_stages(basis, probe.blocks, pipeline.with_theta(theta - h).stages)
    return (blocks_to_packed(basis, plus) - blocks_to_packed(basis, minus)) / (2 * h)


def qfi_pure(psi: np.ndarray, dpsi: np.ndarray, norm_tol: float = 1e-10) -> QFIResult:
    """``4 (<dpsi|dpsi> - |<dpsi|psi>|^2)``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    dpsi = np.asarray(dpsi, dtype=complex).ravel()
    if abs(np.vdot(psi, psi).real - 1) > norm_tol:
        raise ValueError("psi is not normalized")
    val = 4 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(dpsi, psi)) ** 2)
    return QFIResult(max(float(val), 0.0) if val > -1e-9 else float(val), 0, "pure")


def unitary_family(probe: TwoModeState, pipeline: ChannelPipeline, theta: float):
    """``(psi(theta), d psi/d theta)`` for a pure probe under a retarder-only pipeline."""
    pipe = pipeline.with_theta(theta)
    if any(not isinstance(s, RetarderSpec) for s in pipe.stages):
        raise ValueError("unitary_family needs a noiseless pipeline")
    basis = probe.basis
    psi = probe.ket()
    for stage in pipe.stages:
        psi = _rotate_ket(basis, psi, stage)
    ret = pipe.retarder
    dpsi = np.zeros_like(psi)
    for n in range(basis.cutoff):
        ix = basis.sector_indices(n)
        if np.any(psi[ix]):
            dpsi[ix] = 1j * sector_generator(n, ret.axis) @ psi[ix]
    return psi, dpsi


def _rotate_ket(basis, psi, stage):
    out = psi.copy()
    for n in range(basis.cutoff):
        ix = basis.sector_indices(n)
        if np.any(psi[ix]):
            out[ix] = stage.unitary(n) @ psi[ix]
    return out


def _eigh_clamped(rho: np.ndarray):
    lam, vec = np.linalg.eigh((rho + rho.conj().T) / 2)
    if lam.size and lam[0] < -NEG_EIG_TOL:
        raise ValueError(f"density matrix has eigenvalue {lam[0]:.3g} < -{NEG_EIG_TOL}")
    return np.clip(lam, 0.0, None), vec


def qfi_mixed(swd: StateWithDerivative, eigen_cut: float = DEFAULT_EIGEN_CUT) -> QFIResult:
    """``2 sum_kl |<k|drho|l>|^2 / (lam_k + lam_l)`` over pairs above ``eigen_cut``.

    ``spectrum_cut`` counts excluded pairs whose derivative element is not
    negligible (``|<k|drho|l>| > 1e-12``), i.e. information actually discarded.
    """
    try:
        lam, vec = _eigh_clamped(swd.rho.packed())
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError("eigensolver failed") from exc
    d = vec.conj().T @ swd.drho_packed() @ vec
    denom = lam[:, None] + lam[None, :]
    keep = denom > eigen_cut
    dropped = int(np.count_nonzero(~keep & (np.abs(d) > 1e-12)))
    val = 2 * float(np.sum(np.abs(d[keep]) ** 2 / denom[keep]))
    return QFIResult(val, dropped, "mixed-eigen")


def sld(swd: StateWithDerivative, eigen_cut: float = DEFAULT_EIGEN_CUT) -> TwoModeOperator:
    """Symmetric logarithmic derivative on the full two-mode space."""
    basis = swd.basis
    lam, vec = _eigh_clamped(swd.rho.packed())
    d = vec.conj().T @ swd.drho_packed() @ vec
    denom = lam[:, None] + lam[None, :]
    keep = denom > eigen_cut
    lk = np.zeros_like(d)
    lk[keep] = 2 * d[keep] / denom[keep]
    packed = vec @ lk @ vec.conj().T
    return TwoModeOperator(basis, blocks_to_dense(basis, packed_to_blocks(basis, packed)))


def qcrb(qfi: QFIResult | float, nu: int = 1) -> float:
    """``1 / (nu F_Q)``; infinite when the QFI vanishes."""
    value = qfi.value if isinstance(qfi, QFIResult) else float(qfi)
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if value <= 0:
        return float("inf")
    return 1.0 / (nu * value)


# ----------------------------------------------------------------- POVMs


@dataclass(frozen=True)
class POVM:
    """Effects as full-space matrices."""

    effects: tuple
    label: str = ""

    def check(self, state: TwoModeState | None = None, tol: float = 1e-10) -> None:
        total = sum(np.asarray(e) for e in self.effects)
        for e in self.effects:
            e = np.asarray(e)
            if np.linalg.eigvalsh((e + e.conj().T) / 2)[0] < -tol:
                raise ValueError(f"POVM {self.label}: effect not positive semidefinite")
        if state is None:
            idx = np.arange(total.shape[0])
        else:
            idx = np.concatenate([state.basis.sector_indices(n) for n in range(state.basis.cutoff)
                                  if any(n in key for key in state.blocks)])
        sub = total[np.ix_(idx, idx)]
        if np.max(np.abs(sub - np.eye(len(idx)))) > tol:
            raise ValueError(f"POVM {self.label}: effects do not sum to identity on populated sectors")


def pauli_povms(basis: FockBasis) -> list[POVM]:
    """Projective measurements of sigma_x, sigma_y, sigma_z on the one-photon sector.

    Each POVM is ``{P1 (1 + sigma)/2, P1 (1 - sigma)/2, 1 - P1}``, with
    ``sigma_k = 2 S_k`` restricted to the one-photon sector.
    """
    ix = basis.sector_indices(1)
    p1 = np.zeros((basis.dim, basis.dim), dtype=complex)
    p1[np.ix_(ix, ix)] = np.eye(2)
    rest = np.eye(basis.dim) - p1
    povms = []
    for k, name in ((1, "x"), (2, "y"), (3, "z")):
        sigma = 2 * np.asarray(sector_stokes(1)[k])
        effects = []
        for sign in (1, -1):
            e = np.zeros((basis.dim, basis.dim), dtype=complex)
            e[np.ix_(ix, ix)] = (np.eye(2) + sign * sigma) / 2
            effects.append(e)
        effects.append(rest)
        povms.append(POVM(tuple(effects), f"sigma_{name}"))
    return povms


def cfi_from_swd(swd: StateWithDerivative, povm: POVM, qfi_value: float | None = None) -> float:
    rho = swd.rho.to_dense()
    drho = swd.drho_dense()
    total = 0.0
    for e in povm.effects:
        e = np.asarray(e)
        p = float(np.real(np.sum(rho * e.T)))
        dp = float(np.real(np.sum(drho * e.T)))
        if p < 1e-14:
            if abs(dp) < 1e-12:
                continue
            raise SingularityError(f"POVM {povm.label}: p={p:.3g} with dp={dp:.3g}")
        total += dp * dp / p
    if qfi_value is not None and total > qfi_value + 1e-8:
        raise AssertionError(f"CFI {total} exceeds QFI {qfi_value}")
    return total


def cfi_povm(pipeline: ChannelPipeline, probe: TwoModeState, theta: float, povm: POVM) -> float:
    """``sum_i (d p_i)^2 / p_i`` with analytic derivatives; asserts CFI <= QFI."""
    if probe.basis.dim != np.asarray(povm.effects[0]).shape[0]:
        raise BasisMismatchError("POVM dimension does not match the probe basis")
    swd = derivative_through_pipeline(probe, pipeline, theta)
    povm.check(swd.rho)
    return cfi_from_swd(swd, povm, qfi_mixed(swd).value)


def cfi_sum(pipeline: ChannelPipeline, probe: TwoModeState, theta: float, povms: Sequence[POVM]) -> float:
    """Total CFI when each POVM in ``povms`` is performed on its own copy."""
    return sum(cfi_povm(pipeline, probe, theta, p) for p in povms)
