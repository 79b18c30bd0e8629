"""Polarization channels acting on sector-blocked density matrices.

Every stage is a linear map on the block dictionary, so the same code
propagates both a state and its parameter derivative.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.linalg import expm

from polarqfi.errors import PipelineError
from polarqfi.hilbert import (
    Blocks,
    FockBasis,
    RotationAxis,
    TwoModeState,
    blocks_to_dense,
    dense_to_blocks,
    sector_rotation,
    sector_stokes,
)


def _conj_blocks(blocks: Blocks, left, right) -> dict:
    """``B_nm -> left(n) @ B_nm @ right(m)``."""
    return {(n, m): left(n) @ b @ right(m) for (n, m), b in blocks.items()}


# ---------------------------------------------------------------- retarder


@dataclass(frozen=True)
class RetarderSpec:
    theta: float = math.pi / 10
    axis: RotationAxis = field(default_factory=RotationAxis)

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("retarder angle must be finite")

    def unitary(self, n: int) -> np.ndarray:
        return sector_rotation(n, float(self.theta), float(self.axis.Theta), float(self.axis.Phi))

    def apply_blocks(self, basis: FockBasis, blocks: Blocks) -> dict:
        if self.theta == 0:
            return {k: v.copy() for k, v in blocks.items()}
        return _conj_blocks(blocks, self.unitary, lambda m: self.unitary(m).conj().T)


def apply_retarder(state: TwoModeState, spec: RetarderSpec) -> TwoModeState:
    return TwoModeState(state.basis, spec.apply_blocks(state.basis, state.blocks), state.purity_hint)


# ------------------------------------------------------------ diattenuator


@lru_cache(maxsize=None)
def _frame_rotation(n: int, beta: float, gamma: float) -> np.ndarray:
    # Euler rotation R(0, beta, gamma) = exp(-i beta S2) exp(-i gamma S3)
    _, _, s2, s3 = sector_stokes(n)
    return expm(-1j * beta * s2) @ expm(-1j * gamma * s3)


@lru_cache(maxsize=None)
def loss_kraus(cutoff: int, transmissivity: float) -> np.ndarray:
    """Single-mode amplitude-loss Kraus operators, shape ``(cutoff, cutoff, cutoff)``.

    ``K_k |n> = sqrt(C(n, k) t^(n-k) (1-t)^k) |n-k>``.
    """
    t = transmissivity
    ks = np.zeros((cutoff, cutoff, cutoff))
    for k in range(cutoff):
        for n in range(k, cutoff):
            ks[k, n - k, n] = math.sqrt(math.comb(n, k) * t ** (n - k) * (1 - t) ** k)
    ks.setflags(write=False)
    return ks


def _apply_mode_loss(rho4: np.ndarray, kraus: np.ndarray, mode: int) -> np.ndarray:
    if mode == 0:
        return np.einsum("kai,ijlm,kbl->ajbm", kraus, rho4, kraus, optimize=True)
    return np.einsum("kaj,ijlm,kbm->ialb", kraus, rho4, kraus, optimize=True)


@dataclass(frozen=True)
class DiattenuatorSpec:
    q: float = 1.0
    r: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("q", "r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"attenuation parameter {name}={v} outside [0, 1]")

    def apply_blocks(self, basis: FockBasis, blocks: Blocks) -> dict:
        if self.q == 1.0 and self.r == 1.0:
            return {k: v.copy() for k, v in blocks.items()}
        frame = lambda n: _frame_rotation(n, float(self.beta), float(self.gamma))
        rotated = _conj_blocks(blocks, frame, lambda m: frame(m).conj().T)
        c = basis.cutoff
        rho4 = blocks_to_dense(basis, rotated).reshape(c, c, c, c)
        rho4 = _apply_mode_loss(rho4, loss_kraus(c, float(self.q)), 0)
        rho4 = _apply_mode_loss(rho4, loss_kraus(c, float(self.r)), 1)
        lossy = dense_to_blocks(basis, rho4.reshape(c * c, c * c))
        return _conj_blocks(lossy, lambda n: frame(n).conj().T, frame)


def apply_diattenuator(state: TwoModeState, spec: DiattenuatorSpec) -> TwoModeState:
    return TwoModeState(state.basis, spec.apply_blocks(state.basis, state.blocks))


# ------------------------------------------------------------ depolarizers


def gaussian_weights(angles: np.ndarray, sigma: float) -> np.ndarray:
    """Discrete normal weights (mean 0) on ``angles``, normalized to sum 1."""
    expo = -(angles**2) / (2 * sigma**2)
    w = np.exp(expo - expo.max())
    return w / w.sum()


@lru_cache(maxsize=None)
def _axis_rotations(n: int, axis: int, angles: tuple) -> np.ndarray:
    s = sector_stokes(n)[axis]
    return np.stack([expm(-1j * phi * s) for phi in angles])


@dataclass(frozen=True)
class ConvexRotations:
    eta_min: float = -math.pi / 8
    eta_max: float = math.pi / 8
    n_r: int = 6
    sigma_r: float = math.pi / 32
    permutation_average: bool = True
    axis_order: tuple = (1, 2, 3)

    kind = "convex"

    def __post_init__(self):
        if self.n_r < 1:
            raise ValueError("n_r must be >= 1")
        if self.eta_min > self.eta_max:
            raise ValueError("eta_min > eta_max")
        if not self.sigma_r > 0:
            raise ValueError("sigma_r must be positive")
        if sorted(self.axis_order) != [1, 2, 3]:
            raise ValueError(f"axis_order must be a permutation of (1, 2, 3), got {self.axis_order}")

    @property
    def angles(self) -> np.ndarray:
        return np.linspace(self.eta_min, self.eta_max, self.n_r)

    @property
    def weights(self) -> np.ndarray:
        return gaussian_weights(self.angles, self.sigma_r)

    @property
    def strength(self) -> float:
        return self.sigma_r

    def single_orderings(self) -> list["ConvexRotations"]:
        """The six fixed-order channels whose average this channel is."""
        return [
            dataclasses.replace(self, permutation_average=False, axis_order=p)
            for p in itertools.permutations((1, 2, 3))
        ]

    def _axis_channel(self, blocks: Blocks, axis: int) -> dict:
        angles = tuple(float(a) for a in self.angles)
        w = self.weights
        out = {}
        for (n, m), b in blocks.items():
            un = _axis_rotations(n, axis, angles)
            um = _axis_rotations(m, axis, angles)
            out[(n, m)] = np.einsum("i,iab,bc,idc->ad", w, un, b, um.conj(), optimize=True)
        return out

    def apply_blocks(self, basis: FockBasis, blocks: Blocks) -> dict:
        orders = list(itertools.permutations((1, 2, 3))) if self.permutation_average else [self.axis_order]
        acc = {k: np.zeros_like(v, dtype=complex) for k, v in blocks.items()}
        for order in orders:
            cur = blocks
            for axis in order:
                cur = self._axis_channel(cur, axis)
            for k, v in cur.items():
                acc[k] += v
        return {k: v / len(orders) for k, v in acc.items()}


def _dissipator(a_left: np.ndarray, a_right: np.ndarray) -> np.ndarray:
    """Superoperator of ``2 A X A^dag - A^dag A X - X A^dag A`` on row-major vec(X).

    ``a_left`` acts on the row sector, ``a_right`` on the column sector.
    """
    il, ir = np.eye(a_left.shape[0]), np.eye(a_right.shape[0])
    ll = a_left.conj().T @ a_left
    rr = a_right.conj().T @ a_right
    return 2 * np.kron(a_left, a_right.conj()) - np.kron(ll, ir) - np.kron(il, rr.T)


@lru_cache(maxsize=None)
def lindblad_generator(n: int, m: int, rates: tuple) -> np.ndarray:
    """Block generator for jump operators ``S_k`` with (dimensionless) rates.

    ``rates`` is ``(r0, r1, r2, r3)``, one per Stokes operator.
    """
    sn, sm = sector_stokes(n), sector_stokes(m)
    gen = np.zeros(((n + 1) * (m + 1),) * 2, dtype=complex)
    for k, rate in enumerate(rates):
        if rate:
            gen += rate * _dissipator(sn[k], sm[k])
    return gen


@lru_cache(maxsize=None)
def _lindblad_propagator(n: int, m: int, rates: tuple) -> np.ndarray:
    p = expm(lindblad_generator(n, m, rates))
    p.setflags(write=False)
    return p


class _LindbladMixin:
    def apply_blocks(self, basis: FockBasis, blocks: Blocks) -> dict:
        rates = self.rates
        if not any(rates):
            return {k: v.copy() for k, v in blocks.items()}
        out = {}
        for (n, m), b in blocks.items():
            out[(n, m)] = (_lindblad_propagator(n, m, rates) @ b.reshape(-1)).reshape(b.shape)
        return out


@dataclass(frozen=True)
class IsotropicLindblad(_LindbladMixin):
    nu_t: float = 0.003

    kind = "isotropic"

    def __post_init__(self):
        if not self.nu_t >= 0:
            raise ValueError("nu_t must be >= 0")

    @property
    def rates(self) -> tuple:
        v = float(self.nu_t)
        return (0.0, v, v, v)

    @property
    def strength(self) -> float:
        return self.nu_t


@dataclass(frozen=True)
class AnisotropicLindblad(_LindbladMixin):
    nu_t: float = 0.05
    nu0_t: float = 0.0

    kind = "anisotropic"

    def __post_init__(self):
        if not (self.nu_t >= 0 and self.nu0_t >= 0):
            raise ValueError("rates must be >= 0")

    @property
    def rates(self) -> tuple:
        v = float(self.nu_t)
        return (float(self.nu0_t), 0.0, v, v)

    @property
    def strength(self) -> float:
        return self.nu_t


DepolarizerSpec = Union[ConvexRotations, IsotropicLindblad, AnisotropicLindblad]


def apply_convex_rotation_depolarizer(state: TwoModeState, spec: ConvexRotations) -> TwoModeState:
    return TwoModeState(state.basis, spec.apply_blocks(state.basis, state.blocks))


def apply_lindblad_depolarizer(state: TwoModeState, spec) -> TwoModeState:
    return TwoModeState(state.basis, spec.apply_blocks(state.basis, state.blocks))


# --------------------------------------------------------------- pipeline

Stage = Union[RetarderSpec, DiattenuatorSpec, ConvexRotations, IsotropicLindblad, AnisotropicLindblad]


@dataclass(frozen=True)
class ChannelPipeline:
    """Stages in application order (first element acts first).

    ``forward`` is eps_d o eps_R o eps_D, i.e. stages ``[D, R, d]``;
    ``reverse`` is eps_D o eps_R o eps_d, i.e. stages ``[d, R, D]``.
    """

    stages: tuple
    order: str = "custom"

    @classmethod
    def forward(cls, retarder: RetarderSpec, diattenuator=None, depolarizer=None) -> "ChannelPipeline":
        return cls(tuple(s for s in (diattenuator, retarder, depolarizer) if s is not None), "forward")

    @classmethod
    def reverse(cls, retarder: RetarderSpec, diattenuator=None, depolarizer=None) -> "ChannelPipeline":
        return cls(tuple(s for s in (depolarizer, retarder, diattenuator) if s is not None), "reverse")

    @classmethod
    def build(cls, order: str, retarder, diattenuator=None, depolarizer=None) -> "ChannelPipeline":
        if order == "forward":
            return cls.forward(retarder, diattenuator, depolarizer)
        if order == "reverse":
            return cls.reverse(retarder, diattenuator, depolarizer)
        raise PipelineError(f"unknown order {order!r}")

    @property
    def retarder_index(self) -> int:
        idx = [i for i, s in enumerate(self.stages) if isinstance(s, RetarderSpec)]
        if len(idx) != 1:
            raise PipelineError(f"pipeline needs exactly one retarder stage, found {len(idx)}")
        return idx[0]

    @property
    def retarder(self) -> RetarderSpec:
        return self.stages[self.retarder_index]

    def with_theta(self, theta: float) -> "ChannelPipeline":
        i = self.retarder_index
        stages = list(self.stages)
        stages[i] = dataclasses.replace(stages[i], theta=float(theta))
        return ChannelPipeline(tuple(stages), self.order)

    def append(self, stage) -> "ChannelPipeline":
        return ChannelPipeline(self.stages + (stage,), "custom")


def apply_stages(basis: FockBasis, blocks: Blocks, stages: Sequence) -> dict:
    for stage in stages:
        if not hasattr(stage, "apply_blocks"):
            raise PipelineError(f"unknown stage {stage!r}")
        blocks = stage.apply_blocks(basis, blocks)
    return dict(blocks)


def apply_pipeline(state: TwoModeState, pipeline: ChannelPipeline, theta: float) -> TwoModeState:
    pipe = pipeline.with_theta(theta)
    blocks = apply_stages(state.basis, state.blocks, pipe.stages)
    pure = state.purity_hint and all(isinstance(s, RetarderSpec) for s in pipe.stages)
    return TwoModeState(state.basis, blocks, pure)


def extract_mueller_matrix(pipeline: ChannelPipeline, theta: float, cutoff: int = 2) -> np.ndarray:
    """Mueller matrix read off the single-photon sector.

    ``M[mu, nu] = Tr[S_mu eps(sigma_nu)]`` with ``sigma_nu = 2 S_nu`` on the
    one-photon sector, since ``rho = sum_nu <S_nu> sigma_nu`` there.
    """
    basis = FockBasis(cutoff)
    pipe = pipeline.with_theta(theta)
    s_one = sector_stokes(1)
    mueller = np.zeros((4, 4))
    for nu in range(4):
        out = apply_stages(basis, {(1, 1): 2 * np.array(s_one[nu])}, pipe.stages)
        for mu in range(4):
            val = sum(
                np.trace(sector_stokes(n)[mu] @ b) for (n, m), b in out.items() if n == m
            )
            mueller[mu, nu] = float(np.real(val))
    return mueller
