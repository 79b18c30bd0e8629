"""Truncated two-mode Fock space.

Full-space indexing is ``index = n1 * cutoff + n2`` (mode a = horizontal,
mode b = vertical).  Density matrices are stored blockwise by photon-number
sector pair ``(n, m)``; inside sector ``n`` the local index is ``j = n2``, so
``j = 0`` is ``|n, 0> = |S, S>`` and the Dicke label is ``m = S - j``.

Only sectors ``n <= cutoff - 1`` are complete in the truncated space, and all
states handled here live there.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from polarqfi.errors import BasisMismatchError, CapacityError, TruncationGuardError

log = logging.getLogger(__name__)

DEFAULT_CUTOFF = 12


@dataclass(frozen=True)
class FockBasis:
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff**2

    @property
    def max_sector(self) -> int:
        return self.cutoff - 1

    @property
    def packed_dim(self) -> int:
        c = self.cutoff
        return c * (c + 1) // 2

    def index(self, n1: int, n2: int) -> int:
        if not (0 <= n1 < self.cutoff and 0 <= n2 < self.cutoff):
            raise CapacityError(f"|{n1},{n2}> outside cutoff {self.cutoff}")
        return n1 * self.cutoff + n2

    def labels(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.dim:
            raise IndexError(index)
        return divmod(index, self.cutoff)

    def sector_indices(self, n: int) -> np.ndarray:
        """Full-space indices of sector ``n`` in local order ``j = n2``."""
        self._check_sector(n)
        j = np.arange(n + 1)
        return (n - j) * self.cutoff + j

    def sector_offset(self, n: int) -> int:
        return n * (n + 1) // 2

    def _check_sector(self, n):
        if not 0 <= n <= self.max_sector:
            raise CapacityError(f"sector {n} not representable at cutoff {self.cutoff}")


def dicke_labels(n1: int, n2: int) -> tuple[float, float]:
    """``|n1, n2> -> (S, m)``."""
    return (n1 + n2) / 2, (n1 - n2) / 2


def fock_index(basis: FockBasis, S: float, m: float) -> int:
    n1, n2 = S + m, S - m
    if abs(n1 - round(n1)) > 1e-12 or abs(n2 - round(n2)) > 1e-12 or n2 < 0 or n1 < 0:
        raise ValueError(f"invalid Dicke label S={S}, m={m}")
    return basis.index(int(round(n1)), int(round(n2)))


@dataclass(frozen=True)
class RotationAxis:
    """Unit axis on the Poincare sphere; ``(0, 0)`` is the S3 axis."""

    Theta: float = 0.0
    Phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.Theta) and math.isfinite(self.Phi)):
            raise ValueError("axis angles must be finite")

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.Theta)
        return np.array([st * math.cos(self.Phi), st * math.sin(self.Phi), math.cos(self.Theta)])


@lru_cache(maxsize=None)
def sector_stokes(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Stokes operators restricted to the ``n``-photon sector (local basis j = n2)."""
    j = np.arange(n + 1)
    s0 = np.diag(np.full(n + 1, n / 2)).astype(complex)
    s3 = np.diag((n - 2 * j) / 2).astype(complex)
    # a^dag b : |n-j, j> -> sqrt((n-j+1) j) |n-j+1, j-1>
    raise_ = np.zeros((n + 1, n + 1), dtype=complex)
    for jj in range(1, n + 1):
        raise_[jj - 1, jj] = math.sqrt((n - jj + 1) * jj)
    s1 = (raise_ + raise_.T) / 2
    s2 = -1j * (raise_ - raise_.T) / 2
    for s in (s0, s1, s2, s3):
        s.setflags(write=False)
    return s0, s1, s2, s3


def sector_generator(n: int, axis: RotationAxis) -> np.ndarray:
    """``n . S`` on sector ``n``."""
    _, s1, s2, s3 = sector_stokes(n)
    v = axis.vector
    return v[0] * s1 + v[1] * s2 + v[2] * s3


@lru_cache(maxsize=4096)
def sector_rotation(n: int, theta: float, Theta: float, Phi: float) -> np.ndarray:
    """``exp(i theta n.S)`` on sector ``n``."""
    u = expm(1j * theta * sector_generator(n, RotationAxis(Theta, Phi)))
    u.setflags(write=False)
    return u


@dataclass(frozen=True)
class TwoModeOperator:
    basis: FockBasis
    matrix: np.ndarray

    def __matmul__(self, other):
        _same_basis(self.basis, other.basis)
        return TwoModeOperator(self.basis, self.matrix @ other.matrix)

    def commutator(self, other) -> "TwoModeOperator":
        _same_basis(self.basis, other.basis)
        return TwoModeOperator(self.basis, self.matrix @ other.matrix - other.matrix @ self.matrix)


def _same_basis(a: FockBasis, b: FockBasis):
    if a != b:
        raise BasisMismatchError(f"basis mismatch: cutoff {a.cutoff} vs {b.cutoff}")


def mode_operators(basis: FockBasis) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation operators ``a`` and ``b`` on the full space."""
    c = basis.cutoff
    destroy = np.diag(np.sqrt(np.arange(1, c)), k=1).astype(complex)
    eye = np.eye(c)
    return np.kron(destroy, eye), np.kron(eye, destroy)


def build_stokes_operators(basis: FockBasis) -> tuple[TwoModeOperator, ...]:
    a, b = mode_operators(basis)
    ad, bd = a.conj().T, b.conj().T
    s0 = (ad @ a + bd @ b) / 2
    s1 = (ad @ b + bd @ a) / 2
    s2 = -1j * (ad @ b - bd @ a) / 2
    s3 = (ad @ a - bd @ b) / 2
    return tuple(TwoModeOperator(basis, s) for s in (s0, s1, s2, s3))


def safe_subspace_projector(basis: FockBasis, max_photons: int | None = None) -> np.ndarray:
    """Diagonal projector onto Fock states with ``n1 + n2 <= max_photons``."""
    if max_photons is None:
        max_photons = basis.cutoff - 2
    diag = np.array([sum(basis.labels(i)) <= max_photons for i in range(basis.dim)], dtype=float)
    return np.diag(diag)


Blocks = Mapping[tuple[int, int], np.ndarray]


@dataclass(frozen=True)
class TwoModeState:
    """Density matrix stored by photon-number sector pair.

    ``blocks[(n, m)]`` has shape ``(n + 1, m + 1)``; absent keys are zero.
    """

    basis: FockBasis
    blocks: Blocks = field(repr=False)
    purity_hint: bool = False

    @property
    def sector_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.blocks)

    @property
    def sectors(self) -> list[int]:
        return sorted({n for n, m in self.blocks if n == m})

    def trace(self) -> complex:
        return sum(np.trace(b) for (n, m), b in self.blocks.items() if n == m)

    def packed(self) -> np.ndarray:
        return blocks_to_packed(self.basis, self.blocks)

    def to_dense(self) -> np.ndarray:
        return blocks_to_dense(self.basis, self.blocks)

    def purity(self) -> float:
        p = self.packed()
        return float(np.real(np.vdot(p, p)))

    def block(self, n: int, m: int | None = None) -> np.ndarray:
        m = n if m is None else m
        b = self.blocks.get((n, m))
        return np.zeros((n + 1, m + 1), dtype=complex) if b is None else b

    def ket(self) -> np.ndarray:
        """State vector (full-space) of a pure state, fixed up to global phase."""
        w, v = np.linalg.eigh(self.packed())
        if abs(w[-1] - 1) > 1e-8:
            raise ValueError(f"state is not pure (largest eigenvalue {w[-1]:.3g})")
        return packed_to_full_vector(self.basis, v[:, -1])

    def check(self, herm_tol=1e-12, trace_tol=1e-10, pos_tol=1e-10) -> None:
        """Raise ``ValueError`` if Hermiticity, trace or positivity fails."""
        p = self.packed()
        herm = np.max(np.abs(p - p.conj().T)) if p.size else 0.0
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: {herm:.3g}")
        tr = np.trace(p)
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"trace {tr:.12g} != 1")
        lam = np.linalg.eigvalsh((p + p.conj().T) / 2)
        if lam[0] < -pos_tol:
            raise ValueError(f"negative eigenvalue {lam[0]:.3g}")


def blocks_to_packed(basis: FockBasis, blocks: Blocks) -> np.ndarray:
    out = np.zeros((basis.packed_dim, basis.packed_dim), dtype=complex)
    for (n, m), b in blocks.items():
        on, om = basis.sector_offset(n), basis.sector_offset(m)
        out[on:on + n + 1, om:om + m + 1] = b
    return out


def packed_to_blocks(basis: FockBasis, packed: np.ndarray, tol: float = 0.0) -> dict:
    out = {}
    for n in range(basis.cutoff):
        on = basis.sector_offset(n)
        for m in range(basis.cutoff):
            om = basis.sector_offset(m)
            b = packed[on:on + n + 1, om:om + m + 1]
            if np.any(np.abs(b) > tol):
                out[(n, m)] = b.copy()
    return out


def blocks_to_dense(basis: FockBasis, blocks: Blocks) -> np.ndarray:
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for (n, m), b in blocks.items():
        out[np.ix_(basis.sector_indices(n), basis.sector_indices(m))] = b
    return out


def dense_to_blocks(basis: FockBasis, rho: np.ndarray, tol: float = 0.0) -> dict:
    """Split a full-space matrix into sector blocks.

    Raises ``CapacityError`` if weight sits on incomplete sectors
    (``n1 + n2 >= cutoff``).
    """
    rho = np.asarray(rho)
    mask = np.zeros(basis.dim, dtype=bool)
    for n in range(basis.cutoff):
        mask[basis.sector_indices(n)] = True
    if np.any(np.abs(rho[~mask]) > 1e-14) or np.any(np.abs(rho[:, ~mask]) > 1e-14):
        raise CapacityError("matrix has weight on sectors n1 + n2 >= cutoff")
    out = {}
    for n in range(basis.cutoff):
        ix = basis.sector_indices(n)
        for m in range(basis.cutoff):
            b = rho[np.ix_(ix, basis.sector_indices(m))]
            if np.any(np.abs(b) > tol):
                out[(n, m)] = b.copy()
    return out


def packed_to_full_vector(basis: FockBasis, v: np.ndarray) -> np.ndarray:
    out = np.zeros(basis.dim, dtype=complex)
    for n in range(basis.cutoff):
        o = basis.sector_offset(n)
        out[basis.sector_indices(n)] = v[o:o + n + 1]
    return out


def full_to_packed_vector(basis: FockBasis, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    out = np.zeros(basis.packed_dim, dtype=complex)
    covered = np.zeros(basis.dim, dtype=bool)
    for n in range(basis.cutoff):
        o = basis.sector_offset(n)
        ix = basis.sector_indices(n)
        out[o:o + n + 1] = psi[ix]
        covered[ix] = True
    if np.any(np.abs(psi[~covered]) > 1e-14):
        raise CapacityError("vector has weight on sectors n1 + n2 >= cutoff")
    return out


def state_from_ket(basis: FockBasis, psi: np.ndarray) -> TwoModeState:
    """Pure state from a full-space vector (normalized here)."""
    v = full_to_packed_vector(basis, psi)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("zero vector")
    v = v / norm
    blocks = {}
    for n in range(basis.cutoff):
        vn = v[basis.sector_offset(n):basis.sector_offset(n) + n + 1]
        if not np.any(vn):
            continue
        for m in range(basis.cutoff):
            vm = v[basis.sector_offset(m):basis.sector_offset(m) + m + 1]
            if np.any(vm):
                blocks[(n, m)] = np.outer(vn, vm.conj())
    return TwoModeState(basis, blocks, purity_hint=True)


def state_from_dense(basis: FockBasis, rho: np.ndarray) -> TwoModeState:
    return TwoModeState(basis, dense_to_blocks(basis, rho))


def fock_ket(basis: FockBasis, n1: int, n2: int) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index(n1, n2)] = 1.0
    return psi


def make_fock(basis: FockBasis, n1: int, n2: int) -> TwoModeState:
    if n1 + n2 > basis.max_sector:
        raise CapacityError(f"|{n1},{n2}> needs cutoff > {n1 + n2}")
    return state_from_ket(basis, fock_ket(basis, n1, n2))


def make_noon(basis: FockBasis, N: int) -> TwoModeState:
    """``(|N,0> + |0,N>)/sqrt(2)``."""
    if N < 1:
        raise ValueError("NOON state needs N >= 1")
    if N >= basis.cutoff:
        raise CapacityError(f"NOON N={N} needs cutoff > {N}, have {basis.cutoff}")
    psi = fock_ket(basis, N, 0) + fock_ket(basis, 0, N)
    return state_from_ket(basis, psi)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    mag = np.exp(-abs(alpha) ** 2 / 2 - logfact / 2) * float(abs(alpha)) ** n
    return mag * np.exp(1j * n * np.angle(alpha))


def make_coherent(basis: FockBasis, alpha: complex) -> TwoModeState:
    """``|alpha>_a (x) |0>_b``, truncated at the cutoff and renormalized.

    Raises ``TruncationGuardError`` when ``|alpha|^2 > cutoff / 2``.
    """
    amps = coherent_amplitudes(alpha, basis.cutoff)
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if abs(alpha) ** 2 > basis.cutoff / 2:
        raise TruncationGuardError(
            f"|alpha|^2={abs(alpha) ** 2:.4g} exceeds cutoff/2={basis.cutoff / 2}; "
            f"truncated norm deficit {deficit:.3g}",
            deficit,
        )
    if deficit > 0:
        log.debug("coherent alpha=%s cutoff=%d: norm deficit %.3e", alpha, basis.cutoff, deficit)
    psi = np.zeros(basis.dim, dtype=complex)
    for n1, c in enumerate(amps):
        psi[basis.index(n1, 0)] = c
    return state_from_ket(basis, psi)


def make_king(basis: FockBasis, constellation) -> TwoModeState:
    from polarqfi.polarization.majorana import constellation_to_state

    return constellation_to_state(basis, constellation)


def expectation(state: TwoModeState, operator: TwoModeOperator) -> complex:
    """``Tr[rho A]``."""
    _same_basis(state.basis, operator.basis)
    return complex(np.sum(state.to_dense() * operator.matrix.T))
