"""Coercion of inputs to single-sector vectors and density matrices."""

from __future__ import annotations

import numpy as np

from polarqfi.hilbert import TwoModeState


def _single_sector(state: TwoModeState) -> int:
    keys = [k for k, b in state.blocks.items() if np.any(np.abs(b) > 1e-14)]
    sectors = {n for k in keys for n in k}
    if len(sectors) != 1:
        raise ValueError(f"state is not supported on a single sector (sectors {sorted(sectors)})")
    return sectors.pop()


def sector_density(x) -> np.ndarray:
    """Density matrix on one sector from a state, ket, or matrix."""
    if isinstance(x, TwoModeState):
        return np.array(x.block(_single_sector(x)), dtype=complex)
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj()) / np.vdot(arr, arr).real
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return arr
    raise ValueError(f"cannot interpret shape {arr.shape} as a sector state")


def sector_ket(x, purity_tol: float = 1e-10) -> np.ndarray:
    """Normalized sector vector of a pure input; raises for mixed states."""
    if not isinstance(x, TwoModeState):
        arr = np.asarray(x, dtype=complex)
        if arr.ndim == 1:
            norm = np.linalg.norm(arr)
            return arr / norm if norm else arr
    rho = sector_density(x)
    rho = rho / np.trace(rho).real
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if abs(w[-1] - 1) > purity_tol:
        raise ValueError(f"state is mixed (purity {np.sum(w**2):.6g})")
    psi = v[:, -1]
    k = int(np.argmax(np.abs(psi)))
    return psi * np.exp(-1j * np.angle(psi[k]))


def spin_of(rho: np.ndarray) -> float:
    return (rho.shape[0] - 1) / 2
