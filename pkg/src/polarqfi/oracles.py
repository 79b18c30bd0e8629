"""Independent reference computations used to cross-check the main code path.

Nothing here is used by the sweep itself.  Each routine takes a different
route to a quantity the library computes more cleverly: a four-mode ancilla
model of the diattenuator, direct Runge-Kutta integration of the Lindblad
equation, and the variance formula for pure-state QFI.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from polarqfi.channels import DiattenuatorSpec
from polarqfi.hilbert import (
    Blocks,
    FockBasis,
    RotationAxis,
    TwoModeState,
    build_stokes_operators,
    sector_stokes,
)


def _destroy(c: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, c)), 1)


def _pair_generators(ops, i: int, j: int):
    x, y = ops[i], ops[j]
    s2 = -0.5j * (x.conj().T @ y - y.conj().T @ x)
    s3 = 0.5 * (x.conj().T @ x - y.conj().T @ y)
    return s2, s3


def ancilla_diattenuator(rho: np.ndarray, spec: DiattenuatorSpec, cutoff: int = 3) -> np.ndarray:
    """Diattenuator as a unitary on modes ``(a, b, v1, v2)`` followed by a partial trace.

    ``U = R_ab^dag B_b(r) B_a(q) R_ab`` where ``R_ab = exp(-i beta S2) exp(-i gamma S3)``
    on the signal pair and ``B_x(t) = exp(-i phi S2^(x, v))`` mixes a signal mode
    with its vacuum ancilla at ``phi = -2 arccos(sqrt(t))``.  ``rho`` is a dense
    two-mode matrix of size ``cutoff**2`` supported on at most ``cutoff - 1`` photons.
    """
    c = cutoff
    eye = np.eye(c)
    a = _destroy(c)
    ops = []
    for k in range(4):
        factors = [eye] * 4
        factors[k] = a
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        ops.append(op)
    s2ab, s3ab = _pair_generators(ops, 0, 1)
    r_ab = expm(-1j * spec.beta * s2ab) @ expm(-1j * spec.gamma * s3ab)
    s2a, _ = _pair_generators(ops, 0, 2)
    s2b, _ = _pair_generators(ops, 1, 3)
    b_a = expm(-1j * (-2 * math.acos(math.sqrt(spec.q))) * s2a)
    b_b = expm(-1j * (-2 * math.acos(math.sqrt(spec.r))) * s2b)
    u = r_ab.conj().T @ b_b @ b_a @ r_ab
    vac = np.zeros((c * c, c * c))
    vac[0, 0] = 1.0
    big = np.kron(rho, vac)
    out = (u @ big @ u.conj().T).reshape(c * c, c * c, c * c, c * c)
    return np.einsum("ikjk->ij", out)


def integrate_lindblad_rk4(blocks: Blocks, rates: tuple, steps: int = 2000) -> dict:
    """Integrate ``d rho/dt = sum_k r_k D(S_k) rho`` over unit time with classical RK4.

    ``D(A) X = 2 A X A^dag - A^dag A X - X A^dag A`` is applied with explicit
    matrix products per block, with no superoperator or exponential.
    """
    dt = 1.0 / steps
    out = {}
    for (n, m), b in blocks.items():
        sn, sm = sector_stokes(n), sector_stokes(m)
        terms = [(r, sn[k], sm[k]) for k, r in enumerate(rates) if r]

        def f(x):
            acc = np.zeros_like(x, dtype=complex)
            for r, an, am in terms:
                acc += r * (2 * an @ x @ am.conj().T - an.conj().T @ an @ x - x @ am.conj().T @ am)
            return acc

        x = np.array(b, dtype=complex)
        for _ in range(steps):
            k1 = f(x)
            k2 = f(x + 0.5 * dt * k1)
            k3 = f(x + 0.5 * dt * k2)
            k4 = f(x + dt * k3)
            x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[(n, m)] = x
    return out


def variance_qfi(state: TwoModeState, axis: RotationAxis) -> float:
    """``4 Var(n.S)`` for a pure state, from dense full-space operators."""
    psi = state.ket()
    ops = build_stokes_operators(state.basis)
    v = axis.vector
    g = v[0] * ops[1].matrix + v[1] * ops[2].matrix + v[2] * ops[3].matrix
    mean = np.vdot(psi, g @ psi).real
    sq = np.vdot(psi, g @ (g @ psi)).real
    return 4 * (sq - mean**2)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_low_photon_density(basis: FockBasis, max_photons: int, rng: np.random.Generator) -> np.ndarray:
    """Random dense two-mode state supported on ``n1 + n2 <= max_photons``."""
    idx = [basis.index(n1, n - n1) for n in range(max_photons + 1) for n1 in range(n + 1)]
    sub = random_density(len(idx), rng)
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    rho[np.ix_(idx, idx)] = sub
    return rho
