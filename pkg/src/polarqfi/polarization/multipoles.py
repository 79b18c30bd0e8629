"""Clebsch-Gordan coefficients, state multipoles and anticoherence."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import sph_harm_y

from polarqfi.polarization.sector import sector_density, sector_ket, spin_of
from polarqfi.polarization.sphere import SphereGrid

ANTICOHERENCE_TOL = 1e-9


def _twice(x, name) -> int:
    t = 2 * x
    if abs(t - round(t)) > 1e-9:
        raise ValueError(f"{name}={x} is not a half-integer")
    return int(round(t))


@lru_cache(maxsize=None)
def _cg_twice(j1, m1, j2, m2, J, M) -> float:
    # all arguments doubled
    if m1 + m2 != M:
        return 0.0
    if not (abs(j1 - j2) <= J <= j1 + j2) or (j1 + j2 + J) % 2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return 0.0
    if (j1 + m1) % 2 or (j2 + m2) % 2 or (J + M) % 2:
        return 0.0
    f = math.factorial

    def h(x):  # half of a doubled integer combination
        return x // 2

    pre = Fraction(
        (J + 1) * f(h(J + j1 - j2)) * f(h(J - j1 + j2)) * f(h(j1 + j2 - J)),
        f(h(j1 + j2 + J) + 1),
    )
    pre *= f(h(J + M)) * f(h(J - M)) * f(h(j1 - m1)) * f(h(j1 + m1)) * f(h(j2 - m2)) * f(h(j2 + m2))
    total = Fraction(0)
    for k in range(0, h(j1 + j2 - J) + 1):
        args = (
            h(j1 + j2 - J) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(J - j2 + m1) + k,
            h(J - j1 - m2) + k,
        )
        if min(args) < 0:
            continue
        den = f(k)
        for a in args:
            den *= f(a)
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    # sqrt(pre) * |total| evaluated as sqrt(pre * total^2) to stay exact until the end
    return sign * math.sqrt(pre * total * total)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """``<j1 m1; j2 m2 | J M>`` (Condon-Shortley), Racah formula in exact rationals.

    Selection-rule violations return 0; non-half-integer input raises.
    """
    args = [_twice(v, n) for v, n in zip((j1, m1, j2, m2, J, M), ("j1", "m1", "j2", "m2", "J", "M"))]
    if args[0] < 0 or args[2] < 0 or args[4] < 0:
        raise ValueError("angular momenta must be non-negative")
    return _cg_twice(*args)


def stretched_cg(S, K) -> float:
    """Closed form of ``<S S; K 0 | S S>``."""
    n = int(round(2 * S))
    return math.sqrt(2 * S + 1) * math.factorial(n) / math.sqrt(
        math.factorial(n - K) * math.factorial(n + 1 + K)
    )


@lru_cache(maxsize=None)
def irreducible_tensors(n: int) -> dict:
    """``T_Kq`` for spin ``S = n/2`` in local basis ``j = S - m``.

    Orthonormality ``Tr[T_Kq T_K'q'^dag] = delta delta`` is verified to 1e-12.
    """
    S = n / 2
    ms = [S - j for j in range(n + 1)]
    tensors = {}
    for K in range(n + 1):
        for q in range(-K, K + 1):
            t = np.zeros((n + 1, n + 1))
            for jm, m in enumerate(ms):
                mp = m + q
                if abs(mp) > S + 1e-9:
                    continue
                jmp = int(round(S - mp))
                t[jmp, jm] = clebsch_gordan(S, m, K, q, S, mp)
            t *= math.sqrt((2 * K + 1) / (2 * S + 1))
            tensors[(K, q)] = t
    keys = list(tensors)
    gram = np.array([[np.trace(tensors[a] @ tensors[b].T) for b in keys] for a in keys])
    err = np.max(np.abs(gram - np.eye(len(keys))))
    if err > 1e-12:
        raise ArithmeticError(f"tensor basis not orthonormal (err {err:.3g})")
    return tensors


@dataclass(frozen=True)
class StateMultipoles:
    """``rho_Kq`` stored as ``rho_Kq[K, q + 2S]``; unused slots are zero."""

    S: float
    rho_Kq: np.ndarray

    @property
    def n(self) -> int:
        return int(round(2 * self.S))

    def get(self, K: int, q: int) -> complex:
        if not 0 <= K <= self.n or abs(q) > K:
            raise IndexError((K, q))
        return complex(self.rho_Kq[K, q + self.n])

    def power(self, K: int) -> float:
        """``sum_q |rho_Kq|^2``."""
        return float(np.sum(np.abs(self.rho_Kq[K]) ** 2))

    def rows(self):
        for K in range(self.n + 1):
            for q in range(-K, K + 1):
                v = self.get(K, q)
                yield K, q, v.real, v.imag

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["K", "q", "Re", "Im"])
            for K, q, re, im in self.rows():
                w.writerow([K, q, f"{re:.15g}", f"{im:.15g}"])


def state_multipoles(rho_sector) -> StateMultipoles:
    rho = sector_density(rho_sector)
    n = rho.shape[0] - 1
    tensors = irreducible_tensors(n)
    table = np.zeros((n + 1, 2 * n + 1), dtype=complex)
    for (K, q), t in tensors.items():
        table[K, q + n] = np.trace(rho @ t.T)  # Tr(rho T^dag), T real
    return StateMultipoles(n / 2, table)


def cumulative_multipole(multipoles: StateMultipoles, M: int) -> float:
    """``A_M = sum_{K=1}^{M} sum_q |rho_Kq|^2``."""
    if not 0 <= M <= multipoles.n:
        raise ValueError(f"M={M} outside [0, {multipoles.n}]")
    return sum(multipoles.power(K) for K in range(1, M + 1))


def anticoherence_order(psi_sector, tol: float = ANTICOHERENCE_TOL) -> int:
    """Largest ``M`` with ``rho_Kq = 0`` for all ``1 <= K <= M`` (pure input only)."""
    psi = sector_ket(psi_sector)
    mp = state_multipoles(psi)
    order = 0
    for K in range(1, mp.n + 1):
        if np.max(np.abs(mp.rho_Kq[K])) > tol:
            break
        order = K
    return order


def max_multipole_magnitude(psi_sector, K: int) -> float:
    return float(np.max(np.abs(state_multipoles(psi_sector).rho_Kq[K])))


def q_multipole_component(multipoles: StateMultipoles, K: int, grid: SphereGrid) -> np.ndarray:
    """``Q^(K) = sqrt(4 pi/(2S+1)) C^{SS}_{SS,K0} sum_q rho_Kq Y_Kq`` on the grid.

    With the north pole at ``|S, S>`` the harmonic enters unconjugated; the
    components sum to ``husimi_q``.
    """
    S = multipoles.S
    if not 0 <= K <= multipoles.n:
        raise ValueError(f"K={K} outside [0, {multipoles.n}]")
    pref = math.sqrt(4 * math.pi / (2 * S + 1)) * clebsch_gordan(S, S, K, 0, S, S)
    total = np.zeros(len(grid), dtype=complex)
    for q in range(-K, K + 1):
        total += multipoles.get(K, q) * sph_harm_y(K, q, grid.theta, grid.phi)
    return np.real(pref * total)


def multipole_powers(rho_sector) -> np.ndarray:
    mp = state_multipoles(rho_sector)
    return np.array([mp.power(K) for K in range(mp.n + 1)])

