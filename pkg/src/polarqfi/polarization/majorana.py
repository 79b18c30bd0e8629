"""Majorana constellations of single-sector pure states.

A point ``(theta, phi)`` stands for the creation operator
``cos(theta/2) a^dag + e^{i phi} sin(theta/2) b^dag``, so the north pole is
``|1, 0>`` and the Stokes direction of a point is
``(sin theta cos phi, sin theta sin phi, cos theta)`` in ``(S1, S2, S3)``.

The stellar polynomial uses ``a^dag -> z``, ``b^dag -> -1``, whose roots are
``z_k = e^{i phi_k} tan(theta_k / 2)``; a degree drop of ``d`` puts ``d``
points at the south pole (``z = inf``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from polarqfi.errors import CapacityError
from polarqfi.hilbert import FockBasis, TwoModeState, state_from_ket

ROOT_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class MajoranaConstellation:
    points: tuple

    def __post_init__(self):
        cleaned = []
        for theta, phi in self.points:
            theta, phi = float(theta), float(phi)
            if not (math.isfinite(theta) and math.isfinite(phi)):
                raise ValueError("constellation point is not finite")
            if not -1e-12 <= theta <= math.pi + 1e-12:
                raise ValueError(f"polar angle {theta} outside [0, pi]")
            cleaned.append((min(max(theta, 0.0), math.pi), phi % (2 * math.pi)))
        object.__setattr__(self, "points", tuple(cleaned))

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def S(self) -> float:
        return self.n / 2

    def unit_vectors(self) -> np.ndarray:
        th = np.array([p[0] for p in self.points])
        ph = np.array([p[1] for p in self.points])
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)


def load_constellation(path) -> tuple[MajoranaConstellation, int | None]:
    """Read ``theta phi`` lines (radians, ``#`` comments).

    A comment ``# anticoherence_order: K`` declares the order the file claims;
    it is returned alongside the constellation (``None`` when absent).
    """
    points, claimed = [], None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("anticoherence_order:"):
                claimed = int(body.split(":", 1)[1])
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'theta phi', got {raw!r}")
        theta, phi = float(parts[0]), float(parts[1])
        if math.isnan(theta) or math.isnan(phi):
            raise ValueError(f"{path}:{lineno}: NaN coordinate")
        if not 0.0 <= theta <= math.pi + 1e-12:
            raise ValueError(f"{path}:{lineno}: polar angle {theta} outside [0, pi]")
        points.append((theta, phi))
    if not points:
        raise ValueError(f"{path}: no points")
    return MajoranaConstellation(tuple(points)), claimed


def save_constellation(path, constellation: MajoranaConstellation, claimed_order=None, comment=""):
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    if claimed_order is not None:
        lines.append(f"# anticoherence_order: {claimed_order}")
    lines += [f"{t:.17g} {p:.17g}" for t, p in constellation.points]
    Path(path).write_text("\n".join(lines) + "\n")


def constellation_vector(constellation: MajoranaConstellation) -> np.ndarray:
    """Unnormalized sector vector of ``prod_k a^dag_{u_k} |0,0>`` (local index j = n2)."""
    n = constellation.n
    # poly[i] = coefficient of (a^dag)^(n_so_far - i) (b^dag)^i
    poly = np.array([1.0 + 0j])
    for theta, phi in constellation.points:
        ca, cb = math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)
        nxt = np.zeros(len(poly) + 1, dtype=complex)
        nxt[:-1] += ca * poly
        nxt[1:] += cb * poly
        poly = nxt
    j = np.arange(n + 1)
    scale = np.array([math.sqrt(math.factorial(n - jj) * math.factorial(jj)) for jj in j])
    return poly * scale


def constellation_to_state(basis: FockBasis, constellation: MajoranaConstellation) -> TwoModeState:
    n = constellation.n
    if n > basis.max_sector:
        raise CapacityError(f"{n}-point constellation needs cutoff > {n}, have {basis.cutoff}")
    vec = constellation_vector(constellation)
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.sector_indices(n)] = vec
    return state_from_ket(basis, psi)


def _disjoint_pair_sums(dots: np.ndarray, k: int) -> float:
    """Sum over sets of ``k`` disjoint index pairs of the product of dot products."""
    n = dots.shape[0]

    def rec(available: tuple, k_left: int) -> float:
        if k_left == 0:
            return 1.0
        if len(available) < 2 * k_left:
            return 0.0
        first, rest = available[0], available[1:]
        # either `first` is unpaired, or it pairs with some later index
        total = rec(rest, k_left)
        for idx, partner in enumerate(rest):
            remaining = rest[:idx] + rest[idx + 1:]
            total += dots[first, partner] * rec(remaining, k_left - 1)
        return total

    return rec(tuple(range(n)), k)


def normalization_factor(constellation: MajoranaConstellation) -> float:
    """Norm of the unnormalized product state from the pair-sum formula.

    ``N^2 = (n+1)!/2^n * sum_k D_k / (2k+1)!!`` with ``D_k`` the sum over
    ``k`` disjoint pairs of products of point dot products.  Exponential in
    ``n``; intended as an independent check for small constellations.
    """
    n = constellation.n
    u = constellation.unit_vectors()
    dots = u @ u.T
    total = 0.0
    for k in range(n // 2 + 1):
        dfact = math.prod(range(1, 2 * k + 2, 2))
        total += _disjoint_pair_sums(dots, k) / dfact
    return math.sqrt(math.factorial(n + 1) / 2**n * total)


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of ``sum coeffs[i] z^(deg - i)`` (highest degree first, nonzero lead)."""
    c = coeffs / coeffs[0]
    deg = len(c) - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((deg, deg), dtype=complex)
    comp[0, :] = -c[1:]
    comp[1:, :-1] = np.eye(deg - 1)
    roots = np.linalg.eigvals(comp)
    dpoly = np.polyder(c)
    for i, z in enumerate(roots):
        d = np.polyval(dpoly, z)
        if d != 0:
            roots[i] = z - np.polyval(c, z) / d
    scale = np.sum(np.abs(c))
    for z in roots:
        resid = abs(np.polyval(c, z)) / (scale * max(1.0, abs(z)) ** deg)
        if resid > ROOT_RESIDUAL_TOL:
            raise ArithmeticError(f"root finder did not converge (residual {resid:.3g})")
    return roots


def stellar_coefficients(psi_sector: np.ndarray) -> np.ndarray:
    """Stellar polynomial coefficients, highest degree first."""
    psi = np.asarray(psi_sector, dtype=complex)
    n = len(psi) - 1
    j = np.arange(n + 1)
    binom = np.array([math.comb(n, jj) for jj in j], dtype=float)
    return psi * (-1.0) ** j * np.sqrt(binom)


def majorana_roots(psi_sector) -> MajoranaConstellation:
    """Constellation of a pure single-sector state.

    Accepts a sector vector (local index ``j = n2``) or a pure
    ``TwoModeState`` supported on one sector.
    """
    from polarqfi.polarization.sector import sector_ket

    psi = sector_ket(psi_sector)
    if not np.any(np.abs(psi) > 0):
        raise ValueError("zero vector has no constellation")
    coeffs = stellar_coefficients(psi)
    tol = 1e-12 * np.max(np.abs(coeffs))
    lead = 0
    while abs(coeffs[lead]) <= tol:
        lead += 1
    roots = _companion_roots(coeffs[lead:])
    points = [(2 * math.atan(abs(z)), float(np.angle(z))) for z in roots]
    points += [(math.pi, 0.0)] * lead
    return MajoranaConstellation(tuple(points))


def bloch_coherent_vector(n: int, theta: float, phi: float) -> np.ndarray:
    """Normalized sector vector of ``n`` coincident points at ``(theta, phi)``."""
    j = np.arange(n + 1)
    binom = np.array([math.comb(n, jj) for jj in j], dtype=float)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.sqrt(binom) * c ** (n - j) * (np.exp(1j * phi) * s) ** j


def bloch_coherent_state(basis: FockBasis, n: int, theta: float, phi: float) -> TwoModeState:
    return constellation_to_state(basis, MajoranaConstellation(((theta, phi),) * n))
