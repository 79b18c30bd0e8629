"""Invariant report for an experiment configuration.

Every check records what it measured and the tolerance it was held to, so
a report is useful whether it passes or not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from polarqfi.channels import AnisotropicLindblad, IsotropicLindblad
from polarqfi.errors import CapacityError
from polarqfi.estimation import derivative_through_pipeline, finite_difference_derivative
from polarqfi.harness.config import ExperimentConfig
from polarqfi.harness.probes import KingFileError, KingUnavailable, king_file, make_probe
from polarqfi.hilbert import (
    FockBasis,
    blocks_to_dense,
    blocks_to_packed,
    build_stokes_operators,
    dense_to_blocks,
    safe_subspace_projector,
)
from polarqfi.oracles import integrate_lindblad_rk4
from polarqfi.polarization.majorana import constellation_vector, load_constellation
from polarqfi.polarization.multipoles import anticoherence_order, max_multipole_magnitude
from polarqfi.polarization.sector import sector_ket
from polarqfi.polarization.sphere import wehrl_entropy

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_INVARIANT = 0, 2, 3, 4


@dataclass(frozen=True)
class InvariantResult:
    name: str
    passed: bool
    measured: float | None = None
    tolerance: float | None = None
    detail: str = ""
    category: str = "invariant"

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        parts = [f"{tag}  {self.name}"]
        if self.measured is not None:
            parts.append(f"measured={self.measured:.3e}")
        if self.tolerance is not None:
            parts.append(f"tol={self.tolerance:.1e}")
        if self.detail:
            parts.append(self.detail)
        return "  ".join(parts)


@dataclass
class ValidationReport:
    results: list = field(default_factory=list)

    def add(self, result: InvariantResult):
        self.results.append(result)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_code(self) -> int:
        if any(not r.passed and r.category == "capacity" for r in self.results):
            return EXIT_CAPACITY
        if not self.passed:
            return EXIT_INVARIANT
        return EXIT_OK

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def render(self) -> str:
        lines = [r.line() for r in self.results]
        n_fail = len(self.failures())
        lines.append(f"{len(self.results) - n_fail}/{len(self.results)} checks passed")
        return "\n".join(lines)


def _bounded(name, value, tol, detail="") -> InvariantResult:
    return InvariantResult(name, bool(value <= tol), float(value), tol, detail)


def check_capacity(config, report) -> dict:
    """Build every probe in the grid; returns the probes that fit."""
    basis = FockBasis(config.cutoff)
    probes = {}
    for kind in config.probe.kinds:
        for n in config.photon_grid:
            try:
                probes[(kind, n)] = make_probe(kind, n, basis, config.probe.king_dir)
            except (KingUnavailable, KingFileError):
                continue  # reported by check_king_files
            except CapacityError as exc:
                report.add(InvariantResult(f"capacity {kind} n={n}", False, detail=str(exc), category="capacity"))
    if not any(r.category == "capacity" for r in report.results):
        report.add(InvariantResult("capacity: all grid probes fit the cutoff", True, detail=f"cutoff={config.cutoff}"))
    return probes


def check_operator_algebra(config, report):
    basis = FockBasis(config.cutoff)
    s0, s1, s2, s3 = (op.matrix for op in build_stokes_operators(basis))
    p = safe_subspace_projector(basis)
    err = 0.0
    for x, y, z in ((s1, s2, s3), (s2, s3, s1), (s3, s1, s2)):
        err = max(err, np.max(np.abs(p @ (x @ y - y @ x - 1j * z) @ p)))
    report.add(_bounded("su(2) commutators [S_j, S_k] = i S_l", err, 1e-12))
    cas = s1 @ s1 + s2 @ s2 + s3 @ s3 - s0 @ (s0 + np.eye(basis.dim))
    report.add(_bounded("Casimir S1^2 + S2^2 + S3^2 = S0 (S0 + 1)", np.max(np.abs(p @ cas @ p)), 1e-10))


def _stages(config):
    pc = config.pipeline
    return [s for s in (pc.retarder, pc.diattenuator, pc.depolarizer) if s is not None]


def choi_matrix(stage, cutoff: int) -> np.ndarray:
    """Choi matrix of a stage on the full two-mode space at ``cutoff``.

    Only inputs inside the represented sectors are used, so the map is
    probed on the subspace the package actually evolves.
    """
    basis = FockBasis(cutoff)
    idx = np.concatenate([basis.sector_indices(n) for n in range(cutoff)])
    d = basis.dim
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i in idx:
        for j in idx:
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            out = stage.apply_blocks(basis, dense_to_blocks(basis, e))
            choi += np.kron(np.outer(np.eye(d)[i], np.eye(d)[j]), blocks_to_dense(basis, out))
    return choi, idx


def check_cptp(config, report, cutoff: int = 4):
    for stage in _stages(config):
        name = type(stage).__name__
        choi, idx = choi_matrix(stage, cutoff)
        lam = np.linalg.eigvalsh((choi + choi.conj().T) / 2)
        report.add(_bounded(f"CP: Choi matrix of {name} is positive", max(0.0, -lam[0]), 1e-10))
        d = cutoff**2
        # partial trace over the output must be the identity on the probed inputs
        ptr = np.einsum("iaja->ij", choi.reshape(d, d, d, d))
        err = np.max(np.abs(ptr[np.ix_(idx, idx)] - np.eye(len(idx))))
        report.add(_bounded(f"TP: {name} preserves the trace", err, 1e-10))


def check_outputs(config, probes, report):
    worst_tr, worst_neg, worst_herm = 0.0, 0.0, 0.0
    for order in config.pipeline.orders:
        pipe = config.pipeline.build(order)
        for (kind, n), probe in probes.items():
            swd = derivative_through_pipeline(probe, pipe, config.theta)
            p = swd.rho.packed()
            worst_tr = max(worst_tr, abs(np.trace(p) - 1))
            worst_herm = max(worst_herm, np.max(np.abs(p - p.conj().T)))
            worst_neg = max(worst_neg, -np.linalg.eigvalsh((p + p.conj().T) / 2)[0])
    if probes:
        report.add(_bounded("output states: |Tr rho - 1|", worst_tr, 1e-10))
        report.add(_bounded("output states: Hermiticity", worst_herm, 1e-12))
        report.add(_bounded("output states: most negative eigenvalue", max(0.0, worst_neg), 1e-10))


def check_derivatives(config, probes, report, h: float = 1e-5):
    worst, where = 0.0, ""
    for order in config.pipeline.orders:
        pipe = config.pipeline.build(order)
        for (kind, n), probe in probes.items():
            analytic = derivative_through_pipeline(probe, pipe, config.theta).drho_packed()
            fd = finite_difference_derivative(probe, pipe, config.theta, h)
            err = float(np.max(np.abs(analytic - fd)))
            if err >= worst:
                worst, where = err, f"worst at {kind} n={n} {order}"
    if probes:
        report.add(_bounded("derivative: analytic vs central difference", worst, 1e-7, where))


def check_lindblad(config, probes, report):
    dep = config.pipeline.depolarizer
    if not isinstance(dep, (IsotropicLindblad, AnisotropicLindblad)) or not probes:
        return
    kind, n = min(probes, key=lambda k: (k[1], k[0]))
    blocks = probes[(kind, n)].blocks
    basis = FockBasis(config.cutoff)
    exact = blocks_to_packed(basis, dep.apply_blocks(basis, blocks))
    rk4 = blocks_to_packed(basis, integrate_lindblad_rk4(blocks, dep.rates))
    report.add(_bounded("Lindblad: matrix exponential vs RK4", np.max(np.abs(exact - rk4)), 1e-8, f"{kind} n={n}"))


def check_wehrl(config, probes, report):
    worst, detail = -math.inf, ""
    for (kind, n), probe in probes.items():
        if kind == "coherent":
            continue
        S = n / 2
        w = wehrl_entropy(sector_ket(probe))
        gap = 2 * S / (2 * S + 1) - w
        if gap > worst:
            worst, detail = gap, f"{kind} n={n}: W={w:.6f}"
    if worst > -math.inf:
        report.add(InvariantResult("Wehrl entropy >= 2S/(2S+1)", worst <= 1e-9, max(worst, 0.0), 1e-9, detail))


def check_king_files(config, report):
    if "king" not in config.probe.kinds:
        return
    for n in config.photon_grid:
        try:
            path = king_file(n, config.probe.king_dir)
        except KingUnavailable:
            report.add(InvariantResult(f"King n={n}: constellation file", True, detail="not shipped; rows marked unavailable"))
            continue
        constellation, claimed = load_constellation(path)
        v = constellation_vector(constellation)
        v = v / np.linalg.norm(v)
        order = anticoherence_order(v)
        if claimed is None:
            report.add(InvariantResult(f"King n={n}: anticoherence", True, detail=f"order {order} (no claim in file)"))
            continue
        mags = {K: max_multipole_magnitude(v, K) for K in range(1, claimed + 1)}
        listing = ", ".join(f"max |rho_{K}q| = {m:.3e}" for K, m in mags.items())
        worst = max(mags.values(), default=0.0)
        report.add(
            InvariantResult(
                f"King n={n}: anticoherent to order {claimed}",
                order >= claimed,
                worst,
                1e-9,
                f"{path.name}: computed order {order}; {listing}",
            )
        )


def validate(config: ExperimentConfig) -> ValidationReport:
    report = ValidationReport()
    probes = check_capacity(config, report)
    check_operator_algebra(config, report)
    check_cptp(config, report)
    check_outputs(config, probes, report)
    check_derivatives(config, probes, report)
    check_lindblad(config, probes, report)
    check_wehrl(config, probes, report)
    check_king_files(config, report)
    return report
