"""Regenerate regression.json from the oracle route.

The frozen values are computed without the library's channel code: the
diattenuator through the four-mode ancilla unitary, the retarder as a dense
matrix exponential and the depolarizer by RK4 integration.  Run from the
repository root with ``python tests/fixtures/make_regression.py``.
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from polarqfi.channels import ConvexRotations, DiattenuatorSpec, IsotropicLindblad
from polarqfi.hilbert import (
    FockBasis,
    RotationAxis,
    blocks_to_dense,
    build_stokes_operators,
    dense_to_blocks,
    make_noon,
)
from polarqfi.oracles import ancilla_diattenuator, integrate_lindblad_rk4
from polarqfi.polarization.majorana import constellation_vector, load_constellation
from polarqfi.polarization.sphere import wehrl_entropy
from polarqfi.harness.probes import king_file

THETA = math.pi / 10
AXIS = RotationAxis(math.pi / 5, 0.0)


def dense_forward(rho, basis, theta, dia, rates):
    ops = build_stokes_operators(basis)
    v = AXIS.vector
    g = sum(v[k] * ops[k + 1].matrix for k in range(3))
    rho = ancilla_diattenuator(rho, dia, basis.cutoff)
    u = expm(1j * theta * g)
    rho = u @ rho @ u.conj().T
    return blocks_to_dense(basis, integrate_lindblad_rk4(dense_to_blocks(basis, rho), rates, steps=4000))


def qfi_eq25(rho, drho):
    lam, vec = np.linalg.eigh(rho)
    lam = np.clip(lam, 0, None)
    d = vec.conj().T @ drho @ vec
    den = lam[:, None] + lam[None, :]
    keep = den > 1e-12
    return float(2 * np.sum(np.abs(d[keep]) ** 2 / den[keep]))


def main():
    basis = FockBasis(3)
    rho0 = make_noon(basis, 2).to_dense()
    dia = DiattenuatorSpec(0.9, 0.9)
    out = dense_forward(rho0, basis, THETA, dia, IsotropicLindblad(0.003).rates)

    # mixed QFI of the retarder + isotropic stage from a finite-difference derivative
    iso = IsotropicLindblad(0.003)
    ops = build_stokes_operators(basis)
    v = AXIS.vector
    g = sum(v[k] * ops[k + 1].matrix for k in range(3))

    def through(theta):
        u = expm(1j * theta * g)
        blocks = dense_to_blocks(basis, u @ rho0 @ u.conj().T)
        return blocks_to_dense(basis, integrate_lindblad_rk4(blocks, iso.rates, steps=4000))

    h = 1e-5
    qfi_iso = qfi_eq25(through(THETA), (through(THETA + h) - through(THETA - h)) / (2 * h))

    convex = ConvexRotations()
    noon2 = make_noon(FockBasis(3), 2)
    purity_convex = float(np.real(np.trace(np.linalg.matrix_power(
        blocks_to_dense(noon2.basis, convex.apply_blocks(noon2.basis, noon2.blocks)), 2))))

    c, _ = load_constellation(king_file(4))
    psi = constellation_vector(c)
    wehrl_tetra = wehrl_entropy(psi / np.linalg.norm(psi))

    doc = {
        "forward_noon2": {
            "description": "NOON N=2, q=r=0.9, isotropic nu_t=0.003, theta=pi/10, axis (pi/5, 0), cutoff 3",
            "real": out.real.tolist(),
            "imag": out.imag.tolist(),
        },
        "qfi_noon2_isotropic": qfi_iso,
        "purity_noon2_convex": purity_convex,
        "wehrl_tetrahedron": wehrl_tetra,
    }
    path = Path(__file__).with_name("regression.json")
    path.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
