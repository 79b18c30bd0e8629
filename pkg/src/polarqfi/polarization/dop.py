from __future__ import annotations

import numpy as np

from polarqfi.errors import UndefinedDOPError
from polarqfi.hilbert import TwoModeState, sector_stokes


def stokes_vector(rho: TwoModeState) -> np.ndarray:
    """``(<S0>, <S1>, <S2>, <S3>)`` summed over the diagonal sector blocks."""
    out = np.zeros(4)
    for (n, m), b in rho.blocks.items():
        if n != m:
            continue
        ops = sector_stokes(n)
        for k in range(4):
            out[k] += np.real(np.trace(ops[k] @ b))
    return out


def semiclassical_dop(rho: TwoModeState) -> float:
    """``|<S>| / <S0>``; raises ``UndefinedDOPError`` for the vacuum."""
    s = stokes_vector(rho)
    if s[0] <= 1e-14:
        raise UndefinedDOPError("degree of polarization undefined for <S0> = 0")
    return float(np.linalg.norm(s[1:]) / s[0])
