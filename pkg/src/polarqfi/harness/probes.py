"""Probe families indexed by average photon number."""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import numpy as np

from polarqfi.hilbert import FockBasis, TwoModeState, make_coherent, make_king, make_noon
from polarqfi.polarization.majorana import constellation_vector, load_constellation
from polarqfi.polarization.multipoles import anticoherence_order


class KingUnavailable(LookupError):
    """No shipped constellation for this photon number."""


class KingFileError(ValueError):
    """A constellation file does not deliver the anticoherence order it claims."""


def load_king(path, n: int | None = None):
    """Load a constellation and enforce its claimed anticoherence order."""
    constellation, claimed = load_constellation(path)
    if n is not None and constellation.n != n:
        raise KingFileError(f"{path}: {constellation.n} points, expected {n}")
    if claimed is not None:
        v = constellation_vector(constellation)
        order = anticoherence_order(v / np.linalg.norm(v))
        if order < claimed:
            raise KingFileError(f"{path}: claims anticoherence order {claimed}, computed {order}")
    return constellation


def king_file(n: int, king_dir=None) -> Path:
    name = f"king_n{n:02d}.txt"
    if king_dir is None:
        path = Path(str(resources.files("polarqfi") / "data" / "kings" / name))
    else:
        path = Path(king_dir) / name
    if not path.is_file():
        raise KingUnavailable(f"no King constellation for n={n} ({path})")
    return path


def shipped_king_numbers(king_dir=None) -> list[int]:
    root = Path(str(resources.files("polarqfi") / "data" / "kings")) if king_dir is None else Path(king_dir)
    return sorted(int(p.stem[len("king_n"):]) for p in root.glob("king_n*.txt"))


def make_probe(kind: str, n: int, basis: FockBasis, king_dir=None) -> TwoModeState:
    """NOON and King probes have exactly ``n`` photons; coherent has ``|alpha|^2 = n``."""
    if kind == "noon":
        return make_noon(basis, n)
    if kind == "coherent":
        return make_coherent(basis, math.sqrt(n))
    if kind == "king":
        return make_king(basis, load_king(king_file(n, king_dir), n))
    raise ValueError(f"unknown probe kind {kind!r}")
