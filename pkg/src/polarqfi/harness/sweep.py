"""Grid sweeps of the QFI over probes, photon numbers and channel orderings."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from polarqfi.channels import ChannelPipeline, ConvexRotations
from polarqfi.errors import CapacityError
from polarqfi.estimation import derivative_through_pipeline, qfi_mixed
from polarqfi.harness.config import ExperimentConfig
from polarqfi.harness.probes import KingFileError, KingUnavailable, make_probe
from polarqfi.hilbert import FockBasis

log = logging.getLogger(__name__)

CSV_COLUMNS = ("probe", "n", "order", "depolarizer", "strength", "q", "r", "qfi", "dropped", "status", "wall_time")


@dataclass(frozen=True)
class SweepRow:
    probe: str
    n: int
    order: str
    depolarizer: str
    strength: float
    q: float
    r: float
    qfi: float
    dropped: int
    status: str = "ok"
    wall_time: float = 0.0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def sort_key(self):
        return (self.probe, self.n, self.order)

    def csv_fields(self) -> list[str]:
        return [
            self.probe,
            str(self.n),
            self.order,
            self.depolarizer,
            f"{self.strength:.12g}",
            f"{self.q:.12g}",
            f"{self.r:.12g}",
            f"{self.qfi:.12g}",
            str(self.dropped),
            self.status,
            f"{self.wall_time:.4f}",
        ]


def point_qfi(config: ExperimentConfig, kind: str, n: int, order: str):
    """QFI and dropped-pair count at one grid point."""
    basis = FockBasis(config.cutoff)
    probe = make_probe(kind, n, basis, config.probe.king_dir)
    pc = config.pipeline
    dep = pc.depolarizer
    if isinstance(dep, ConvexRotations) and pc.convex_average == "qfi":
        values, dropped = [], 0
        for single in dep.single_orderings():
            pipe = ChannelPipeline.build(order, pc.retarder, pc.diattenuator, single)
            res = qfi_mixed(derivative_through_pipeline(probe, pipe, config.theta))
            values.append(res.value)
            dropped += res.spectrum_cut
        return float(np.mean(values)), dropped
    res = qfi_mixed(derivative_through_pipeline(probe, pc.build(order), config.theta))
    return res.value, res.spectrum_cut


def evaluate_point(config: ExperimentConfig, kind: str, n: int, order: str) -> SweepRow:
    pc = config.pipeline
    dia = pc.diattenuator
    common = dict(
        probe=kind,
        n=n,
        order=order,
        depolarizer=pc.depolarizer_tag,
        strength=pc.depolarizer_strength,
        q=1.0 if dia is None else dia.q,
        r=1.0 if dia is None else dia.r,
    )
    start = time.perf_counter()
    try:
        value, dropped = point_qfi(config, kind, n, order)
    except KingUnavailable as exc:
        return SweepRow(**common, qfi=math.nan, dropped=0, status="unavailable", message=str(exc))
    except KingFileError as exc:
        return SweepRow(**common, qfi=math.nan, dropped=0, status="invalid", message=str(exc))
    except CapacityError as exc:
        log.info("%s n=%d %s: %s", kind, n, order, exc)
        return SweepRow(**common, qfi=math.nan, dropped=0, status="failed", message=str(exc))
    return SweepRow(**common, qfi=value, dropped=dropped, wall_time=time.perf_counter() - start)


def grid_points(config: ExperimentConfig) -> list[tuple[str, int, str]]:
    return [(k, n, o) for k in config.probe.kinds for n in config.photon_grid for o in config.pipeline.orders]


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(config: ExperimentConfig, workers: int = 1, csv_path=None) -> list[SweepRow]:
    """Evaluate every grid point; rows come back sorted by ``(probe, n, order)``.

    ``csv_path`` defaults to ``config.outputs["csv"]`` when present.
    """
    tasks = [(config, *p) for p in grid_points(config)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate, tasks))
    else:
        rows = [_evaluate(t) for t in tasks]
    rows.sort(key=SweepRow.sort_key)
    csv_path = csv_path if csv_path is not None else config.outputs.get("csv")
    if csv_path:
        write_csv(rows, csv_path)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def write_csv(rows, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                SweepRow(
                    probe=rec["probe"],
                    n=int(rec["n"]),
                    order=rec["order"],
                    depolarizer=rec["depolarizer"],
                    strength=float(rec["strength"]),
                    q=float(rec["q"]),
                    r=float(rec["r"]),
                    qfi=float(rec["qfi"]),
                    dropped=int(rec["dropped"]),
                    status=rec["status"],
                    wall_time=float(rec["wall_time"]),
                )
            )
    return rows
