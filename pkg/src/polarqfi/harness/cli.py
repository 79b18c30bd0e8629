"""Command line entry point: ``polarqfi run | validate | probe``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from polarqfi.errors import CapacityError, ConfigError, UndefinedDOPError
from polarqfi.harness.config import load_config
from polarqfi.harness.plotting import emit_plot
from polarqfi.harness.probes import KingUnavailable, king_file
from polarqfi.harness.sweep import run_sweep
from polarqfi.harness.validate import EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK, validate
from polarqfi.hilbert import FockBasis, make_king, make_noon
from polarqfi.polarization.dop import semiclassical_dop
from polarqfi.polarization.majorana import load_constellation
from polarqfi.polarization.multipoles import anticoherence_order, state_multipoles
from polarqfi.polarization.sector import sector_ket
from polarqfi.polarization.sphere import q_dop, wehrl_entropy


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out = args.out or config.outputs.get("csv")
    if not out:
        raise ConfigError("no CSV path: pass --out or set outputs.csv")
    rows = run_sweep(config, workers=args.workers, csv_path=out)
    n_ok = sum(r.ok for r in rows)
    print(f"wrote {len(rows)} rows to {out} ({n_ok} ok)")
    for r in rows:
        if not r.ok:
            print(f"  {r.status}: {r.probe} n={r.n} {r.order}: {r.message}")
    plot = args.plot or config.outputs.get("plot")
    if plot:
        try:
            emit_plot(rows, plot, title=Path(args.config).stem)
            print(f"wrote plot {plot}")
        except ValueError as exc:
            print(f"plot skipped: {exc}", file=sys.stderr)
    if any(r.status == "failed" for r in rows):
        return EXIT_CAPACITY
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    report = validate(config)
    print(report.render())
    return report.exit_code


def _probe_state(args):
    if args.kind == "noon":
        if args.n is None:
            raise ConfigError("--n is required for a NOON probe")
        return f"NOON n={args.n}", make_noon(FockBasis(args.n + 1), args.n)
    if args.file:
        path = Path(args.file)
    elif args.n is not None:
        path = king_file(args.n)
    else:
        raise ConfigError("a King probe needs --file or --n")
    try:
        constellation, claimed = load_constellation(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    label = f"King {path.name} ({constellation.n} points"
    label += f", claimed order {claimed})" if claimed is not None else ")"
    return label, make_king(FockBasis(constellation.n + 1), constellation)


def _cmd_probe(args) -> int:
    label, state = _probe_state(args)
    psi = sector_ket(state)
    n = len(psi) - 1
    print(label)
    if args.report or not args.multipoles:
        print(f"photons: {n}  (S = {n / 2:g})")
        print(f"anticoherence order: {anticoherence_order(psi)}")
        try:
            print(f"degree of polarization (Stokes): {semiclassical_dop(state):.12g}")
        except UndefinedDOPError as exc:
            print(f"degree of polarization (Stokes): undefined ({exc})")
        print(f"degree of polarization (Q-function distance): {q_dop(psi):.12g}")
        print(f"Wehrl entropy: {wehrl_entropy(psi):.12g}  (coherent-state value {n / (n + 1):.12g})")
        mp = state_multipoles(psi)
        powers = " ".join(f"{mp.power(K):.3e}" for K in range(1, n + 1))
        print(f"multipole powers K=1..{n}: {powers}")
    if args.multipoles:
        state_multipoles(psi).to_csv(args.multipoles)
        print(f"wrote multipoles to {args.multipoles}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarqfi", description="QFI of polarization channels for quantum probes")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="sweep the QFI over a probe grid")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="CSV output path (default: outputs.csv of the config)")
    r.add_argument("--plot", help="figure path, format from the suffix (svg, pdf, png)")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="run the invariant suite for a config")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_cmd_validate)

    q = sub.add_parser("probe", help="report on a single probe state")
    q.add_argument("--kind", choices=("king", "noon"), required=True)
    q.add_argument("--file", help="constellation file (theta phi per line)")
    q.add_argument("--n", type=int, help="photon number (NOON, or a shipped King)")
    q.add_argument("--report", action="store_true", help="print anticoherence order, DOP and Wehrl entropy")
    q.add_argument("--multipoles", help="write the multipole table (K, q, Re, Im) to this CSV")
    q.set_defaults(func=_cmd_probe)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, KingUnavailable) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
