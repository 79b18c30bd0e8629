"""Experiment configs, sweeps, figures, validation and the command line."""

from polarqfi.harness.config import ExperimentConfig, load_config, parse_config
from polarqfi.harness.plotting import emit_plot
from polarqfi.harness.sweep import SweepRow, read_csv, run_sweep, write_csv
from polarqfi.harness.validate import ValidationReport, validate
