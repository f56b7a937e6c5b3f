#!/usr/bin/env python
"""
Command-line entry point for MCNN consolidation runs.

Subcommands:
    train   Train the MCNN (all laws) or a single-law PINN.
    fd      Solve the finite-difference reference for each law.
    eval    Score a checkpoint against the reference and export figure data.
    repro   Train MCNN + three PINNs, solve FD, evaluate, write the summary.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import os
import sys
import time

import numpy as np

from src.core.config import load_config, parse_assignments
from src.core.exceptions import ConfigError, NumericalError
from src.core.file_operations import load_checkpoint, save_checkpoint, save_csv, save_text
from src.core.logger import logger
from src.core.sampling import test_grid
from src.core.training import MODE_MCNN, MODE_PINN, train
from src.models.constitutive import ALL_LAWS, as_law
from src.tools.analysis import (evaluate_model_on_grid, field_frame, metrics_frame, pressure_frame,
                                reconstruct_pressure, relative_error, settlement_frame,
                                settlement_profile)
from src.tools.fdref import fd_solve, interpolate, load_solution_grid, save_solution_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CHECKPOINT_FILE = "checkpoint.txt"
HISTORY_FILE = "loss_history.csv"
RESOLVED_CONFIG_FILE = "config_resolved.env"
METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.csv"


def reference_file(law):
    return f"fd_law{int(law)}.csv"


def _time_tag(t_hat):
    return f"t{t_hat:.4g}"


def write_resolved_config(config, out_dir):
    """Echo the resolved configuration next to the run's outputs."""
    return save_text("\n".join(config.to_lines()) + "\n", os.path.join(out_dir, RESOLVED_CONFIG_FILE))


def run_train(config, out_dir, mode=None, law=None, seed=None):
    """Train one network and write its checkpoint and loss history.

    Args:
        config (RunConfig): Resolved configuration.
        out_dir (str): Directory receiving checkpoint.txt and loss_history.csv.
        mode (str, optional): Overrides config.mode.
        law (int, optional): Law of a PINN run, overrides config.law.
        seed (int, optional): Overrides config.seed.

    Returns:
        TrainReport: The finished run.
    """
    train_config = config.train_config(mode, law, seed)
    print(f"Training {train_config.label}: {train_config.epochs} epochs, "
          f"{train_config.plan.per_law_total} points per law")
    report = train(train_config)
    save_checkpoint(os.path.join(out_dir, CHECKPOINT_FILE), report.params, train_config.seed,
                    train_config.epochs, mode=train_config.mode,
                    law=None if train_config.mode == MODE_MCNN else int(train_config.law))
    save_csv(report.history_frame(), os.path.join(out_dir, HISTORY_FILE))
    print(f"Final loss {report.history[-1][1]:.6e} after {report.wall_time:.1f}s")
    return report


def run_fd(config, out_dir, laws=ALL_LAWS):
    """Solve and save the FD reference of each law.

    Returns:
        dict: Law index -> SolutionGrid.
    """
    spec = config.fd_spec()
    props = config.material_props()
    grids = {}
    for law in laws:
        law = as_law(law)
        print(f"Solving FD reference for law {int(law)} ({spec.n_steps} steps)...")
        grids[int(law)] = fd_solve(law, props, spec)
        save_solution_grid(grids[int(law)], os.path.join(out_dir, reference_file(law)))
    return grids


def _snapshot_index(grid, t_hat):
    matches = np.flatnonzero(np.isclose(grid.t, t_hat, rtol=0.0, atol=1e-12))
    if matches.size == 0:
        raise ConfigError(f"Reference holds no snapshot at t={t_hat}")
    return int(matches[0])


def evaluate_law(params, arch, law, grid, config, out_dir, method):
    """Relative error of one law plus its field, settlement and pressure exports.

    Returns:
        float: Relative error in percent on the test grid.
    """
    props = config.material_props()
    points = test_grid(config.test_nx, config.test_nt)
    j_pred = evaluate_model_on_grid(params, arch, law, points, props)
    j_ref = interpolate(grid, points[:, 0], points[:, 1])
    error = relative_error(j_pred, j_ref)
    save_csv(field_frame(points, j_pred, j_ref), os.path.join(out_dir, f"field_law{int(law)}.csv"))

    for t_hat in config.settlement_times:
        ref_j = grid.j[_snapshot_index(grid, t_hat)]
        nodes = np.column_stack([grid.x, np.full(grid.x.size, t_hat)])
        pred_j = evaluate_model_on_grid(params, arch, law, nodes, props)
        tag = f"law{int(law)}_{_time_tag(t_hat)}"
        save_csv(settlement_frame(settlement_profile(grid.x, pred_j, t_hat),
                                  settlement_profile(grid.x, ref_j, t_hat)),
                 os.path.join(out_dir, f"settlement_{tag}.csv"))
        save_csv(pressure_frame(reconstruct_pressure(grid.x, pred_j, law, props, t_hat),
                                reconstruct_pressure(grid.x, ref_j, law, props, t_hat)),
                 os.path.join(out_dir, f"pressure_{tag}.csv"))

    logger.info(f"[{method}] law {int(law)}: relative error {error:.4f}%")
    print(f"  {method} law {int(law)}: relative error {error:.4f}%")
    return error


def run_eval(config, out_dir, checkpoint_path, reference_dir):
    """Evaluate a checkpoint on every law it covers.

    Args:
        config (RunConfig): Supplies the architecture, props and test grid.
        out_dir (str): Directory receiving metrics.csv and figure data.
        checkpoint_path (str): Checkpoint written by run_train.
        reference_dir (str): Directory holding fd_law{i}.csv.

    Returns:
        list: (law, method, error) rows.
    """
    params, metadata = load_checkpoint(checkpoint_path, expected_arch=config.arch())
    method = metadata["mode"]
    laws = ALL_LAWS if method == MODE_MCNN else (as_law(metadata["law"]),)
    rows = []
    for law in laws:
        grid = load_solution_grid(os.path.join(reference_dir, reference_file(law)))
        rows.append((int(law), method, evaluate_law(params, params.arch, law, grid, config,
                                                   out_dir, method)))
    save_csv(metrics_frame(rows), os.path.join(out_dir, METRICS_FILE))
    return rows


def run_repro(config, out_dir):
    """Full pipeline: FD references, MCNN and three PINNs, evaluation, summary.

    Returns:
        list: Six (law, method, error) rows, MCNN first.
    """
    run_fd(config, out_dir)
    rows = []
    jobs = [(MODE_MCNN, None)] + [(MODE_PINN, int(law)) for law in ALL_LAWS]
    for mode, law in jobs:
        label = MODE_MCNN if law is None else f"pinn_law{law}"
        run_dir = os.path.join(out_dir, label)
        run_train(config, run_dir, mode=mode, law=law, seed=config.seed_for(mode, law))
        rows.extend(run_eval(config, run_dir, os.path.join(run_dir, CHECKPOINT_FILE), out_dir))
    save_csv(metrics_frame(rows), os.path.join(out_dir, SUMMARY_FILE))
    return rows


def build_parser():
    parser = argparse.ArgumentParser(description="Multi-constitutive neural network for large-strain consolidation")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value configuration file")
    common.add_argument("--out", default=None, help="Output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, default=None, help="Random seed")
    common.add_argument("--fast", action="store_true", help="Divide epoch schedules by fast_factor")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a configuration key (repeatable)")

    train_parser = subparsers.add_parser("train", parents=[common], help="Train MCNN or a single-law PINN")
    train_parser.add_argument("--mode", choices=[MODE_MCNN, MODE_PINN], default=None)
    train_parser.add_argument("--law", default=None, help="Law index 1-3 for PINN mode")

    fd_parser = subparsers.add_parser("fd", parents=[common], help="Solve the FD references")
    fd_parser.add_argument("--law", default=None, help="Solve a single law")

    eval_parser = subparsers.add_parser("eval", parents=[common], help="Evaluate a checkpoint")
    eval_parser.add_argument("--checkpoint", default=None, help="Checkpoint path (default OUT/checkpoint.txt)")
    eval_parser.add_argument("--reference-dir", default=None, help="Directory of fd_law*.csv (default OUT)")

    subparsers.add_parser("repro", parents=[common], help="Run the full comparison pipeline")
    return parser


def _overrides(args):
    overrides = parse_assignments(args.set)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if args.command == "train" and args.law is not None:
        overrides["law"] = args.law
    return overrides


def main(argv=None):
    """Main function: parse arguments, dispatch, map errors to exit codes."""
    args = build_parser().parse_args(argv)
    start_time = time.time()

    print(f"STARTING: MCNN {args.command}")
    print(f"Working directory: {os.getcwd()}")
    try:
        config = load_config(args.config, _overrides(args), fast=args.fast)
        out_dir = args.out or config.output_dir
        os.makedirs(out_dir, exist_ok=True)
        write_resolved_config(config, out_dir)
        print(f"Run label: {config.run_label}")
        print(f"Output directory: {out_dir}")

        if args.command == "train":
            run_train(config, out_dir)
        elif args.command == "fd":
            laws = ALL_LAWS if args.law is None else (as_law(args.law),)
            run_fd(config, out_dir, laws)
        elif args.command == "eval":
            checkpoint = args.checkpoint or os.path.join(out_dir, CHECKPOINT_FILE)
            run_eval(config, out_dir, checkpoint, args.reference_dir or out_dir)
        else:
            rows = run_repro(config, out_dir)
            print("\n=== Relative error summary (%) ===")
            for law, method, error in rows:
                print(f"  {method:>5s}  law {law}: {error:.4f}")
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"ERROR: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        print(f"ERROR: {e}")
        return EXIT_NUMERICAL

    print(f"\nFINISHED: MCNN {args.command} in {time.time() - start_time:.2f} seconds")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
