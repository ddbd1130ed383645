"""leo-adiabatic command line.

Subcommands: simulate, mc, kernel, reduce, figure, sweep. Every successful
run writes its CSVs and a manifest.json into the output directory (``--out``,
else $LEO_ADIABATIC_OUT, else [output] dir, else ./out). Failures print one
line ``error: <message>`` on stderr and exit nonzero:

    2  usage or configuration error (includes unknown figure id)
    3  invariant violation during computation
    4  a figure threshold check failed (datasets are still written)
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .evolution import InvariantError
from .experiments import FIGURES, UnknownFigureError, avg_freq_dataset, run_figure, run_sweep, simulate, trajectory_dataset
from .kernel import closed_kernel_grid, compare_kernels, kernel_grid, volterra_solve
from .linalg import NotHermitianError
from .output import Dataset, write_outputs

OUT_ENV = "LEO_ADIABATIC_OUT"
EXIT_USAGE, EXIT_INVARIANT, EXIT_CHECK = 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for all stochastic pulses")
    common.add_argument("--jobs", type=int, help="worker processes for ensembles")
    common.add_argument("-v", "--verbose", action="count", default=0)

    with_cfg = _Parser(add_help=False, parents=[common])
    with_cfg.add_argument("-c", "--config", help="INI config file (defaults apply when omitted)")
    with_cfg.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE")
    with_cfg.add_argument("--store-every", type=int, help="store every k-th step")

    parser = _Parser(prog="leo-adiabatic", description="Adiabatic evolution accelerated by leakage-elimination pulses.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("simulate", parents=[with_cfg], help="single trajectory (realization stream 0 for noise)")
    sub.add_parser("mc", parents=[with_cfg], help="ensemble average over mc.trials realizations")
    sub.add_parser("kernel", parents=[with_cfg], help="memory kernel on a grid plus exponent comparison")
    sub.add_parser("reduce", parents=[with_cfg], help="reduced amplitude p(t) from the memory-kernel equation")
    sub.add_parser("sweep", parents=[with_cfg], help="final fidelity over a parameter grid")
    fig = sub.add_parser("figure", parents=[common], help="reproduce a named figure dataset")
    fig.add_argument("figure_id", help=", ".join(FIGURES))
    fig.add_argument("--trials", type=int, default=1000, help="trials for stochastic pulses")
    return parser


def _load_config(args) -> RunConfig:
    overrides = list(args.override)
    if args.seed is not None:
        overrides += [f"pulse.seed={args.seed}", f"mc.seed={args.seed}"]
    if args.jobs is not None:
        overrides.append(f"mc.jobs={args.jobs}")
    if args.store_every is not None:
        overrides.append(f"evolution.store_every={args.store_every}")
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.default(overrides)


def _out_dir(args, cfg: RunConfig | None) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    if cfg is not None and cfg["output"]["dir"]:
        return Path(cfg["output"]["dir"])
    return Path("out")


def _cmd_simulate(cfg: RunConfig) -> list[Dataset]:
    evo = cfg.build_evolution()
    traj = simulate(evo, 1, cfg["pulse"]["seed"])
    seed = cfg["pulse"]["seed"] if evo.pulse.stochastic else None
    return [trajectory_dataset("trajectory", traj, cfg.echo(), seed, rho=cfg["output"]["rho"])]


def _cmd_mc(cfg: RunConfig) -> list[Dataset]:
    evo = cfg.build_evolution()
    mc = cfg["mc"]
    traj = simulate(evo, mc["trials"], mc["seed"], mc["jobs"])
    head = cfg.echo()
    return [trajectory_dataset("trajectory", traj, head, mc["seed"], rho=cfg["output"]["rho"]),
            avg_freq_dataset("avg_freq", evo, traj, head, mc["seed"])]


def _cmd_kernel(cfg: RunConfig) -> list[Dataset]:
    evo = cfg.build_evolution()
    model, pulse, xi = evo.model, evo.pulse, evo.xi
    if cfg["kernel"]["method"] == "closed":
        K = closed_kernel_grid(model, pulse, evo.T, xi)
    else:
        K = kernel_grid(model, pulse, evo.T, xi)
    times = np.arange(K.shape[0]) * xi
    n_idx, m_idx = np.tril_indices(K.shape[0])
    s, t = times[m_idx], times[n_idx]
    g = K[n_idx, m_idx]
    F = pulse.antiderivative(times)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(t > s, (F[n_idx] - F[m_idx]) / np.where(t > s, t - s, 1.0), np.nan)
    on_diag = t == s
    w[on_diag] = [pulse.value(min(x, evo.T * (1 - 1e-12))) for x in t[on_diag]]
    head = cfg.echo()
    seed = cfg["pulse"]["seed"] if pulse.stochastic else None
    report = compare_kernels(model, pulse, points=cfg["kernel"]["points"])
    cmp = Dataset("kernel_exponents", ["candidate", "max_abs_diff"],
                  np.array([[name, diff] for name, diff in report.items()], dtype=object), head, seed)
    return [Dataset("kernel", ["s", "t", "re_g", "im_g", "avg_freq"],
                    np.column_stack([s, t, g.real, g.imag, w]), head, seed), cmp]


def _cmd_reduce(cfg: RunConfig) -> list[Dataset]:
    evo = cfg.build_evolution()
    if cfg["kernel"]["method"] == "closed":
        K = closed_kernel_grid(evo.model, evo.pulse, evo.T, evo.xi)
    else:
        K = kernel_grid(evo.model, evo.pulse, evo.T, evo.xi)
    red = volterra_solve(K, evo.T, evo.xi)
    seed = cfg["pulse"]["seed"] if evo.pulse.stochastic else None
    return [Dataset("reduced", ["t", "re_p", "im_p", "abs_p"],
                    np.column_stack([red.times, red.p.real, red.p.imag, red.abs_p]), cfg.echo(), seed)]


def _cmd_sweep(cfg: RunConfig) -> list[Dataset]:
    return [run_sweep(cfg)]


_COMMANDS = {"simulate": _cmd_simulate, "mc": _cmd_mc, "kernel": _cmd_kernel, "reduce": _cmd_reduce, "sweep": _cmd_sweep}


def _fail(code: int, message: str) -> int:
    print(f"error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    if args.command is None:
        return _fail(EXIT_USAGE, "missing subcommand; choose from " + ", ".join([*_COMMANDS, "figure"]))
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "figure":
            fig = run_figure(args.figure_id, seed=args.seed or 0, trials=args.trials, jobs=args.jobs or 1)
            write_outputs(_out_dir(args, None), fig.datasets,
                          {"figure": fig.figure, "checks": [c.as_dict() for c in fig.checks]})
            failed = [c for c in fig.checks if not c.passed]
            if failed:
                return _fail(EXIT_CHECK, f"check failed: {failed[0].name} ({failed[0].detail})")
            return 0
        cfg = _load_config(args)
        datasets = _COMMANDS[args.command](cfg)
        write_outputs(_out_dir(args, cfg), datasets, {"command": args.command, "config_hash": cfg.digest()})
        return 0
    except (ConfigError, UnknownFigureError) as exc:
        return _fail(EXIT_USAGE, exc)
    except (InvariantError, NotHermitianError) as exc:
        return _fail(EXIT_INVARIANT, f"invariant violation: {exc}")
    except (ValueError, TypeError, RuntimeError, OSError) as exc:
        return _fail(EXIT_INVARIANT, f"{type(exc).__name__}: {exc}")


def main() -> None:
    sys.exit(run())
