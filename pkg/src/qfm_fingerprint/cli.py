#!/usr/bin/env python3
"""Command-line front end: ``qfm-fingerprint <command> [options]``"""

import argparse
import logging
import sys
from dataclasses import fields
from itertools import product
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from .circuits import ModelSpec
from .config import FORMATS, PRESETS, RunConfig
from .errors import ConfigError, FingerprintError
from .experiment_manager import TASKS, experiment_grid
from .expressibility import expressibility, pair_count
from .fingerprint import (
    PEARSON_MODES,
    CoefficientSamples,
    analyze,
    fit_variance_decay,
    sample_coefficients,
    sample_count,
    surrogate_samples,
    variance_profile,
)
from .fourier_data import RegressionDataset, make_dataset, random_target
from .hep import HepDatasetConfig, load_events, train_hep
from .interfaces.files import ResultWriter, dataset_frame, read_dataset
from .interfaces.heatmap import render_heatmap
from .runner import WorkerPool
from .seeding import uniform_parameters
from .spectral import model_coefficients
from .tools.bench import MetricBenchmark
from .trainer import train

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _samples_for(cfg: RunConfig, spec: ModelSpec) -> int:
    return cfg.samples or sample_count(spec, cfg.preset)


def _pairs_for(cfg: RunConfig, spec: ModelSpec) -> int:
    return cfg.pairs or pair_count(spec, cfg.preset)


def _write_fingerprint(writer: ResultWriter, samples: CoefficientSamples, cfg: RunConfig, stem: str):
    report = analyze(samples, cfg.mode)
    fp = report.fingerprint
    labels = fp.index.labels()
    writer.write_matrix(stem, fp.R, labels)
    writer.write_json(f"{stem}.json", report.summary())
    writer.write_text(f"{stem}.svg", render_heatmap(fp.R, labels, title=stem))
    return report


def cmd_fingerprint(cfg: RunConfig, writer: ResultWriter) -> Dict:
    if cfg.surrogate:
        return cmd_surrogate(cfg, writer)
    summary = {}
    for ansatz in cfg.ansatz:
        spec = cfg.spec(ansatz)
        samples = sample_coefficients(spec, _samples_for(cfg, spec), cfg.seed, workers=cfg.workers)
        stem = f"fingerprint_{spec.label()}"
        report = _write_fingerprint(writer, samples, cfg, stem)
        # full tensor of the first sampled model, the row the matrix starts from
        theta = uniform_parameters(cfg.seed, "theta", np.arange(1), spec.param_count)[0]
        writer.write_coefficients(f"coefficients_{spec.label()}", model_coefficients(spec, theta))
        summary[stem] = {"fcc": report.fcc, "fcc_stderr": report.stderr}
    return summary


def cmd_surrogate(cfg: RunConfig, writer: ResultWriter) -> Dict:
    spec = cfg.spec()
    samples = surrogate_samples(spec.n, spec.layers, _samples_for(cfg, spec), cfg.seed, spec.dims)
    report = _write_fingerprint(writer, samples, cfg, "surrogate")
    return {"surrogate": {"fcc": report.fcc, "fcc_stderr": report.stderr}}


def cmd_fcc(cfg: RunConfig, writer: ResultWriter) -> Dict:
    rows = []
    for ansatz in cfg.ansatz:
        spec = cfg.spec(ansatz)
        M = _samples_for(cfg, spec)
        report = analyze(sample_coefficients(spec, M, cfg.seed, workers=cfg.workers), cfg.mode)
        rows.append(
            {
                "ansatz": ansatz,
                "n": spec.n,
                "L": spec.layers,
                "D": spec.dims,
                "fcc": report.fcc,
                "fcc_stderr": report.stderr,
                "weighted_fcc": report.weighted["inverse_linear"],
                "samples": M,
                "flagged": len(report.fingerprint.flagged),
            }
        )
    writer.write_table("fcc", pd.DataFrame(rows))
    return {row["ansatz"]: row["fcc"] for row in rows}


def cmd_expressibility(cfg: RunConfig, writer: ResultWriter) -> Dict:
    results = {}
    for ansatz in cfg.ansatz:
        spec = cfg.spec(ansatz)
        result = expressibility(spec, _pairs_for(cfg, spec), cfg.bins, cfg.seed, cfg.workers)
        writer.write_table(f"histogram_{spec.label()}", pd.DataFrame(result.histogram.records(spec.n)))
        results[ansatz] = result.summary()
    writer.write_json("expressibility.json", results)
    return {a: r["kl"] for a, r in results.items()}


def cmd_variance(cfg: RunConfig, writer: ResultWriter) -> Dict:
    summary = {}
    for ansatz in cfg.ansatz:
        spec = cfg.spec(ansatz)
        samples = sample_coefficients(spec, _samples_for(cfg, spec), cfg.seed, workers=cfg.workers)
        profile = variance_profile(samples)
        writer.write_table(f"variance_{spec.label()}", pd.DataFrame(profile.records()))
        try:
            alpha, beta = fit_variance_decay(profile)
            summary[ansatz] = {"decay_rate": alpha, "scale": beta}
        except FingerprintError as e:
            logger.warning(f"No decay fit for {ansatz}: {e}")
            summary[ansatz] = {"decay_rate": None, "scale": None}
    writer.write_json("variance.json", summary)
    return summary


def _imported_dataset(cfg: RunConfig) -> Optional[RegressionDataset]:
    if not cfg.dataset_path:
        return None
    dataset = read_dataset(cfg.dataset_path)
    for ansatz in cfg.ansatz:
        if dataset.D != cfg.spec(ansatz).dims:
            raise ConfigError(
                f"Dataset {cfg.dataset_path} has {dataset.D} input columns, "
                f"the model takes {cfg.spec(ansatz).dims}"
            )
    return dataset


def cmd_train_fs(cfg: RunConfig, writer: ResultWriter) -> Dict:
    imported = _imported_dataset(cfg)
    data_seeds = [None] if imported is not None else cfg.data_seeds
    keys = list(product(cfg.ansatz, data_seeds, cfg.model_seeds))

    def run(key):
        ansatz, data_seed, model_seed = key
        spec = cfg.spec(ansatz)
        if imported is not None:
            dataset = imported
        else:
            target = random_target(spec.max_freq, spec.dims, data_seed)
            dataset = make_dataset(target, cfg.grid_points)
        return train(spec, dataset, cfg.epochs, cfg.lr, model_seed, data_seed=data_seed)

    def label(ansatz, data_seed, model_seed) -> str:
        data = "" if data_seed is None else f"_d{data_seed}"
        return f"{ansatz}{data}_m{model_seed}"

    results = WorkerPool(cfg.workers).map(run, keys)
    rows = [
        {
            "ansatz": a, "data_seed": d, "model_seed": m,
            "initial_mse": r.initial_loss, "final_mse": r.final_mse, "method": r.method,
        }
        for (a, d, m), r in zip(keys, results)
    ]
    writer.write_table("runs", pd.DataFrame(rows))
    history = pd.DataFrame({label(*key): r.history for key, r in zip(keys, results)})
    history.insert(0, "epoch", range(len(history)))
    writer.write_table("history", history)
    if imported is None:
        spec = cfg.spec()
        for data_seed in cfg.data_seeds:
            target = random_target(spec.max_freq, spec.dims, data_seed)
            writer.write_table(f"dataset_seed{data_seed}", dataset_frame(make_dataset(target, cfg.grid_points)))
    means = pd.DataFrame(rows).groupby("ansatz")["final_mse"].mean()
    return {a: float(v) for a, v in means.items()}


def cmd_train_hep(cfg: RunConfig, writer: ResultWriter) -> Dict:
    if len(cfg.ansatz) > 1:
        raise ConfigError("train-hep trains one ansatz; compare several with `experiment --task hep`")
    spec = cfg.spec()
    hep_config = HepDatasetConfig(
        events=cfg.events,
        K=cfg.grid_points,
        data_seed=cfg.seed,
        model_seed=cfg.model_seeds[0],
        batch_size=cfg.batch_size,
        epochs=cfg.epochs,
        lr=cfg.lr,
    )
    events = load_events(cfg.events_path) if cfg.events_path else None
    result, report = train_hep(spec, hep_config, events)
    summary = report.summary()
    summary.update(result.extra)
    summary["spec"] = spec.to_dict()
    summary["hep"] = hep_config.to_dict()
    writer.write_json("hep_report.json", summary)
    writer.write_table("deviation_histogram", pd.DataFrame(report.deviation_histogram))
    writer.write_table(
        "history", pd.DataFrame({"epoch": range(len(result.history)), "val_loss": result.history})
    )
    return {"val_mse": report.val_mse, "abs_dev_mean": report.abs_dev_mean}


def cmd_experiment(cfg: RunConfig, writer: ResultWriter) -> Dict:
    event_data = load_events(cfg.events_path) if cfg.task == "hep" and cfg.events_path else None
    grid = experiment_grid(
        cfg.ansatz,
        cfg.qubits,
        cfg.layers,
        cfg.dims,
        cfg.model_seeds,
        cfg.data_seeds,
        cfg.epochs,
        cfg.lr,
        workers=cfg.workers,
        event_data=event_data,
        axes=cfg.axes,
        preset=cfg.preset,
        samples=cfg.samples,
        pairs=cfg.pairs,
        bins=cfg.bins,
        master_seed=cfg.seed,
        task=cfg.task,
        grid_points=cfg.grid_points,
        events=cfg.events,
        batch_size=cfg.batch_size,
    )
    writer.write_table("experiment", grid.table)
    writer.write_table("runs", grid.runs)
    writer.write_table("scatter", grid.scatter())
    writer.write_json("experiment.json", {"rows": grid.table.to_dict(orient="records"), "config": cfg.to_dict()})
    return {row["ansatz"]: row["mean_mse"] for row in grid.table.to_dict(orient="records")}


def cmd_bench(cfg: RunConfig, writer: ResultWriter) -> Dict:
    bench = MetricBenchmark(cfg.ansatz[0], cfg.layers, cfg.workers)
    table = bench.run(cfg.bench_qubits, cfg.samples, cfg.seed)
    writer.write_table("bench", table)
    return {int(r["n"]): r["fcc_seconds"] for r in table.to_dict(orient="records")}


COMMANDS: Dict[str, Callable[[RunConfig, ResultWriter], Dict]] = {
    "fingerprint": cmd_fingerprint,
    "fcc": cmd_fcc,
    "expressibility": cmd_expressibility,
    "variance": cmd_variance,
    "surrogate": cmd_surrogate,
    "train-fs": cmd_train_fs,
    "train-hep": cmd_train_hep,
    "experiment": cmd_experiment,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config; flags override its values")
    common.add_argument("--ansatz", nargs="+", help="ansatz kinds, e.g. C15 HEA")
    common.add_argument("--qubits", type=int)
    common.add_argument("--layers", type=int)
    common.add_argument("--dims", type=int)
    common.add_argument("--axes", nargs="+", help="one Pauli axis per input dimension")
    common.add_argument("--samples", type=int, help="parameter samples M")
    common.add_argument("--pairs", type=int, help="fidelity pairs for expressibility")
    common.add_argument("--bins", type=int)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--preset", choices=PRESETS)
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--workers", type=int)
    common.add_argument("--mode", choices=PEARSON_MODES, help="complex or split Pearson")
    common.add_argument("--surrogate", action="store_const", const=True, default=None)
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--model-seeds", dest="model_seeds", type=int, nargs="+")
    common.add_argument("--data-seeds", dest="data_seeds", type=int, nargs="+")
    common.add_argument("--events", type=int)
    common.add_argument("--events-path", dest="events_path", help="event CSV for train-hep and experiment --task hep")
    common.add_argument("--dataset-path", dest="dataset_path", help="x_0.., target CSV for train-fs")
    common.add_argument("--task", choices=TASKS, help="experiment grid on Fourier series or on events")
    common.add_argument("--batch-size", dest="batch_size", type=int)
    common.add_argument("--grid-points", dest="grid_points", type=int)
    common.add_argument("--bench-qubits", dest="bench_qubits", type=int, nargs="+")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="qfm-fingerprint",
        description="Fourier fingerprints, FCC and expressibility of quantum Fourier models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config) if args.config else RunConfig()
    names = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names}
    return base.merged(overrides).resolve()


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")

    try:
        cfg = resolve_config(args)
        writer = ResultWriter(cfg.out, cfg.format).open()
        summary = COMMANDS[cfg.command](cfg, writer)
        writer.write_json("config.json", cfg.to_dict())
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (FingerprintError, ValueError, RuntimeError, ArithmeticError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME

    for key, value in summary.items():
        print(f"{key}: {value}")
    print(f"Wrote {len(writer.written)} files to {writer.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
