"""Command-line entry point: ``peqml <subcommand> [options]``.

Every subcommand computes all of its results before writing anything, and
each file is written through a temporary file and a rename. A failed run
therefore leaves no partial outputs. The metrics JSON records the command,
package version, master seed and the fully resolved configuration. It
omits worker counts, output paths and timestamps, so reruns with the same
config and seed produce identical files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import Circuit, Gate, dumps, loads
from .config import (
    ConfigError,
    config_record,
    device_from,
    kernel_from,
    load_config,
    nibp_from,
    noise_from,
    qnn_from,
    section,
)
from .device import DeviceModel
from .digits import DigitsFormatError, ingest_digits
from .experiments import DD_ABLATION_DEVICE, run_kernel_experiment, run_qnn_experiment
from .nibp import fit_decay_records, run_sweep
from .outputs import OutputDir, resolve_output_dir
from .scheduler import duration_report_rows, insert_dd, schedule
from .transpiler import transpile

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


class CliError(Exception):
    pass


def sample_circuit() -> Circuit:
    """Two-qubit RZZ(0.5), the default input of ``transpile``."""
    return Circuit(2, (Gate("RZZ", (0, 1), 0.5),))


# -- helpers -------------------------------------------------------------------


def _int_list(text: str) -> tuple[int, ...]:
    try:
        if "-" in text and "," not in text:
            lo, hi = text.split("-")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like '3,5' or '3-9', got {text!r}") from None


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


class Context:
    """Resolved settings shared by every subcommand."""

    def __init__(self, args):
        self.args = args
        self.raw = load_config(args.config)
        seed = args.seed if args.seed is not None else self.raw.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
        self.seed = seed
        workers = args.workers if args.workers is not None else self.raw.get("workers", 1)
        if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {workers!r}")
        self.workers = workers
        self.out = OutputDir(resolve_output_dir(args.output_dir, self.raw.get("output_dir")))
        self.noise = noise_from(self.raw, self.seed, args.noise)

    def device(self, name: str, defaults=None) -> DeviceModel:
        return device_from(self.raw, section(self.raw, name), defaults=defaults)

    def record(self, command: str, config, results, summary=None) -> dict:
        return {
            "command": f"peqml {command}",
            "version": __version__,
            "seed": self.seed,
            "config": config,
            "results": results,
            "summary": summary or {},
        }


def _override(cfg, **values):
    import dataclasses

    values = {k: v for k, v in values.items() if v is not None}
    if not values:
        return cfg
    try:
        return dataclasses.replace(cfg, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _commit(out: OutputDir, files: dict) -> list[Path]:
    """Write prepared outputs; values are text, row lists or matrices."""
    written = []
    for name, value in files.items():
        kind, payload = value
        if kind == "text":
            written.append(out.write_text(name, payload))
        elif kind == "json":
            written.append(out.write_json(name, payload))
        elif kind == "rows":
            written.append(out.write_rows(name, *payload))
        elif kind == "matrix":
            written.append(out.write_matrix(name, payload))
        else:
            raise AssertionError(kind)
    return written


# -- subcommands ---------------------------------------------------------------


def cmd_transpile(ctx: Context) -> dict:
    args = ctx.args
    if args.circuit is None:
        circuit, cid = sample_circuit(), "rzz_0.5"
    else:
        path = Path(args.circuit)
        if not path.is_file():
            raise CliError(f"circuit file not found: {path}")
        try:
            circuit = loads(path.read_text())
        except ValueError as exc:
            raise CliError(f"{path}: {exc}") from None
        cid = path.stem
    dev = ctx.device("transpile").with_qubits(circuit.width)
    dd = args.dd == "on"
    schedules = {}
    lowered = {}
    for mode in ("cnot", "pe"):
        lowered[mode] = transpile(circuit, mode)
        s = schedule(lowered[mode], dev)
        schedules[mode] = insert_dd(s, dev) if dd else s
    rows = duration_report_rows([(cid, m, schedules[m]) for m in ("cnot", "pe")])
    summary = {
        "mode": args.mode,
        "dd": dd,
        "duration_ns": {m: schedules[m].total_duration for m in schedules},
        "pe_to_cnot_ratio": schedules["pe"].total_duration / schedules["cnot"].total_duration,
    }
    config = {"circuit_id": cid, "mode": args.mode, "dd": dd, "device": config_record(dev)}
    return {
        f"{cid}.{args.mode}.txt": ("text", dumps(lowered[args.mode])),
        "durations.csv": ("rows", (rows, ["circuit_id", "mode", "n_qubits", "total_duration_ns"])),
        "transpile-metrics.json": ("json", ctx.record("transpile", config, rows, summary)),
    }


QNN_COLUMNS = ["run", "n", "variant", "final_loss", "train_accuracy", "test_accuracy",
               "mean_duration_ns", "spsa_a", "evaluations"]


def _group_mean(results, key: str) -> list[dict]:
    groups: dict = {}
    for r in results:
        groups.setdefault((r["n"], r["variant"]), []).append(r[key])
    return [{"n": n, "variant": v, key: float(np.mean(vals)), "runs": len(vals)}
            for (n, v), vals in sorted(groups.items())]


def cmd_qnn(ctx: Context) -> dict:
    args = ctx.args
    cfg = qnn_from(ctx.raw, ctx.seed, args.dd)
    cfg = _override(cfg, qubits=args.qubits, runs=args.runs, variants=args.variants, shots=args.shots)
    if args.iterations is not None:
        cfg = _override(cfg, spsa=_override(cfg.spsa, iterations=args.iterations))
    dev = ctx.device("qnn")
    results = run_qnn_experiment(cfg, dev, ctx.noise, ctx.workers)
    trace = [
        {"run": r["run"], "n": r["n"], "variant": r["variant"], "iteration": i, "loss": v}
        for r in results for i, v in enumerate(r["loss_trace"])
    ]
    config = {"qnn": config_record(cfg), "device": config_record(dev), "noise": config_record(ctx.noise)}
    summary = {
        "test_accuracy": _group_mean(results, "test_accuracy"),
        "mean_duration_ns": _group_mean(results, "mean_duration_ns"),
    }
    return {
        "qnn-results.csv": ("rows", (results, QNN_COLUMNS)),
        "qnn-loss-trace.csv": ("rows", (trace, ["run", "n", "variant", "iteration", "loss"])),
        "qnn-metrics.json": ("json", ctx.record("qnn-train", config, results, summary)),
    }


KERNEL_COLUMNS = ["run", "n", "variant", "test_accuracy", "train_accuracy", "nmse",
                  "mean_duration_ns", "kkt_gap_max"]


def cmd_kernel(ctx: Context) -> dict:
    args = ctx.args
    ablation = args.ablation
    name = "dd_ablation" if ablation else "kernel"
    cfg = kernel_from(ctx.raw, ctx.seed, args.dd, ablation=ablation)
    cfg = _override(cfg, qubits=args.qubits, runs=args.runs, variants=args.variants,
                    shots=args.shots, data_path=args.data)
    if cfg.data_path is not None and not Path(cfg.data_path).is_file():
        raise CliError(f"digits file not found: {cfg.data_path}")
    dev = ctx.device(name, DD_ABLATION_DEVICE if ablation else None)
    results = run_kernel_experiment(cfg, dev, ctx.noise, ctx.workers)
    files = {}
    for r in results:
        stem = f"{name}-kernels/run{r['run']}_n{r['n']}_{r['variant']}"
        files[f"{stem}_train.csv"] = ("matrix", r["k_train"])
        files[f"{stem}_test.csv"] = ("matrix", r["k_test"])
    rows = [{k: r[k] for k in KERNEL_COLUMNS} for r in results]
    config = {name: config_record(cfg), "device": config_record(dev), "noise": config_record(ctx.noise)}
    summary = {
        "test_accuracy": _group_mean(rows, "test_accuracy"),
        "nmse": _group_mean(rows, "nmse"),
        "mean_duration_ns": _group_mean(rows, "mean_duration_ns"),
    }
    command = "kernel-classify --ablation" if ablation else "kernel-classify"
    files[f"{name}-results.csv"] = ("rows", (rows, KERNEL_COLUMNS))
    files[f"{name}-metrics.json"] = ("json", ctx.record(command, config, rows, summary))
    return files


NIBP_COLUMNS = ["n", "mode", "mean_abs_loss", "sem_loss", "mean_abs_grad", "sem_grad", "samples"]


def cmd_nibp(ctx: Context) -> dict:
    args = ctx.args
    cfg = nibp_from(ctx.raw, ctx.seed, args.dd)
    cfg = _override(cfg, qubits_min=args.qubits_min, qubits_max=args.qubits_max,
                    samples=args.samples, modes=args.modes)
    dev = ctx.device("nibp")
    records = run_sweep(cfg, dev, ctx.noise, ctx.workers)
    records.sort(key=lambda r: (r.n, cfg.modes.index(r.mode)))
    rows = [r.as_row() for r in records]
    summary = {}
    if sum(n >= cfg.onset for n in cfg.qubits) >= 3:
        summary = {
            "loss_slope": fit_decay_records(records, "loss", cfg.onset),
            "grad_slope": fit_decay_records(records, "grad", cfg.onset),
        }
    config = {"nibp": config_record(cfg), "device": config_record(dev), "noise": config_record(ctx.noise)}
    return {
        "nibp-sweep.csv": ("rows", (rows, NIBP_COLUMNS)),
        "nibp-metrics.json": ("json", ctx.record("nibp-sweep", config, rows, summary)),
    }


def cmd_ingest(ctx: Context) -> dict:
    args = ctx.args
    sect = section(ctx.raw, "ingest")
    path = args.data or sect.get("data_path")
    per_train = args.per_class_train or sect.get("per_class_train", 10)
    per_test = args.per_class_test or sect.get("per_class_test", 10)
    k = args.components or sect.get("components")
    if path is not None and not Path(path).is_file():
        raise CliError(f"digits file not found: {path}")
    split = ingest_digits(path, per_train, per_test, ctx.seed)
    if k is None:
        train_x, test_x = split.train_raw, split.test_raw
    else:
        train, test = split.reduce(int(k))
        train_x, test_x = train.features, test.features

    fields = ["label"] + [f"f{i}" for i in range(train_x.shape[1])]

    def table(labels, x):
        return [dict(zip(fields, [int(lab), *row])) for lab, row in zip(labels, x)], fields

    config = {"data_path": path, "per_class_train": per_train, "per_class_test": per_test, "components": k}
    summary = {"train_rows": len(split.train_labels), "test_rows": len(split.test_labels)}
    return {
        "ingest-train.csv": ("rows", table(split.train_labels, train_x)),
        "ingest-test.csv": ("rows", table(split.test_labels, test_x)),
        "ingest-metrics.json": ("json", ctx.record("ingest", config, None, summary)),
    }


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--seed", type=int, help="master seed (default: config, else 0)")
    common.add_argument("--workers", type=_positive, help="worker processes; never changes results")
    common.add_argument("--output-dir", help="output directory (also $PEQML_OUTPUT_DIR)")
    common.add_argument("--noise", choices=("on", "off"), help="'off' disables every noise source")
    common.add_argument("--dd", choices=("on", "off"), help="force dynamical decoupling on or off")

    parser = argparse.ArgumentParser(prog="peqml", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"peqml {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("transpile", parents=[common], help="lower a circuit and report schedule durations")
    p.add_argument("circuit", nargs="?", help="circuit text file (default: RZZ(0.5) on two qubits)")
    p.add_argument("--mode", choices=("cnot", "pe"), default="pe")
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("qnn-train", parents=[common], help="train the QNN classifier grid")
    p.add_argument("--qubits", type=_int_list)
    p.add_argument("--runs", type=_positive)
    p.add_argument("--variants", type=_str_list)
    p.add_argument("--shots", type=_positive)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_qnn)

    p = sub.add_parser("kernel-classify", parents=[common], help="quantum-kernel SVM on handwritten digits")
    p.add_argument("--ablation", action="store_true", help="run the three-class DD ablation")
    p.add_argument("--qubits", type=_int_list)
    p.add_argument("--runs", type=_positive)
    p.add_argument("--variants", type=_str_list)
    p.add_argument("--shots", type=_positive)
    p.add_argument("--data", help="digits CSV (default: bundled set)")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("nibp-sweep", parents=[common], help="loss and gradient concentration sweep")
    p.add_argument("--qubits-min", type=int)
    p.add_argument("--qubits-max", type=int)
    p.add_argument("--samples", type=_positive)
    p.add_argument("--modes", type=_str_list)
    p.set_defaults(func=cmd_nibp)

    p = sub.add_parser("ingest", parents=[common], help="subsample the digits CSV")
    p.add_argument("--data", help="digits CSV (default: bundled set)")
    p.add_argument("--per-class-train", type=_positive)
    p.add_argument("--per-class-test", type=_positive)
    p.add_argument("--components", type=_positive, help="reduce to this many SVD features")
    p.set_defaults(func=cmd_ingest)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        ctx = Context(args)
        files = args.func(ctx)
        written = _commit(ctx.out, files)
    except (CliError, ConfigError, DigitsFormatError, FileNotFoundError, ValueError) as exc:
        print(f"peqml {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        print(f"peqml {args.command}: interrupted", file=sys.stderr)
        return 130
    for path in written:
        print(path)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
