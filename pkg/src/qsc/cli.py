"""Command-line driver: ``qsc {gen,train,eval,landscape,audit}``.

Option precedence is flags > ``--config`` file > built-in defaults.  A
config file is either flat ``key = value`` text (keys spelled like the
flags, ``-`` or ``_``) or any artifact written by this tool, whose embedded
``config`` block is reused; this makes every artifact re-runnable.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._jsonio import dumps
from .circuits import AnsatzFamily, AnsatzSpec
from .dataset import DEFAULT_PER_CLASS, GenerationConfig, audit, dumps_dataset, generate, load
from .labels import class_names
from .landscape import flatness, representative_samples, scan
from .metrics import confusion, format_table, report_json
from .qnn import TrainConfig, TrainedModel, predict_dataset, train

logger = logging.getLogger("qsc")


class UsageError(Exception):
    """Invalid arguments or inputs (exit code 2)."""


def _int_pair(text: str) -> list[int]:
    try:
        parts = [int(v) for v in str(text).replace(" ", "").split(",")]
    except ValueError:
        raise UsageError(f"expected two comma-separated integers, got {text!r}") from None
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated integers, got {text!r}")
    return parts


def _optional_int(text):
    return None if text in (None, "", "none", "None") else int(text)


# option name -> (converter, default); None default means required
OPTIONS = {
    "gen": {
        "system": (str, None), "noise": (str, None), "per_class": (_optional_int, None),
        "seed": (int, 0), "which": (str, ""), "eps": (float, 1e-6),
    },
    "train": {
        "dataset": (str, None), "ansatz": (str, "real_amplitudes"), "reps": (int, 3),
        "maxiter": (int, 100), "rhobeg": (float, 1.0), "rhoend": (float, 1e-4),
        "maxfun": (_optional_int, None), "readout": (str, "mod"), "seed": (int, 0),
    },
    "eval": {"model": (str, None), "dataset": (str, None)},
    "landscape": {
        "dataset": (str, None), "ansatz": (str, "real_amplitudes"), "reps": (int, 3),
        "params": (str, "0,1"), "grid": (int, 41), "seed": (int, 0), "samples": (int, 8),
        "flatness_points": (int, 0),
    },
    "audit": {"dataset": (str, None)},
}
REQUIRED = {"gen": ("system", "noise"), "train": ("dataset",), "eval": ("model", "dataset"),
            "landscape": ("dataset",), "audit": ("dataset",)}


def read_config(path) -> dict:
    """Options from a key-value file or from an artifact's embedded config."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    if first.startswith("{"):
        try:
            return dict(json.loads(first).get("config", {}))
        except json.JSONDecodeError:
            try:
                return dict(json.loads(text).get("config", {}))
            except json.JSONDecodeError as exc:
                raise UsageError(f"unreadable config {path}: {exc}") from None
    for line in text.splitlines():
        if line.startswith("# config: "):  # landscape CSV
            return dict(json.loads(line[len("# config: "):]))
    config = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split(sep, 1))
        config[key.replace("-", "_")] = value
    return config


def effective_options(command: str, args: argparse.Namespace) -> dict:
    spec = OPTIONS[command]
    file_cfg = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(file_cfg) - set(spec)
    if unknown:
        logger.warning("ignoring unknown config keys: %s", ", ".join(sorted(unknown)))
    opts = {}
    for key, (conv, default) in spec.items():
        value = getattr(args, key, None)
        if value is None:
            value = file_cfg.get(key, default)
        try:
            opts[key] = conv(value) if value is not None else None
        except (TypeError, ValueError):
            raise UsageError(f"invalid value for {key}: {value!r}") from None
    for key in REQUIRED[command]:
        if opts.get(key) in (None, ""):
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
    return opts


def _threads(args) -> int:
    value = args.threads if args.threads is not None else os.environ.get("QSC_THREADS", 1)
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"invalid thread count {value!r}") from None
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_dataset(path):
    if not Path(path).is_file():
        raise UsageError(f"dataset not found: {path}")
    try:
        return load(path)
    except ValueError as exc:
        raise UsageError(f"cannot read dataset {path}: {exc}") from None


def _ansatz_spec(name: str, num_qubits: int, reps: int) -> AnsatzSpec:
    try:
        return AnsatzSpec(AnsatzFamily(name), num_qubits, reps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def cmd_gen(args) -> int:
    opts = effective_options("gen", args)
    system = opts["system"].lower()
    if system not in ("2q", "3q"):
        raise UsageError(f"--system must be 2q or 3q, got {opts['system']!r}")
    if opts["noise"].lower() not in ("ad", "rtn"):
        raise UsageError(f"--noise must be ad or rtn, got {opts['noise']!r}")
    if opts["per_class"] is None:
        opts["per_class"] = DEFAULT_PER_CLASS[int(system[0])]
    try:
        config = GenerationConfig(int(system[0]), opts["noise"], opts["per_class"], opts["seed"],
                                  opts["which"] or None, opts["eps"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    opts["noise"] = opts["noise"].lower()
    opts["which"] = config.which_unitary
    dataset = generate(config, workers=_threads(args))
    dataset.header["config"] = opts
    Path(args.out).write_text(dumps_dataset(dataset), encoding="utf-8")
    names = class_names(dataset.num_qubits)
    counts = np.bincount(dataset.labels, minlength=len(names))
    print(f"wrote {len(dataset.samples)} samples to {args.out} "
          f"({len(dataset.train)} train / {len(dataset.test)} test)")
    for name, count in zip(names, counts):
        print(f"  {name:<6} {count}")
    return 0


def cmd_train(args) -> int:
    opts = effective_options("train", args)
    dataset = _load_dataset(opts["dataset"])
    spec = _ansatz_spec(opts["ansatz"], dataset.num_qubits, opts["reps"])
    try:
        config = TrainConfig(opts["maxiter"], opts["rhobeg"], opts["rhoend"], opts["maxfun"], opts["readout"])
        config.optimizer(spec.num_params)
        if config.readout == "observable" and dataset.num_classes != 2:
            raise ValueError("observable read-out requires a two-class dataset")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    model = train(dataset, spec, config, opts["seed"])
    model.config = {**opts, **config.to_dict()}
    model.inputs = {"dataset_sha256": _sha256(opts["dataset"])}
    out = Path(args.out)
    out.write_text(model.to_json(), encoding="utf-8")
    loss_path = Path(args.loss_csv) if args.loss_csv else _sibling(out, ".loss.csv")
    loss_path.write_text(model.loss_csv(), encoding="utf-8")
    print(f"trained {spec.family.value}: loss {model.loss_trace[0]:.6f} -> "
          f"{min(model.loss_trace):.6f} ({model.termination}); wrote {out}, {loss_path}")
    return 0


def cmd_eval(args) -> int:
    opts = effective_options("eval", args)
    model_path = Path(opts["model"])
    if not model_path.is_file():
        raise UsageError(f"model not found: {model_path}")
    try:
        model = TrainedModel.from_json(model_path.read_text(encoding="utf-8"))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot read model {model_path}: {exc}") from None
    dataset = _load_dataset(opts["dataset"])
    if model.spec.num_qubits != dataset.num_qubits or model.num_classes != dataset.num_classes:
        raise UsageError(f"model is for {model.spec.num_qubits} qubits / {model.num_classes} classes, "
                         f"dataset has {dataset.num_qubits} / {dataset.num_classes}")
    if not dataset.test:
        raise UsageError("dataset has no test split")
    test = dataset.subset(dataset.test)
    predicted = predict_dataset(model, test)
    actual = np.array([s.label for s in test])
    cm = confusion(actual, predicted, dataset.num_classes, class_names(dataset.num_qubits))
    extra = {"tool_version": __version__, "config": opts, "split": "test",
             "num_test": len(test), "ansatz": model.spec.to_dict(),
             "inputs": {"model_sha256": _sha256(model_path),
                        "dataset_sha256": _sha256(opts["dataset"])}}
    table = format_table(cm)
    report = Path(args.report)
    report.write_text(report_json(cm, extra), encoding="utf-8")
    _sibling(report, ".txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def cmd_landscape(args) -> int:
    opts = effective_options("landscape", args)
    dataset = _load_dataset(opts["dataset"])
    spec = _ansatz_spec(opts["ansatz"], dataset.num_qubits, opts["reps"])
    i, j = _int_pair(opts["params"])
    if i == j or not (0 <= i < spec.num_params and 0 <= j < spec.num_params):
        raise UsageError(f"--params needs two distinct indices below {spec.num_params}")
    if opts["grid"] < 3:
        raise UsageError("--grid must be >= 3")
    if opts["samples"] < 1:
        raise UsageError("--samples must be >= 1")
    chosen = representative_samples(dataset, opts["samples"], opts["seed"])
    samples = dataset.subset(chosen)
    meta = {"sample_indices": ",".join(map(str, chosen)),
            "dataset_sha256": _sha256(opts["dataset"]),
            "config": json.dumps(opts, sort_keys=True)}
    if opts["flatness_points"]:
        if opts["flatness_points"] < 10:
            raise UsageError("--flatness-points must be 0 or >= 10")
        rep = flatness(spec, samples, opts["flatness_points"], seed=opts["seed"])
        meta["gradient_variance"] = format(rep.gradient_variance, ".17g")
        meta["flatness_points"] = rep.num_points
    grid = scan(spec, samples, (i, j), opts["grid"], opts["seed"], _threads(args), meta)
    out = Path(args.out)
    out.write_text(grid.to_csv(), encoding="utf-8")
    _sibling(out, ".axis.csv").write_text(grid.axis_csv(), encoding="utf-8")
    print(f"wrote {opts['grid']}x{opts['grid']} landscape to {out} "
          f"(loss range {grid.losses.min():.4f} .. {grid.losses.max():.4f})")
    return 0


def cmd_audit(args) -> int:
    opts = effective_options("audit", args)
    dataset = _load_dataset(opts["dataset"])
    if not dataset.samples:
        raise UsageError("dataset is empty")
    problems = audit(dataset)
    for index, reason in problems:
        print(f"FAIL sample {index}: {reason}")
    if problems:
        print(f"audit failed: {len(problems)} of {len(dataset.samples)} samples")
        return 1
    print(f"audit passed: {len(dataset.samples)} samples")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qsc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file or a previous artifact")
        p.add_argument("--threads", type=int, help="worker cap (env QSC_THREADS)")

    p = sub.add_parser("gen", help="generate a labeled dataset")
    common(p)
    p.add_argument("--system", choices=["2q", "3q"])
    p.add_argument("--noise", choices=["ad", "rtn"])
    p.add_argument("--per-class", dest="per_class", type=int, help="default 200 (2q), 150 (3q)")
    p.add_argument("--seed", type=int)
    p.add_argument("--which", choices=["U0", "U1"], help="dilated Kraus operator (default AD:U0, RTN:U1)")
    p.add_argument("--eps", type=float, help="entropy threshold in bits")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a classifier")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--ansatz", choices=[f.value for f in AnsatzFamily])
    p.add_argument("--reps", type=int)
    p.add_argument("--maxiter", type=int)
    p.add_argument("--rhobeg", type=float)
    p.add_argument("--rhoend", type=float)
    p.add_argument("--maxfun", type=int)
    p.add_argument("--readout", choices=["mod", "observable"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-csv", dest="loss_csv", help="default: <out>.loss.csv")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on the test split")
    common(p)
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("landscape", help="scan the loss over two parameters")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--ansatz", choices=[f.value for f in AnsatzFamily])
    p.add_argument("--reps", type=int)
    p.add_argument("--params", help="two parameter indices, e.g. 0,1")
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="size of the representative sample set")
    p.add_argument("--flatness-points", dest="flatness_points", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("audit", help="re-simulate a dataset and check its labels")
    common(p)
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qsc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        logger.debug("failure", exc_info=True)
        print(f"qsc {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
