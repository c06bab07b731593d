"""Command-line interface.

Subcommands: verify-data (check an MNIST-layout corpus against the published
byte lengths and load it), run-binary and run-categorical (the experiment
suites), bernoulli (the one-parameter weighted-MLE demonstration), and
gradcheck (finite-difference validation of every loss gradient).

Settings resolve in three layers: built-in defaults, then a JSON config file
given with --config, then explicit flags.  Every command echoes its fully
resolved configuration as one JSON line before doing any work; feeding that
echoed object back via --config reproduces the run.

Exit codes: 0 success, 1 validation or configuration error, 2 runtime
failure (including a failed gradient check or a failed numeric cross-check).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bernoulli import BernoulliScenario, analytic_minimizer, descend, likelihood_check, loss_curve
from .data import (
    MNIST_FILE_BYTES,
    MNIST_TOTAL_EXAMPLES,
    concat_corpora,
    load_idx_files,
)
from .experiments import (
    DEFAULT_BINARY_COST,
    DEFAULT_OFF_PAIR_COST,
    DEFAULT_PAIR_WEIGHT,
    all_ordered_pairs,
    run_binary_suite,
    run_categorical_suite,
    sample_pairs,
    save_records,
    summary_table,
    summary_to_csv,
)
from .losses import BinaryCostModel
from .nn import TrainConfig, gradcheck_matrix

DATA_DIR_ENV = "RWWCE_DATA_DIR"

STANDARD_FILES = (
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
)

TRAIN_KEYS = ("epochs", "batch_size", "learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon")


class CliError(Exception):
    """A user-facing validation or configuration problem."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is 1 for any
    # validation problem, so surface parse errors as CliError instead.
    def error(self, message):
        raise CliError(message)


def _parse_int_list(text: str) -> list[int]:
    """Parse "3", "0,2,5", and range forms like "0-9" (mixable with commas)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:  # allow a leading minus sign to fail int() below
            lo_text, hi_text = part.split("-", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise CliError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise CliError(f"no integers in {text!r}")
    return out


def _parse_pairs(text: str) -> list[tuple[int, int]] | str:
    if text.strip() == "all":
        return "all"
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            a_text, b_text = part.split(":")
            pairs.append((int(a_text), int(b_text)))
        except ValueError as e:
            raise CliError(f"bad pair {part!r}, expected k:k2") from e
    if not pairs:
        raise CliError(f"no pairs in {text!r}")
    return pairs


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CliError(f"config file {path} is not valid JSON: {e}") from e
    except OSError as e:
        raise CliError(f"cannot read config file {path}: {e}") from e
    if not isinstance(doc, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    return doc


def _overlay(defaults: dict, config: dict, flags: dict) -> dict:
    """defaults <- config file <- explicit flags; unknown config keys error."""
    out = dict(defaults)
    for key, value in config.items():
        if key == "command":
            continue
        if key not in defaults:
            raise CliError(f"unknown config key {key!r}")
        out[key] = value
    for key, value in flags.items():
        if value is not None:
            out[key] = value
    return out


def _echo(resolved: dict) -> None:
    print("resolved config: " + json.dumps(resolved, sort_keys=True))


def _standard_paths(data_dir: str) -> tuple[list[str], list[str]]:
    """Locate the four standard corpus files in a directory (.gz accepted)."""
    base = Path(data_dir)
    images, labels = [], []
    for image_name, label_name in STANDARD_FILES:
        for name, bucket in ((image_name, images), (label_name, labels)):
            plain = base / name
            gz = base / (name + ".gz")
            if plain.exists():
                bucket.append(str(plain))
            elif gz.exists():
                bucket.append(str(gz))
            else:
                raise CliError(f"missing corpus file {plain} (or {gz.name})")
    return images, labels


def _resolve_data(resolved: dict) -> None:
    """Fill resolved["images"]/["labels"] from explicit lists or a data dir."""
    images, labels = resolved.get("images"), resolved.get("labels")
    if images or labels:
        if not images or not labels or len(images) != len(labels):
            raise CliError("images and labels must be given in matching pairs")
    else:
        data_dir = resolved.get("data_dir") or os.environ.get(DATA_DIR_ENV)
        if not data_dir:
            raise CliError(
                f"no data source: pass --images/--labels, --data-dir, or set ${DATA_DIR_ENV}"
            )
        images, labels = _standard_paths(data_dir)
    resolved["images"] = [str(p) for p in images]
    resolved["labels"] = [str(p) for p in labels]
    resolved.pop("data_dir", None)


def _load_pool(resolved: dict):
    corpora = [
        load_idx_files(i, l) for i, l in zip(resolved["images"], resolved["labels"])
    ]
    pool = concat_corpora(*corpora)
    print(f"loaded {pool.size} examples from {len(corpora)} file pair(s)")
    return pool


def _train_config(resolved: dict, seed: int) -> TrainConfig:
    return TrainConfig(
        epochs=int(resolved["epochs"]),
        batch_size=int(resolved["batch_size"]),
        learning_rate=float(resolved["learning_rate"]),
        adam_beta1=float(resolved["adam_beta1"]),
        adam_beta2=float(resolved["adam_beta2"]),
        adam_epsilon=float(resolved["adam_epsilon"]),
        seed=seed,
    )


def _train_defaults() -> dict:
    base = TrainConfig()
    return {
        "epochs": base.epochs,
        "batch_size": base.batch_size,
        "learning_rate": base.learning_rate,
        "adam_beta1": base.adam_beta1,
        "adam_beta2": base.adam_beta2,
        "adam_epsilon": base.adam_epsilon,
    }


def _write_outputs(resolved: dict, summary, records) -> None:
    out_dir = Path(resolved["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.jsonl"
    csv_path = out_dir / "summary.csv"
    save_records(records, records_path)
    csv_path.write_text(summary_to_csv(summary), encoding="utf-8")
    print(f"wrote {records_path} and {csv_path}")
    print(summary_table(summary), end="")


def cmd_verify_data(args) -> int:
    defaults = {"data_dir": None}
    resolved = _overlay(defaults, _load_config_file(args.config), {"data_dir": args.data_dir})
    data_dir = resolved["data_dir"] or os.environ.get(DATA_DIR_ENV)
    if not data_dir:
        raise CliError(f"pass --data-dir or set ${DATA_DIR_ENV}")
    resolved["data_dir"] = str(data_dir)
    _echo(resolved)

    images, labels = _standard_paths(data_dir)
    failures = 0
    for path_text in [p for pair in zip(images, labels) for p in pair]:
        path = Path(path_text)
        name = path.name.removesuffix(".gz")
        expected = MNIST_FILE_BYTES[name]
        if path.suffix == ".gz":
            import gzip

            with gzip.open(path, "rb") as f:
                actual = len(f.read())
        else:
            actual = path.stat().st_size
        ok = actual == expected
        print(f"{name}: {actual} bytes (expected {expected}): {'ok' if ok else 'MISMATCH'}")
        failures += 0 if ok else 1
    if failures:
        raise CliError(f"{failures} file(s) failed the byte-length check")

    pool = concat_corpora(
        load_idx_files(images[0], labels[0]), load_idx_files(images[1], labels[1])
    )
    if pool.size != MNIST_TOTAL_EXAMPLES:
        raise CliError(f"pool has {pool.size} examples, expected {MNIST_TOTAL_EXAMPLES}")
    classes = len(set(pool.labels.tolist()))
    print(f"pool: {pool.size} examples, {classes} classes: ok")
    return 0


def cmd_run_binary(args) -> int:
    defaults = {
        "scale": "desk",
        "digits": None,
        "slices": None,
        "base_seed": 0,
        "w_mcfn": DEFAULT_BINARY_COST.fn_cost,
        "w_mcfp": DEFAULT_BINARY_COST.fp_cost,
        "jobs": 1,
        "out_dir": "runs/binary",
        "images": None,
        "labels": None,
        "data_dir": None,
        **_train_defaults(),
    }
    flags = {
        "scale": args.scale,
        "digits": _parse_int_list(args.digits) if args.digits else None,
        "slices": _parse_int_list(args.slices) if args.slices else None,
        "base_seed": args.seed,
        "w_mcfn": args.w_fn,
        "w_mcfp": args.w_fp,
        "jobs": args.jobs,
        "out_dir": args.out_dir,
        "images": args.images,
        "labels": args.labels,
        "data_dir": args.data_dir,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "learning_rate": args.learning_rate,
        "adam_beta1": None,
        "adam_beta2": None,
        "adam_epsilon": None,
    }
    resolved = _overlay(defaults, _load_config_file(args.config), flags)
    if resolved["digits"] is None:
        resolved["digits"] = list(range(10))
    if resolved["slices"] is None:
        resolved["slices"] = list(range(10)) if resolved["scale"] == "full" else [0]
    _resolve_data(resolved)
    resolved["command"] = "run-binary"
    _echo(resolved)

    pool = _load_pool(resolved)
    cost = BinaryCostModel(float(resolved["w_mcfn"]), float(resolved["w_mcfp"]))
    template = _train_config(resolved, seed=int(resolved["base_seed"]))
    summary, records = run_binary_suite(
        pool,
        [int(d) for d in resolved["digits"]],
        [int(s) for s in resolved["slices"]],
        base_seed=int(resolved["base_seed"]),
        cost=cost,
        train_template=template,
        jobs=int(resolved["jobs"]),
    )
    _write_outputs(resolved, summary, records)
    return 0


def cmd_run_categorical(args) -> int:
    defaults = {
        "scale": "desk",
        "pairs": None,
        "base_seed": 0,
        "pair_weight": DEFAULT_PAIR_WEIGHT,
        "off_pair_cost": DEFAULT_OFF_PAIR_COST,
        "jobs": 1,
        "out_dir": "runs/categorical",
        "images": None,
        "labels": None,
        "data_dir": None,
        **_train_defaults(),
    }
    flags = {
        "scale": args.scale,
        "pairs": _parse_pairs(args.pairs) if args.pairs else None,
        "base_seed": args.seed,
        "pair_weight": args.pair_weight,
        "off_pair_cost": args.off_pair_cost,
        "jobs": args.jobs,
        "out_dir": args.out_dir,
        "images": args.images,
        "labels": args.labels,
        "data_dir": args.data_dir,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "learning_rate": args.learning_rate,
        "adam_beta1": None,
        "adam_beta2": None,
        "adam_epsilon": None,
    }
    resolved = _overlay(defaults, _load_config_file(args.config), flags)
    if resolved["pairs"] is None or resolved["pairs"] == "all":
        if resolved["pairs"] == "all" or resolved["scale"] == "full":
            resolved["pairs"] = all_ordered_pairs()
        else:
            resolved["pairs"] = sample_pairs(10, int(resolved["base_seed"]))
    pairs = [(int(a), int(b)) for a, b in resolved["pairs"]]
    resolved["pairs"] = [[a, b] for a, b in pairs]
    _resolve_data(resolved)
    resolved["command"] = "run-categorical"
    _echo(resolved)

    pool = _load_pool(resolved)
    template = _train_config(resolved, seed=int(resolved["base_seed"]))
    summary, records = run_categorical_suite(
        pool,
        pairs,
        base_seed=int(resolved["base_seed"]),
        pair_weight=float(resolved["pair_weight"]),
        off_pair_cost=float(resolved["off_pair_cost"]),
        train_template=template,
        jobs=int(resolved["jobs"]),
    )
    _write_outputs(resolved, summary, records)
    return 0


def cmd_bernoulli(args) -> int:
    defaults = {
        "n_pos": 9,
        "n_neg": 1,
        "w_pos": 1.0,
        "w_neg": 1.0,
        "p0": 0.5,
        "step": 0.01,
        "iterations": 100_000,
        "curve": None,
        "curve_points": 99,
    }
    flags = {
        "n_pos": args.n_pos,
        "n_neg": args.n_neg,
        "w_pos": args.w_pos,
        "w_neg": args.w_neg,
        "p0": args.p0,
        "step": args.step,
        "iterations": args.iterations,
        "curve": args.curve,
        "curve_points": args.curve_points,
    }
    resolved = _overlay(defaults, _load_config_file(args.config), flags)
    resolved["command"] = "bernoulli"
    _echo(resolved)

    scenario = BernoulliScenario(
        n_pos=int(resolved["n_pos"]),
        n_neg=int(resolved["n_neg"]),
        w_pos=float(resolved["w_pos"]),
        w_neg=float(resolved["w_neg"]),
    )
    closed_form = analytic_minimizer(scenario)
    descended = descend(
        scenario,
        p0=float(resolved["p0"]),
        step=float(resolved["step"]),
        iterations=int(resolved["iterations"]),
    )
    likelihood_argmax, _ = likelihood_check(scenario)
    print(f"closed-form minimizer: {closed_form!r}")
    print(f"gradient descent result: {descended!r} (|diff| = {abs(descended - closed_form):.3e})")
    print(
        f"likelihood argmax: {likelihood_argmax!r} "
        f"(|diff| = {abs(likelihood_argmax - closed_form):.3e})"
    )

    if resolved["curve"]:
        points = int(resolved["curve_points"])
        if points < 2:
            raise CliError("curve_points must be >= 2")
        grid = [(i + 1) / (points + 1) for i in range(points)]
        rows = loss_curve(scenario, grid)
        path = Path(resolved["curve"])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            "p,loss\n" + "".join(f"{p!r},{j!r}\n" for p, j in rows), encoding="utf-8"
        )
        print(f"wrote {path}")

    if abs(likelihood_argmax - closed_form) > 1e-8:
        print("likelihood cross-check FAILED (disagreement above 1e-8)", file=sys.stderr)
        return 2
    return 0


def cmd_gradcheck(args) -> int:
    defaults = {"seed": 0, "instances": 4, "step": 1e-5, "tolerance": 1e-5}
    flags = {
        "seed": args.seed,
        "instances": args.instances,
        "step": args.step,
        "tolerance": args.tolerance,
    }
    resolved = _overlay(defaults, _load_config_file(args.config), flags)
    resolved["command"] = "gradcheck"
    _echo(resolved)

    report = gradcheck_matrix(
        seed=int(resolved["seed"]),
        instances_per_variant=int(resolved["instances"]),
        step=float(resolved["step"]),
        tolerance=float(resolved["tolerance"]),
    )
    for variant, worst in report.worst_by_variant.items():
        status = "ok" if worst < report.tolerance else "FAIL"
        print(f"{variant}: max relative error {worst:.3e} {status}")
    if not report.passed:
        print("gradient check FAILED", file=sys.stderr)
        return 2
    print(f"all {len(report.worst_by_variant)} loss variants pass at tolerance {report.tolerance:g}")
    return 0


def _add_data_arguments(sub) -> None:
    sub.add_argument("--data-dir", help=f"directory with the standard corpus files (default ${DATA_DIR_ENV})")
    sub.add_argument("--images", action="append", help="IDX images file (repeat per file pair)")
    sub.add_argument("--labels", action="append", help="IDX labels file (repeat per file pair)")


def _add_train_arguments(sub) -> None:
    sub.add_argument("--epochs", type=int)
    sub.add_argument("--batch-size", type=int)
    sub.add_argument("--learning-rate", type=float)
    sub.add_argument("--seed", type=int, help="base seed; trial i uses base_seed + i")
    sub.add_argument("--jobs", type=int, help="parallel trial workers (threads)")
    sub.add_argument("--out-dir")
    sub.add_argument("--scale", choices=("desk", "full"), help="trial-count preset")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rwwce", description="Cost-sensitive classification toolkit")
    parser.add_argument("--config", help="JSON config file; flags override its values")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify-data", help="check a corpus against the published MNIST byte lengths")
    verify.add_argument("--data-dir")
    verify.set_defaults(handler=cmd_verify_data)

    binary = commands.add_parser("run-binary", help="imbalanced binary detection suite")
    _add_data_arguments(binary)
    _add_train_arguments(binary)
    binary.add_argument("--digits", help='digits to detect, e.g. "0-9" or "3,7"')
    binary.add_argument("--slices", help='positive-slice indices, e.g. "0" or "0-9"')
    binary.add_argument("--w-fn", type=float, help="cost of a false negative")
    binary.add_argument("--w-fp", type=float, help="cost of a false positive")
    binary.set_defaults(handler=cmd_run_binary)

    categorical = commands.add_parser("run-categorical", help="10-class expensive-confusion suite")
    _add_data_arguments(categorical)
    _add_train_arguments(categorical)
    categorical.add_argument("--pairs", help='"all" or pairs like "1:7,3:5" (true:predicted)')
    categorical.add_argument("--pair-weight", type=float, help="extra cost on the expensive cell")
    categorical.add_argument("--off-pair-cost", type=float, help="cost of every other error")
    categorical.set_defaults(handler=cmd_run_categorical)

    bern = commands.add_parser("bernoulli", help="weighted Bernoulli MLE demonstration")
    bern.add_argument("--n-pos", type=int)
    bern.add_argument("--n-neg", type=int)
    bern.add_argument("--w-pos", type=float)
    bern.add_argument("--w-neg", type=float)
    bern.add_argument("--p0", type=float)
    bern.add_argument("--step", type=float)
    bern.add_argument("--iterations", type=int)
    bern.add_argument("--curve", help="write a p,loss CSV to this path")
    bern.add_argument("--curve-points", type=int)
    bern.set_defaults(handler=cmd_bernoulli)

    grad = commands.add_parser("gradcheck", help="finite-difference check of every loss gradient")
    grad.add_argument("--seed", type=int)
    grad.add_argument("--instances", type=int, help="instances per loss variant")
    grad.add_argument("--step", type=float)
    grad.add_argument("--tolerance", type=float)
    grad.set_defaults(handler=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.handler(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # genuine runtime failure
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
