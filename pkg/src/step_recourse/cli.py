"""Command-line interface: train, recourse, benchmark, sweeps, serve.

Exit codes: 0 on success, 2 for usage/config problems (bad flags, missing
files, invalid config), 1 for runtime failures. Config values come from the
JSON config file, then the STEP_SEED environment variable for the seed, then
explicit CLI flags, in increasing order of precedence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .alpha import alpha_from_spec
from .data import binary_targets, encode_table, fit_scaling_stats, read_table
from .errors import RecourseError
from .harness import (
    ExperimentConfig,
    build_trial_pipeline,
    run_experiment,
    sweep_k,
    sweep_noise,
    write_report,
)
from .models import train_logistic
from .paths import PathConfig, generate_paths
from .schema import load_schema, schema_to_dict


class UsageError(Exception):
    """Problem the user can fix: bad flag, missing file, invalid config."""


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        config = ExperimentConfig.from_file(path)
    except (json.JSONDecodeError, RecourseError, TypeError) as exc:
        raise UsageError(f"invalid config {path}: {exc}") from exc

    overrides = {}
    env_seed = os.environ.get("STEP_SEED")
    if env_seed is not None:
        try:
            overrides["seed"] = int(env_seed)
        except ValueError as exc:
            raise UsageError(f"STEP_SEED must be an integer, got {env_seed!r}") from exc
    for name in (
        "csv",
        "schema",
        "method",
        "k",
        "trials",
        "threshold",
        "step_size",
        "max_iterations",
        "noise_beta",
        "clustering",
        "seed",
        "poi_cap",
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    try:
        config = replace(config, **overrides)
    except RecourseError as exc:
        raise UsageError(str(exc)) from exc

    for label, file_path in (("csv", config.csv), ("schema", config.schema)):
        if not file_path or not Path(file_path).exists():
            raise UsageError(f"{label} file not found: {file_path or '(unset)'}")
    return config


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--csv")
    parser.add_argument("--schema")
    parser.add_argument("--method", choices=["step", "face"])
    parser.add_argument("--k", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--step-size", dest="step_size", type=float)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--noise-beta", dest="noise_beta", type=float)
    parser.add_argument("--clustering", choices=["kmeans", "random"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--poi-cap", dest="poi_cap", type=int)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="step-recourse",
        description="Direction-based recourse: benchmark harness and explorer service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a logistic model and save it")
    p_train.add_argument("--csv", required=True)
    p_train.add_argument("--schema", required=True)
    p_train.add_argument("--out", required=True, help="model JSON output path")
    p_train.add_argument(
        "--out-schema", help="write the schema with fitted scaling stats here"
    )
    p_train.add_argument("--epochs", type=int, default=500)
    p_train.add_argument("--learning-rate", type=float, default=0.5)
    p_train.add_argument("--l2-penalty", type=float, default=1e-4)
    p_train.add_argument("--seed", type=int, default=0)

    p_rec = sub.add_parser("recourse", help="print recourse paths for one record")
    p_rec.add_argument("--config", required=True)
    p_rec.add_argument(
        "--poi", required=True, help="raw record as JSON, or @file.json"
    )
    _add_override_flags(p_rec)

    p_bench = sub.add_parser("benchmark", help="run the experiment and write a report")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--out", required=True, help="report JSON output path")
    p_bench.add_argument("--out-csv", help="also write the aggregate CSV here")
    _add_override_flags(p_bench)

    p_noise = sub.add_parser("sweep-noise", help="benchmark at several noise levels")
    p_noise.add_argument("--config", required=True)
    p_noise.add_argument("--betas", required=True, help="comma-separated, e.g. 0,0.1,0.3")
    p_noise.add_argument("--out-dir", required=True)
    _add_override_flags(p_noise)

    p_k = sub.add_parser("sweep-k", help="benchmark at several cluster counts")
    p_k.add_argument("--config", required=True)
    p_k.add_argument("--ks", required=True, help="comma-separated, e.g. 1,2,3")
    p_k.add_argument("--out-dir", required=True)
    _add_override_flags(p_k)

    p_serve = sub.add_parser("serve", help="run the interactive recourse service")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--snapshot", help="session snapshot JSON path")
    _add_override_flags(p_serve)

    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    for label, file_path in (("csv", args.csv), ("schema", args.schema)):
        if not Path(file_path).exists():
            raise UsageError(f"{label} file not found: {file_path}")
    schema = load_schema(args.schema)
    if schema.target_name is None:
        raise UsageError(f"schema {args.schema} declares no target column")
    table = read_table(args.csv, schema)
    if not schema.has_scaling_stats():
        schema = fit_scaling_stats(table, schema)
    features = encode_table(table, schema)
    targets = binary_targets(table, schema)
    model = train_logistic(
        features,
        targets,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        l2_penalty=args.l2_penalty,
        seed=args.seed,
    )
    model.save(args.out)
    print(f"wrote model to {args.out}")
    if args.out_schema:
        with open(args.out_schema, "w", encoding="utf-8") as fh:
            json.dump(schema_to_dict(schema), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote schema with scaling stats to {args.out_schema}")
    return 0


def _cmd_recourse(args: argparse.Namespace) -> int:
    config = _load_config(args)
    raw = args.poi
    if raw.startswith("@"):
        poi_path = Path(raw[1:])
        if not poi_path.exists():
            raise UsageError(f"poi file not found: {poi_path}")
        raw = poi_path.read_text(encoding="utf-8")
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--poi is not valid JSON: {exc}") from exc

    schema = load_schema(config.schema)
    table = read_table(config.csv, schema)
    pipeline = build_trial_pipeline(config, table, schema, trial=0)
    poi = pipeline.schema.encode_record(record)
    paths = generate_paths(
        poi,
        pipeline.train_dataset,
        pipeline.clustering,
        pipeline.model,
        alpha_from_spec(config.alpha),
        PathConfig(
            step_size=config.step_size,
            max_iterations=config.max_iterations,
            threshold=config.threshold,
            privacy=config.privacy,
        ),
    )
    print(json.dumps({"paths": [p.to_dict() for p in paths]}, indent=2))
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    config = _load_config(args)
    report = run_experiment(config)
    write_report(report, config, args.out)
    if args.out_csv:
        Path(args.out_csv).write_text(report.to_csv(), encoding="utf-8")
    print(f"wrote report to {args.out}")
    return 0


def _parse_grid(raw: str, cast) -> list:
    try:
        return [cast(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad sweep grid {raw!r}: {exc}") from exc


def _cmd_sweep_noise(args: argparse.Namespace) -> int:
    config = _load_config(args)
    betas = _parse_grid(args.betas, float)
    if not betas:
        raise UsageError("--betas is empty")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for beta, report in sweep_noise(config, betas):
        out = out_dir / f"report_beta_{beta:g}.json"
        write_report(report, replace(config, noise_beta=beta), out)
        print(f"wrote {out}")
    return 0


def _cmd_sweep_k(args: argparse.Namespace) -> int:
    config = _load_config(args)
    ks = _parse_grid(args.ks, int)
    if not ks:
        raise UsageError("--ks is empty")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k, report in sweep_k(config, ks):
        out = out_dir / f"report_k_{k}.json"
        write_report(report, replace(config, k=k), out)
        print(f"wrote {out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_service_state, create_app

    config = _load_config(args)
    state = build_service_state(config, snapshot_path=args.snapshot)
    app = create_app(state)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "recourse": _cmd_recourse,
    "benchmark": _cmd_benchmark,
    "sweep-noise": _cmd_sweep_noise,
    "sweep-k": _cmd_sweep_k,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RecourseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
