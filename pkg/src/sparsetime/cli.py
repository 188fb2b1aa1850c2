from __future__ import annotations

import argparse
import sys
from pathlib import Path

from rich.console import Console

from .config import RunConfig, load_config
from .decompose import (
    decompose_experiment,
    memory_project,
    saliency_project,
    saliency_weights,
    split_frequencies,
    weighted_reconstruction,
)
from .evaluation.ablation import ABLATION_FIELDS, run_ablation_grid
from .evaluation.baseline import persistence_forecast
from .evaluation.report import (
    ALPHA_SUMMARY_FIELDS,
    EvalReport,
    alpha_summary_rows,
    build_eval_report,
    render_report_table,
)
from .evaluation.timing import LINEARITY_RATIO_LIMIT, doubling_ratios, forward_seconds, timing_sweep
from .exceptions import ConfigError, DataError, SparseTimeError, exit_code_for
from .fsutils import ensure_dir, resolve_within
from .linalg import Matrix
from .logging import configure_logging, get_logger
from .model import COMPONENT_NAMES, init_params, predict_batch
from .pipeline.dataset import (
    SplitDataset,
    build_split_dataset,
    build_split_samples,
    chrono_split,
    ingest_csv,
    zscore,
)
from .pipeline.synthetic import synth_series
from .pipeline.trainer import train
from .storage.artifacts import (
    read_json,
    write_dataset_cache,
    write_json,
    write_matrix_csv,
    write_rows_csv,
    write_train_log,
)
from .storage.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .validation import CliArgsModel, CliValidationError, render_cli_error, validate_cli_args

BENCH_FIELDS = ("length", "seconds", "ratio", "linear_ok")
PREDICTION_FIELDS = ("row", "target", "prediction", "naive", "target_raw", "prediction_raw", "naive_raw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsetime",
        description="Saliency / memory / trend decomposition forecaster",
    )
    parser.add_argument("--config", "-c", type=str, help="config path (YAML)")
    parser.add_argument("--log-level", type=str, default="INFO")
    subparsers = parser.add_subparsers(dest="command")

    decompose_parser = subparsers.add_parser("decompose", help="导出第一个窗口的分量轨迹 (CSV)")
    decompose_parser.add_argument("--seed", type=int, help="覆盖 data.synthetic.seed（CSV 数据源忽略）")
    decompose_parser.add_argument("--out", type=str, help="临时覆盖 output_dir")
    decompose_parser.add_argument("--window", type=int, help="覆盖 model.window")

    train_parser = subparsers.add_parser("train", help="训练模型，输出 checkpoint、训练日志与评估报告")
    _add_run_args(train_parser)
    train_parser.add_argument("--cache-dataset", action="store_true", help="同时写出 dataset.json（归一化统计与切分）")
    train_parser.add_argument("--timing", action="store_true", help="在报告中记录单窗口前向耗时（结果不再逐字节可复现）")

    predict_parser = subparsers.add_parser("predict", help="加载 checkpoint，输出预测 CSV")
    predict_parser.add_argument("--checkpoint", type=str, help="checkpoint.json 路径")
    predict_parser.add_argument("--split", type=str, default="test", help="train / validation / test")
    predict_parser.add_argument("--out", type=str, help="临时覆盖 output_dir")

    ablate_parser = subparsers.add_parser("ablate", help="训练 7 种分量组合并输出消融表")
    _add_run_args(ablate_parser)

    bench_parser = subparsers.add_parser("bench", help="计时扫描，检验序列长度上的线性复杂度")
    bench_parser.add_argument("--out", type=str, help="临时覆盖 output_dir")
    bench_parser.add_argument("--lengths", type=str, help="逗号分隔的序列长度，如 1000,2000,4000")
    bench_parser.add_argument("--repeats", type=int, help="每个长度的重复次数（取中位数）")
    bench_parser.add_argument("--hidden-dim", type=int)

    report_parser = subparsers.add_parser("report", help="汇总多个运行目录的 α 与测试指标")
    report_parser.add_argument("runs", nargs="*", help="包含 eval_report.json 的运行目录")
    report_parser.add_argument("--out", type=str, help="alpha_summary.csv 输出目录")
    return parser


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="训练随机种子（train / ablate 必填）")
    parser.add_argument("--out", type=str, help="临时覆盖 output_dir")
    parser.add_argument("--epochs", type=int, help="覆盖 train.max_epochs")
    parser.add_argument("--window", type=int, help="覆盖 model.window")
    parser.add_argument("--hidden-dim", type=int, help="覆盖 model.hidden_dim")


def _extract_global_args(argv: list[str] | None) -> tuple[argparse.Namespace, list[str]]:
    global_parser = argparse.ArgumentParser(add_help=False)
    global_parser.add_argument("--config", "-c", type=str, default=None)
    global_parser.add_argument("--log-level", type=str, default=None)
    global_ns, remaining = global_parser.parse_known_args(argv or [])
    return global_ns, list(remaining)


def _apply_overrides(config: RunConfig, cli_args: CliArgsModel) -> None:
    if cli_args.out:
        config.output_dir = cli_args.out
    if cli_args.command == "decompose" and cli_args.seed is not None:
        # train / ablate 的 --seed 只作用于训练；decompose 没有训练，种子用于合成数据
        config.data.synthetic.seed = cli_args.seed
    if cli_args.epochs is not None:
        config.train.max_epochs = cli_args.epochs
    if cli_args.window is not None:
        config.model.window = cli_args.window
    if cli_args.hidden_dim is not None:
        config.model.hidden_dim = cli_args.hidden_dim
    if cli_args.lengths:
        config.bench.lengths = cli_args.lengths
    if cli_args.repeats is not None:
        config.bench.repeats = cli_args.repeats


def _require_seed(cli_args: CliArgsModel) -> int:
    if cli_args.seed is None:
        raise ConfigError(f"--seed is required for {cli_args.command}")
    return cli_args.seed


def _load_series(config: RunConfig) -> tuple[Matrix, list[str], int]:
    """返回原始序列、特征名与目标列下标。"""
    if config.data.source == "csv":
        csv_cfg = config.data.csv
        table = ingest_csv(
            csv_cfg.path,
            csv_cfg.feature_columns or None,
            csv_cfg.target_column,
            delimiter=csv_cfg.delimiter,
            missing_sentinel=csv_cfg.missing_sentinel,
        )
        return table.values, list(table.columns), table.target_index
    synth = config.data.synthetic
    series = synth_series(
        synth.kind,
        synth.length,
        synth.features,
        synth.seed,
        noise=synth.noise,
        period=synth.period,
        spike_prob=synth.spike_prob,
    )
    return series, [f"x{j}" for j in range(synth.features)], config.data.target_feature


def _load_dataset(config: RunConfig) -> SplitDataset:
    series, names, target = _load_series(config)
    return build_split_dataset(
        series,
        window=config.model.window,
        target_feature=target,
        smooth_window=config.model.smooth_window,
        feature_names=names,
    )


def _prepare_output(config: RunConfig) -> Path:
    out_dir = config.output_path
    ensure_dir(out_dir)
    return out_dir


def _run_decompose(config: RunConfig, logger) -> int:
    series, names, _ = _load_series(config)
    window = config.model.window
    smooth = config.model.smooth_window
    rank = config.model.rank
    if series.shape[0] < window:
        raise DataError(f"series of {series.shape[0]} rows is shorter than window length {window}")
    if rank > min(window, series.shape[1]):
        raise ConfigError(f"model.rank={rank} exceeds min(window, d)={min(window, series.shape[1])}")
    train_rows, _, _ = chrono_split(series.shape[0])
    normalized, _ = zscore(series, train_rows)
    x_window = normalized[:window]

    dec = decompose_experiment(x_window, smooth)
    low, high = split_frequencies(x_window, smooth)
    weights = saliency_weights(x_window)

    out_dir = _prepare_output(config)
    traces = {
        "input.csv": x_window,
        "saliency.csv": dec.s,
        "memory.csv": dec.m,
        "trend.csv": dec.g,
        "trend_low.csv": low,
        "trend_high.csv": high,
        "projection_saliency.csv": saliency_project(x_window, weights),
        "projection_memory.csv": memory_project(x_window, rank),
    }
    for name, matrix in traces.items():
        write_matrix_csv(resolve_within(out_dir, name), names, matrix)
    write_rows_csv(
        resolve_within(out_dir, "projection_weights.csv"),
        ("step", "weight"),
        ({"step": t, "weight": w} for t, w in enumerate(weights.w.tolist())),
    )
    logger.info("decompose: wrote %d trace files to %s (L=%d, d=%d)", len(traces) + 1, out_dir, window, len(names))
    return 0


def _run_train(config: RunConfig, cli_args: CliArgsModel, logger) -> int:
    train_cfg = config.train_config(_require_seed(cli_args))
    data = _load_dataset(config)
    out_dir = _prepare_output(config)

    params, log = train(init_params(data.d, train_cfg.hidden_dim, train_cfg.seed), data, train_cfg)
    seconds = forward_seconds(params, data.test) if cli_args.timing else None
    echo = {**config.echo(), "seed": cli_args.seed}
    report = build_eval_report(params, data, log, config=echo, forward_seconds=seconds)

    save_checkpoint(
        resolve_within(out_dir, "checkpoint.json"),
        Checkpoint(
            params=params,
            norm_stats=data.norm_stats,
            window=data.window_length,
            smooth_window=data.smooth_window,
            target_feature=data.target_feature,
            feature_names=data.feature_names,
            train_config=train_cfg.to_dict(),
        ),
    )
    write_train_log(resolve_within(out_dir, "train_log.jsonl"), log)
    write_json(resolve_within(out_dir, "eval_report.json"), report.to_dict())
    first_test, _ = data.test[0]
    write_matrix_csv(
        resolve_within(out_dir, "reconstruction.csv"),
        data.feature_names,
        weighted_reconstruction(first_test, params.alpha),
    )
    if cli_args.cache_dataset:
        write_dataset_cache(resolve_within(out_dir, "dataset.json"), data)

    test = report.metrics["test"]
    logger.info(
        "train done: best_epoch=%d stop=%s test MAE=%.4f alpha=%s",
        log.best_epoch,
        log.stop_reason.value,
        test.mae,
        dict(zip(COMPONENT_NAMES, (round(a, 4) for a in report.alpha), strict=True)),
    )
    return 0


def _run_predict(config: RunConfig, cli_args: CliArgsModel, logger) -> int:
    if not cli_args.checkpoint:
        raise ConfigError("--checkpoint is required for predict")
    ckpt = load_checkpoint(Path(cli_args.checkpoint))
    series, names, _ = _load_series(config)
    if series.shape[1] != ckpt.params.d:
        raise DataError(f"data has {series.shape[1]} features, checkpoint expects {ckpt.params.d}")
    if ckpt.feature_names and names != ckpt.feature_names:
        raise DataError(f"feature columns {names} differ from checkpoint columns {ckpt.feature_names}")

    split_rows = dict(zip(("train", "validation", "test"), chrono_split(series.shape[0]), strict=True))
    rows = split_rows[cli_args.split]
    samples = build_split_samples(
        ckpt.norm_stats.transform(series),
        rows,
        cli_args.split,
        ckpt.window,
        ckpt.target_feature,
        ckpt.smooth_window,
    )
    predictions = predict_batch(ckpt.params, samples.s, samples.m, samples.g)
    naive = persistence_forecast(samples.windows, ckpt.target_feature)

    j = ckpt.target_feature
    scale = ckpt.norm_stats.std[j] + ckpt.norm_stats.eps
    shift = ckpt.norm_stats.mean[j]
    first_target_row = rows.start + ckpt.window
    out_dir = _prepare_output(config)
    write_rows_csv(
        resolve_within(out_dir, f"predictions_{cli_args.split}.csv"),
        PREDICTION_FIELDS,
        (
            {
                "row": first_target_row + i,
                "target": float(y),
                "prediction": float(p),
                "naive": float(n),
                "target_raw": float(y * scale + shift),
                "prediction_raw": float(p * scale + shift),
                "naive_raw": float(n * scale + shift),
            }
            for i, (y, p, n) in enumerate(zip(samples.targets, predictions, naive, strict=True))
        ),
    )
    logger.info("predict: %d %s predictions written to %s", len(samples), cli_args.split, out_dir)
    return 0


def _run_ablate(config: RunConfig, cli_args: CliArgsModel, logger) -> int:
    train_cfg = config.train_config(_require_seed(cli_args))
    data = _load_dataset(config)
    out_dir = _prepare_output(config)
    rows = run_ablation_grid(data, train_cfg)
    write_rows_csv(resolve_within(out_dir, "ablation.csv"), ABLATION_FIELDS, rows)
    logger.info("ablate: %d configurations written to %s", len(rows), out_dir)
    return 0


def _run_bench(config: RunConfig, logger) -> int:
    bench = config.bench
    points = timing_sweep(
        bench.lengths,
        bench.rank,
        bench.features,
        repeats=bench.repeats,
        warmup=bench.warmup,
        hidden_dim=config.model.hidden_dim,
        smooth_window=config.model.smooth_window,
    )
    ratios = doubling_ratios(points)
    params = init_params(bench.features, config.model.hidden_dim, 0)
    counted = sum(int(arr.size) for arr in params.tensors().values())

    out_dir = _prepare_output(config)
    write_rows_csv(
        resolve_within(out_dir, "bench.csv"),
        BENCH_FIELDS,
        (
            {
                "length": point.length,
                "seconds": point.seconds,
                "ratio": ratio,
                "linear_ok": None if ratio is None else ratio < LINEARITY_RATIO_LIMIT,
            }
            for point, ratio in zip(points, ratios, strict=True)
        ),
    )
    write_json(
        resolve_within(out_dir, "param_count.json"),
        {
            "d": bench.features,
            "hidden_dim": config.model.hidden_dim,
            "param_count": counted,
            "closed_form": params.param_count,
        },
    )
    failing = [p.length for p, r in zip(points, ratios, strict=True) if r is not None and r >= LINEARITY_RATIO_LIMIT]
    if failing:
        logger.warning("timing ratio >= %.1f at T=%s", LINEARITY_RATIO_LIMIT, failing)
    logger.info("bench: %d lengths, param_count=%d", len(points), counted)
    return 0


def _run_report(config: RunConfig, cli_args: CliArgsModel, logger) -> int:
    runs: list[tuple[str, EvalReport]] = []
    for run_dir in cli_args.runs:
        path = Path(run_dir)
        runs.append((path.name or str(path), EvalReport.from_dict(read_json(path / "eval_report.json"))))
    Console().print(render_report_table(runs))
    out_dir = _prepare_output(config)
    write_rows_csv(resolve_within(out_dir, "alpha_summary.csv"), ALPHA_SUMMARY_FIELDS, alpha_summary_rows(runs))
    logger.info("report: %d runs summarized into %s", len(runs), out_dir)
    return 0


def _dispatch(command: str, config: RunConfig, cli_args: CliArgsModel, logger) -> int:
    if command == "decompose":
        return _run_decompose(config, logger)
    if command == "train":
        return _run_train(config, cli_args, logger)
    if command == "predict":
        return _run_predict(config, cli_args, logger)
    if command == "ablate":
        return _run_ablate(config, cli_args, logger)
    if command == "bench":
        return _run_bench(config, logger)
    if command == "report":
        return _run_report(config, cli_args, logger)
    raise ConfigError(f"unknown command: {command}")


def main(argv: list[str] | None = None) -> None:
    parser = build_parser()
    raw_argv = sys.argv[1:] if argv is None else argv
    global_args, argv = _extract_global_args(raw_argv)
    args = parser.parse_args(argv)
    if global_args.config is not None:
        args.config = global_args.config
    if global_args.log_level is not None:
        args.log_level = global_args.log_level
    if args.command is None:
        parser.print_help()
        return

    try:
        config = load_config(args.config)
    except SparseTimeError as exc:
        print(f"配置加载失败: {exc}", file=sys.stderr)
        sys.exit(exit_code_for(exc))

    try:
        cli_args = validate_cli_args(args)
    except CliValidationError as exc:
        print(f"参数校验失败: {render_cli_error(exc)}", file=sys.stderr)
        sys.exit(1)

    _apply_overrides(config, cli_args)
    configure_logging(cli_args.log_level)
    logger = get_logger("sparsetime.cli")

    try:
        exit_code = _dispatch(args.command, config, cli_args, logger)
    except SparseTimeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        sys.exit(exit_code_for(exc))
    except ValueError as exc:
        # resolve_within 拒绝越界路径
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        sys.exit(1)
    if exit_code:
        sys.exit(exit_code)


__all__ = ["build_parser", "main"]
