"""Command-line pipeline: generate, train, forecast, evaluate, schedule,
bench, plotdata.

Every subcommand is deterministic given its flags and seed: all randomness
flows from explicit seeds through the package's own PRNG, never from the
wall clock or OS entropy.  Machine-readable output goes to files only;
diagnostics go to stderr.  Exit codes: 0 success, 1 data or validation
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import baseline_mlp, benchmark, metrics, rbfnn, scheduler, synthload
from .errors import AgewatchError
from .timeseries import (
    ConstantSeriesError,
    ScaleParams,
    TimeSeries,
    embed,
    inverse_scale_values,
    min_max_scale,
    parse_series_csv,
    series_to_csv,
    split,
)

DEFAULT_ORDER_M = 4
DEFAULT_HORIZON_N = 1
DEFAULT_TRAIN_FRACTION = 0.8
DEFAULT_EPOCHS = 300
DEFAULT_RBF_LEARNING_RATE = 0.5
DEFAULT_MLP_LEARNING_RATE = 1e-3
DEFAULT_HIDDEN_DIM = 8


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _load_series(args: argparse.Namespace, path: str, name: str = "series") -> TimeSeries:
    return parse_series_csv(
        _read_text(path), name=name, interval=getattr(args, "interval", None)
    )


def _scale_or_skip(series: TimeSeries) -> tuple[TimeSeries, ScaleParams | None]:
    """Min-max scale unless the series is constant (then pass it through)."""
    try:
        scaled, params = min_max_scale(series)
        return scaled, params
    except ConstantSeriesError:
        _diag("note: constant series, skipping scaling")
        return series, None


_PROFILE_FIELDS = (
    "length",
    "base",
    "trend_slope",
    "season_amplitude",
    "season_period",
    "noise_sigma",
    "reset_period",
)


def _cmd_generate(args: argparse.Namespace) -> None:
    overrides = {
        field: getattr(args, field)
        for field in _PROFILE_FIELDS
        if getattr(args, field) is not None
    }
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.profile is not None:
        profile = synthload.profile_from_json(_read_text(args.profile))
        if overrides:
            profile = replace(profile, **overrides)
    else:
        required = _PROFILE_FIELDS[:-1]  # reset_period and seed may default
        missing = [f for f in required if f not in overrides]
        if missing:
            flags = ", ".join("--" + f.replace("_", "-") for f in missing)
            raise AgewatchError(f"without --profile, these flags are required: {flags}")
        overrides.setdefault("reset_period", 0)
        overrides.setdefault("seed", 0)
        profile = synthload.AgingProfile(**overrides)
    series = synthload.generate_aging_series(
        profile,
        name=args.name,
        unit=args.unit,
        start_time=args.start_time,
        interval=args.gen_interval,
    )
    _write_text(args.out, series_to_csv(series))
    _diag(f"wrote {len(series)} samples to {args.out}")


def _train_config(args: argparse.Namespace, default_rate: float) -> rbfnn.TrainConfig:
    rate = args.learning_rate if args.learning_rate is not None else default_rate
    return rbfnn.TrainConfig(
        learning_rate=rate,
        epochs=args.epochs,
        mode=args.mode,
        target_mse=args.target_mse,
        seed=args.seed,
    )


def _report_csv(report: rbfnn.TrainReport) -> str:
    rows = ["epoch,mse"]
    for epoch, value in enumerate(report.mse_history, start=1):
        rows.append(f"{epoch},{value!r}")
    return "\n".join(rows) + "\n"


def _cmd_train(args: argparse.Namespace) -> None:
    series = _load_series(args, args.input)
    scaled, _ = _scale_or_skip(series)
    train_segment, _ = split(scaled, args.train_fraction)
    dataset = embed(train_segment, args.order_m, args.horizon_n)

    if args.model == "rbf":
        net = rbfnn.init_network(
            dataset, sigma=args.sigma, max_centers=args.max_centers
        )
        config = _train_config(args, DEFAULT_RBF_LEARNING_RATE)
        report = rbfnn.train(net, dataset, config)
        _write_text(args.out_model, rbfnn.save_model(net))
    else:
        net = baseline_mlp.init_mlp(
            args.order_m + 1, args.hidden_dim, 1, seed=args.seed
        )
        config = _train_config(args, DEFAULT_MLP_LEARNING_RATE)
        report = baseline_mlp.train_mlp(net, dataset, config)
        _write_text(args.out_model, baseline_mlp.save_mlp(net))

    report_path = args.report if args.report is not None else args.out_model + ".report.csv"
    _write_text(report_path, _report_csv(report))
    final = report.mse_history[-1] if report.mse_history else float("nan")
    _diag(
        f"trained {args.model} on {len(dataset)} pairs: epochs={report.epochs_run} "
        f"final_mse={final:.6g} converged={report.converged}"
    )


def _load_rbf_model(path: str) -> rbfnn.RbfNetwork:
    document = _read_text(path)
    first = document.split("\n", 1)[0].rstrip("\r")
    if first == baseline_mlp.MLP_HEADER:
        raise AgewatchError(
            f"{path} is an MLP model document; this command requires an RBF model"
        )
    return rbfnn.load_model(document)


def _cmd_forecast(args: argparse.Namespace) -> None:
    net = _load_rbf_model(args.model)
    series = _load_series(args, args.input)
    scaled, params = _scale_or_skip(series)
    if len(scaled) < net.input_dim:
        raise AgewatchError(
            f"series has {len(scaled)} samples; model needs {net.input_dim} for its window"
        )
    history = scaled.values[-net.input_dim :]
    result = rbfnn.forecast_recursive(
        net,
        history,
        args.steps,
        horizon_n=args.horizon_n,
        origin_index=len(series) - 1,
    )
    values = result.values if params is None else inverse_scale_values(result.values, params)
    origin_time = series.time_at(len(series) - 1)
    step_seconds = args.horizon_n * series.interval
    rows = ["timestamp,value"]
    for k, value in enumerate(values):
        rows.append(f"{origin_time + (k + 1) * step_seconds!r},{float(value)!r}")
    _write_text(args.out, "\n".join(rows) + "\n")
    _diag(f"wrote {args.steps}-step forecast to {args.out}")


def _cmd_evaluate(args: argparse.Namespace) -> None:
    predicted = _load_series(args, args.predicted)
    target = _load_series(args, args.target)
    report = metrics.evaluate(args.indicator, predicted.values, target.values)
    _write_text(args.out, metrics.report_to_csv(report))
    _diag(
        f"{report.indicator}: rmse={report.rmse:.6g} "
        f"mape={report.mape_percent:.6g}% n={report.n_samples}"
    )


def _parse_forecast_arg(text: str) -> tuple[str, str]:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise AgewatchError(f"expected NAME=PATH, got {text!r}")
    return name, path


def _parse_threshold_arg(text: str) -> scheduler.ThresholdSpec:
    parts = text.rsplit(":", 2)
    if len(parts) != 3:
        raise AgewatchError(f"expected NAME:VALUE:DIRECTION, got {text!r}")
    name, value, direction = parts
    try:
        threshold = float(value)
    except ValueError:
        raise AgewatchError(f"threshold value is not a number: {text!r}") from None
    return scheduler.ThresholdSpec(indicator=name, threshold=threshold, direction=direction)


def _cmd_schedule(args: argparse.Namespace) -> None:
    forecasts = []
    for item in args.forecast:
        name, path = _parse_forecast_arg(item)
        series = _load_series(args, path, name=name)
        forecasts.append(
            scheduler.IndicatorForecast(
                indicator=name,
                result=rbfnn.ForecastResult(
                    values=series.values, horizon_steps=len(series), origin_index=0
                ),
                origin_time=series.start_time,
                interval=series.interval,
            )
        )
    specs = [_parse_threshold_arg(item) for item in args.threshold]
    schedule = scheduler.derive_schedule(forecasts, specs, lead=args.lead)
    _write_text(args.out, scheduler.schedule_to_csv(schedule))
    if schedule.recommended_time is None:
        _diag("no threshold crossing within the forecast horizon")
    else:
        _diag(f"recommended rejuvenation time: {schedule.recommended_time!r}")


def _cmd_bench(args: argparse.Namespace) -> None:
    mlp_report, rbf_report = benchmark.run_benchmark(args.seed)
    _write_text(args.out, benchmark.bench_to_csv(mlp_report, rbf_report))
    for report in (mlp_report, rbf_report):
        _diag(
            f"{report.indicator}: rmse={report.rmse:.6g} mape={report.mape_percent:.6g}%"
        )


def _cmd_plotdata(args: argparse.Namespace) -> None:
    net = _load_rbf_model(args.model)
    series = _load_series(args, args.input)
    scaled, params = _scale_or_skip(series)
    train_segment, _ = split(scaled, args.train_fraction)
    n_train = len(train_segment)
    order_m = net.input_dim - 1

    scaled_preds = benchmark.one_step_predictions(
        lambda w: float(rbfnn.forward(net, w)[0][0]),
        scaled.values,
        n_train,
        order_m,
        args.horizon_n,
    )
    preds = scaled_preds if params is None else inverse_scale_values(scaled_preds, params)
    rows = ["timestamp,observed,predicted"]
    for i, pred in enumerate(preds):
        g = n_train + i
        rows.append(f"{series.time_at(g)!r},{float(series.values[g])!r},{float(pred)!r}")
    _write_text(args.out, "\n".join(rows) + "\n")
    _diag(f"wrote {len(preds)} observed/predicted rows to {args.out}")


def _add_interval_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--interval",
        type=float,
        default=None,
        help="sample interval in seconds, used only for single-row input CSVs",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agewatch",
        description=(
            "Forecast software-aging indicators with an RBF network and derive "
            "a rejuvenation schedule from predicted threshold crossings."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "generate",
        help="generate a synthetic aging-indicator series CSV",
        description=(
            "Generate a synthetic aging-indicator series.  The profile comes "
            "from a JSON document, from the per-field flags below, or from "
            "both (flags override document fields)."
        ),
    )
    p.add_argument("--profile", default=None, help="AgingProfile JSON document")
    p.add_argument("--out", required=True, help="output series CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the profile seed")
    p.add_argument("--length", type=int, default=None, help="sample count")
    p.add_argument("--base", type=float, default=None, help="baseline level")
    p.add_argument("--trend-slope", type=float, default=None, help="per-step drift")
    p.add_argument("--season-amplitude", type=float, default=None,
                   help="workload sinusoid amplitude")
    p.add_argument("--season-period", type=int, default=None,
                   help="workload sinusoid period in samples")
    p.add_argument("--noise-sigma", type=float, default=None,
                   help="Gaussian noise standard deviation")
    p.add_argument("--reset-period", type=int, default=None,
                   help="drift reset period in samples, 0 = never")
    p.add_argument("--name", default="synthetic", help="indicator label")
    p.add_argument("--unit", default="", help="unit label")
    p.add_argument("--start-time", type=float, default=0.0, help="first timestamp")
    p.add_argument(
        "--interval",
        type=float,
        default=1.0,
        dest="gen_interval",
        help="seconds between samples",
    )
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser("train", help="train a forecaster on a series CSV")
    p.add_argument("--input", required=True, help="series CSV path")
    p.add_argument("--out-model", required=True, help="output model document path")
    p.add_argument("--report", default=None,
                   help="per-epoch MSE CSV path (default: <out-model>.report.csv)")
    p.add_argument("--model", choices=("rbf", "mlp"), default="rbf")
    p.add_argument("--order-m", type=int, default=DEFAULT_ORDER_M,
                   help="past lags beyond the current value (window size m+1)")
    p.add_argument("--horizon-n", type=int, default=DEFAULT_HORIZON_N,
                   help="steps ahead the predictor targets")
    p.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION)
    p.add_argument("--learning-rate", type=float, default=None,
                   help=f"default {DEFAULT_RBF_LEARNING_RATE} for rbf, "
                        f"{DEFAULT_MLP_LEARNING_RATE} for mlp")
    p.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    p.add_argument("--mode", choices=("per-sample", "batch"), default="batch")
    p.add_argument("--target-mse", type=float, default=0.0,
                   help="early-stop threshold on the training MSE")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for MLP weight init (RBF training is seed-free)")
    p.add_argument("--sigma", type=float, default=None,
                   help="explicit RBF width; default: mean pairwise center distance")
    p.add_argument("--max-centers", type=int, default=None,
                   help="cap on RBF centers; default: one per distinct exemplar")
    p.add_argument("--hidden-dim", type=int, default=DEFAULT_HIDDEN_DIM,
                   help="MLP hidden units")
    _add_interval_flag(p)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser(
        "forecast", help="roll an RBF model forward past the end of a series"
    )
    p.add_argument("--model", required=True, help="RBF model document path")
    p.add_argument("--input", required=True, help="series CSV path")
    p.add_argument("--steps", type=int, required=True, help="number of predictions")
    p.add_argument("--horizon-n", type=int, default=DEFAULT_HORIZON_N,
                   help="model's training horizon (sets forecast timestamps)")
    p.add_argument("--out", required=True, help="output forecast CSV path")
    _add_interval_flag(p)
    p.set_defaults(handler=_cmd_forecast)

    p = sub.add_parser(
        "evaluate",
        help="RMSE/MAPE of a predicted series against a target series",
        description=(
            "Compute RMSE and MAPE for a prediction/target pair.  Both series "
            "must be in original units: evaluating min-max-scaled values gives "
            "meaningless percentages and is a caller error."
        ),
    )
    p.add_argument("--predicted", required=True, help="predicted series CSV path")
    p.add_argument("--target", required=True, help="target series CSV path")
    p.add_argument("--indicator", default="series", help="label for the report row")
    p.add_argument("--out", required=True, help="output report CSV path")
    _add_interval_flag(p)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser(
        "schedule", help="derive a rejuvenation schedule from forecast CSVs"
    )
    p.add_argument("--forecast", action="append", required=True, metavar="NAME=PATH",
                   help="indicator name and its forecast CSV (repeatable)")
    p.add_argument("--threshold", action="append", required=True,
                   metavar="NAME:VALUE:DIRECTION",
                   help="exhaustion threshold, DIRECTION rising|falling (repeatable)")
    p.add_argument("--lead", type=int, default=0, help="safety lead in steps")
    p.add_argument("--out", required=True, help="output schedule CSV path")
    _add_interval_flag(p)
    p.set_defaults(handler=_cmd_schedule)

    p = sub.add_parser(
        "bench", help="run the frozen RBF-vs-MLP benchmark and write its table"
    )
    p.add_argument("--seed", type=int, default=None,
                   help=f"noise seed (default: shipped seed {benchmark.BENCH_PROFILE.seed})")
    p.add_argument("--out", required=True, help="output comparison CSV path")
    p.set_defaults(handler=_cmd_bench)

    p = sub.add_parser(
        "plotdata",
        help="write aligned observed/predicted columns over the test segment",
    )
    p.add_argument("--model", required=True, help="RBF model document path")
    p.add_argument("--input", required=True, help="series CSV path")
    p.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION)
    p.add_argument("--horizon-n", type=int, default=DEFAULT_HORIZON_N)
    p.add_argument("--out", required=True, help="output plot-data CSV path")
    _add_interval_flag(p)
    p.set_defaults(handler=_cmd_plotdata)

    return parser


def run(argv: list[str]) -> int:
    """Parse and execute one invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.handler(args)
    except (AgewatchError, ValueError, OSError) as exc:
        _diag(f"error: {exc}")
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
