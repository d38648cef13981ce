"""Command-line surface: explain, evaluate, bench, synth, render.

Exit codes: 0 success, 2 configuration error, 3 model/predictor error,
4 I/O or malformed-file error. Failures print one machine-readable JSON
object to stderr: {"error": {"type": ..., "message": ...}}.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import tracemalloc

import numpy as np

from . import algorithms, dataio, models, render
from .errors import (
    ConfigError,
    PredictorFailure,
    SingularSystem,
    TooManyPlayers,
    WindowShapError,
)
from .evaluation import RelevanceMatrix, evaluate_explainer

EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _engine_params(args, base_seed) -> algorithms.EngineParams:
    return algorithms.EngineParams(
        mode=args.mode,
        n_samples=args.n_samples,
        seed=base_seed,
        exact_threshold=args.exact_threshold,
    )


def _algorithm_params(args, base_seed):
    engine = _engine_params(args, base_seed)
    if args.algorithm == "stationary":
        if args.window_len is None:
            raise ConfigError("--window-len is required for the stationary algorithm")
        return algorithms.StationaryParams(args.window_len, engine)
    if args.algorithm == "sliding":
        if args.window_len is None:
            raise ConfigError("--window-len is required for the sliding algorithm")
        if args.stride is None:
            raise ConfigError("--stride is required for the sliding algorithm")
        return algorithms.SlidingParams(args.window_len, args.stride, engine)
    if args.delta is None:
        raise ConfigError("--delta is required for the dynamic algorithm")
    if args.max_windows is None:
        raise ConfigError("--max-windows is required for the dynamic algorithm")
    return algorithms.DynamicParams(args.delta, args.max_windows, engine)


def _add_algorithm_flags(sub) -> None:
    sub.add_argument("--algorithm", required=True,
                     choices=["stationary", "sliding", "dynamic"])
    sub.add_argument("--window-len", type=int, default=None,
                     help="window length (stationary, sliding)")
    sub.add_argument("--stride", type=int, default=None, help="stride (sliding)")
    sub.add_argument("--delta", type=float, default=None,
                     help="split threshold on |value| (dynamic)")
    sub.add_argument("--max-windows", type=int, default=None,
                     help="total window budget (dynamic)")
    sub.add_argument("--mode", default="auto", choices=["auto", "exact", "kernel"],
                     help="engine mode per game (auto: exact for small games)")
    sub.add_argument("--n-samples", type=int, default=None,
                     help="coalition budget per kernel game")
    sub.add_argument("--exact-threshold", type=int,
                     default=algorithms.DEFAULT_EXACT_THRESHOLD,
                     help="max players solved by exact enumeration")


def _add_model_flags(sub) -> None:
    sub.add_argument("--model", required=True,
                     help="builtin:<kind>@<params.json>, cmd:<argv>, or http:<url>")
    sub.add_argument("--background", required=True,
                     help="background instances (multi-instance JSON)")


def _load_explain_inputs(args):
    instance = dataio.load_single_instance(args.input)
    background = dataio.load_background_json(args.background)
    spec = models.parse_model_spec(args.model)
    predictor = models.build_predictor(spec, instance.shape)
    return instance, background, predictor


def cmd_explain(args) -> int:
    instance, background, predictor = _load_explain_inputs(args)
    params = _algorithm_params(args, args.seed)
    attribution = algorithms.explain(args.algorithm, predictor, instance, background, params)
    dataio.save_attribution_json(attribution, args.out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(dataio.point_values_csv_text(instance.variable_names,
                                                  attribution.point_values))
    if hasattr(predictor, "close"):
        predictor.close()
    return 0


def _relevance_fn(args, predictor, background):
    kind = args.relevance
    if kind == "zero":
        return lambda inst, index: RelevanceMatrix(np.zeros(inst.shape), "zero")
    if kind == "random":
        def random_relevance(inst, index):
            rng = np.random.default_rng((args.seed, index))
            return RelevanceMatrix(rng.random(inst.shape), "random")
        return random_relevance

    def attribution_relevance(inst, index):
        params = _algorithm_params(args, (args.seed, index))
        attr = algorithms.explain(args.algorithm, predictor, inst, background, params)
        return RelevanceMatrix(np.abs(attr.point_values), args.algorithm)
    return attribution_relevance


def cmd_evaluate(args) -> int:
    if not 0.0 <= args.p <= 100.0:
        raise ConfigError(f"--p must be in [0, 100], got {args.p}")
    if args.n < 0:
        raise ConfigError(f"--n must be >= 0, got {args.n}")
    dataset = dataio.load_dataset_json(args.data)
    if dataset.labels is None:
        raise ConfigError(f"{args.data} has no labels; evaluate requires labeled instances")
    background = dataio.load_background_json(args.background)
    spec = models.parse_model_spec(args.model)
    shape = dataset.instances[0].shape

    if spec.kind.startswith("builtin-"):
        predictor = models.build_predictor(spec, shape)
        predictor_source = predictor
    else:
        predictor = models.build_predictor(spec, shape)  # fail fast on bad endpoints
        predictor_source = (lambda: models.build_predictor(spec, shape)) \
            if args.jobs > 1 else predictor

    report = evaluate_explainer(
        predictor_source,
        dataset.instances,
        dataset.labels,
        _relevance_fn(args, predictor, background),
        metric=args.metric,
        p=args.p,
        n=args.n,
        jobs=args.jobs,
    )
    dataio.write_json(report.to_dict(), args.out)
    if hasattr(predictor, "close"):
        predictor.close()
    return 0


_SWEEPABLE = {
    "window_len": int,
    "stride": int,
    "delta": float,
    "max_windows": int,
    "n_samples": int,
}


def cmd_bench(args) -> int:
    if args.sweep_param not in _SWEEPABLE:
        raise ConfigError(
            f"--sweep-param must be one of {sorted(_SWEEPABLE)}, got {args.sweep_param!r}"
        )
    tokens = [tok for tok in args.sweep_values.split(",") if tok.strip()]
    if not tokens:
        raise ConfigError("--sweep-values is empty")
    cast = _SWEEPABLE[args.sweep_param]
    values = [cast(tok) for tok in tokens]

    instance, background, predictor = _load_explain_inputs(args)
    rows = []
    for value in values:
        setattr(args, args.sweep_param, value)
        params = _algorithm_params(args, args.seed)
        tracemalloc.start()
        started = time.perf_counter()
        attribution = algorithms.explain(
            args.algorithm, predictor, instance, background, params
        )
        wall_ms = (time.perf_counter() - started) * 1000.0
        _, peak_bytes = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        rows.append(
            (
                args.algorithm,
                args.sweep_param,
                value,
                wall_ms,
                attribution.meta["predictor_calls"],
                attribution.meta["instances_scored"],
                peak_bytes,
            )
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("algorithm,param_name,param_value,wall_ms,predictor_calls,"
                 "instances_scored,peak_bytes_estimate\n")
        for row in rows:
            fh.write(",".join(str(col) for col in row) + "\n")
    if hasattr(predictor, "close"):
        predictor.close()
    return 0


def cmd_synth(args) -> int:
    dataset = models.generate_synthetic(args.kind, args.d, args.l, args.n, args.seed)
    dataio.save_dataset_json(dataset, args.out)
    return 0


def cmd_render(args) -> int:
    attribution = dataio.load_attribution_json(args.input)
    names = attribution.meta.get(
        "variable_names",
        [f"var{i}" for i in range(attribution.point_values.shape[0])],
    )
    svg = render.render_heatmap_svg(attribution, names, top=args.top)
    with open(args.svg, "w", encoding="utf-8") as fh:
        fh.write(svg)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(dataio.point_values_csv_text(names, attribution.point_values))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="windowshap",
                     description="Shapley-value explanations for time-series classifiers")
    subs = parser.add_subparsers(dest="command", required=True)

    explain = subs.add_parser("explain", description="Explain one instance.")
    _add_algorithm_flags(explain)
    _add_model_flags(explain)
    explain.add_argument("--input", required=True, help="instance CSV (or dataset JSON)")
    explain.add_argument("--seed", type=int, default=0)
    explain.add_argument("-o", "--out", required=True, help="attribution JSON path")
    explain.add_argument("--csv", default=None, help="also write point values as CSV")
    explain.set_defaults(func=cmd_explain)

    evaluate = subs.add_parser("evaluate", description="Perturbation-quality report.")
    _add_algorithm_flags(evaluate)
    _add_model_flags(evaluate)
    evaluate.add_argument("--data", required=True, help="labeled dataset JSON")
    evaluate.add_argument("--metric", default="inverse", choices=["inverse", "mean_interval"])
    evaluate.add_argument("--p", type=float, default=90.0, help="relevance percentile")
    evaluate.add_argument("--n", type=int, default=5, help="interval length (mean_interval)")
    evaluate.add_argument("--relevance", default="attribution",
                          choices=["attribution", "random", "zero"])
    evaluate.add_argument("--jobs", type=int, default=1)
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("-o", "--out", required=True, help="report JSON path")
    evaluate.set_defaults(func=cmd_evaluate)

    bench = subs.add_parser("bench", description="Sweep one parameter, record cost.")
    _add_algorithm_flags(bench)
    _add_model_flags(bench)
    bench.add_argument("--input", required=True)
    bench.add_argument("--sweep-param", required=True)
    bench.add_argument("--sweep-values", required=True, help="comma-separated values")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("-o", "--out", required=True, help="benchmark CSV path")
    bench.set_defaults(func=cmd_bench)

    synth = subs.add_parser("synth", description="Generate labeled synthetic data.")
    synth.add_argument("--kind", default="anomaly", choices=["anomaly", "smooth"])
    synth.add_argument("--d", type=int, required=True, help="number of variables")
    synth.add_argument("--l", type=int, required=True, help="number of time steps")
    synth.add_argument("--n", type=int, required=True, help="number of instances")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("-o", "--out", required=True, help="dataset JSON path")
    synth.set_defaults(func=cmd_synth)

    rend = subs.add_parser("render", description="Render an attribution as a heatmap.")
    rend.add_argument("--input", required=True, help="attribution JSON")
    rend.add_argument("--svg", required=True, help="output SVG path")
    rend.add_argument("--csv", default=None, help="also write point values as CSV")
    rend.add_argument("--top", type=int, default=15, help="max variables on the y axis")
    rend.set_defaults(func=cmd_render)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except (PredictorFailure, SingularSystem, TooManyPlayers) as exc:
        return _fail(EXIT_MODEL, exc)
    except WindowShapError as exc:
        return _fail(EXIT_IO, exc)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError, KeyError, ValueError) as exc:
        return _fail(EXIT_IO, exc)


if __name__ == "__main__":
    sys.exit(main())
