"""Command-line interface: score a model zoo, generate a synthetic one, emit plots."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from distortion_lens import evaluation, svgplot, synth
from distortion_lens.config import RunConfig
from distortion_lens.evaluation import Measure
from distortion_lens.feature_store import load_manifest

MEASURE_ALIASES = {
    "l2": Measure.L2_TRACE,
    "gmm": Measure.GMM_TRACE,
    "svm": Measure.SVM_TRACE,
    "svs": Measure.SV_COUNT,
}


def _parse_measures(raw: str) -> list[Measure]:
    measures = []
    for token in raw.split(","):
        token = token.strip()
        if token not in MEASURE_ALIASES:
            raise ValueError(f"unknown measure {token!r}, expected one of {sorted(MEASURE_ALIASES)}")
        measures.append(MEASURE_ALIASES[token])
    return measures


def _build_config(args) -> RunConfig:
    doc = {}
    if args.config:
        with open(args.config) as f:
            doc.update(json.load(f))
    overrides = {
        "folds": args.folds,
        "seed": args.seed,
        "subsample_cap": args.subsample_cap,
        "kernel_cap": args.kernel_cap,
        "gamma_override": args.gamma,
        "kpca_dim": args.kpca_dim,
        "gmm_components": args.gmm_components,
        "svm_c": args.svm_c,
        "svm_c_schedule": tuple(float(c) for c in args.svm_c_schedule.split(",")) if args.svm_c_schedule else None,
        "svm_epsilon": args.epsilon,
        "svm_tol": args.tol,
        "aggregation": args.aggregation,
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(doc)


def cmd_score(args) -> int:
    try:
        config = _build_config(args)
        measures = _parse_measures(args.measures)
        manifest = load_manifest(args.manifest)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        reports, failures = evaluation.correlate_zoo(manifest, measures, config, config.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = evaluation.report_document(manifest, reports, failures)
    evaluation.write_report_json(doc, out_dir / "report.json")
    evaluation.write_report_csv(doc, out_dir / "report.csv")
    for rep in reports:
        if rep.r_squared is None:
            print(f"{rep.measure.value}: scored (too few accuracies to correlate)")
        else:
            print(f"{rep.measure.value}: r^2={rep.r_squared:.4f} slope={rep.slope:.4g}")
    if failures:
        for model_id, message in sorted(failures.items()):
            print(f"failed: {model_id}: {message}", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    try:
        synth.generate_zoo(
            n_models=args.models,
            n_classes=args.classes,
            dims=args.dims,
            n_layers=args.layers,
            samples_per_class=args.per_class,
            seed=args.seed,
            out_dir=args.out,
        )
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote synthetic zoo with {args.models} models to {args.out}")
    return 0


def cmd_plot(args) -> int:
    try:
        with open(args.report) as f:
            doc = json.load(f)
        entries = doc["measures"]
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: malformed report: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for entry in entries:
        points = [
            (m["model_id"], m["aggregate"], m["test_accuracy"])
            for m in entry["models"]
            if m.get("test_accuracy") is not None
        ]
        if not points:
            print(f"skipping {entry['measure']}: no models with test accuracy", file=sys.stderr)
            continue
        svg = svgplot.scatter_svg(
            points,
            slope=entry["slope"],
            intercept=entry["intercept"],
            r2=entry["r_squared"],
            title=entry["measure"],
        )
        path = out_dir / f"plot_{entry['measure']}.svg"
        path.write_text(svg)
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distortion-lens",
        description="Layer-wise distortion measures that predict classifier generalization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score a model zoo and correlate against test accuracy")
    p_score.add_argument("--manifest", required=True, help="path to the zoo manifest JSON")
    p_score.add_argument("--measures", default="l2,gmm,svm,svs", help="comma list: l2,gmm,svm,svs")
    p_score.add_argument("--folds", type=int, default=None)
    p_score.add_argument("--seed", type=int, default=None)
    p_score.add_argument("--out", default=".", help="output directory for report.json / report.csv")
    p_score.add_argument("--config", default=None, help="JSON config file; flags override its values")
    p_score.add_argument("--subsample-cap", dest="subsample_cap", type=int, default=None)
    p_score.add_argument("--kernel-cap", dest="kernel_cap", type=int, default=None)
    p_score.add_argument("--gamma", type=float, default=None, help="RBF gamma override")
    p_score.add_argument("--kpca-dim", dest="kpca_dim", type=int, default=None)
    p_score.add_argument("--gmm-components", dest="gmm_components", type=int, default=None)
    p_score.add_argument("--svm-c", dest="svm_c", type=float, default=None)
    p_score.add_argument("--svm-c-schedule", dest="svm_c_schedule", default=None, help="comma list of ascending C values")
    p_score.add_argument("--epsilon", type=float, default=None, help="SVM training-error target")
    p_score.add_argument("--tol", type=float, default=None, help="SMO KKT tolerance")
    p_score.add_argument("--aggregation", choices=("mean", "last", "min", "max"), default=None)
    p_score.set_defaults(func=cmd_score)

    p_synth = sub.add_parser("synth", help="generate a synthetic model zoo with known accuracies")
    p_synth.add_argument("--models", type=int, required=True)
    p_synth.add_argument("--classes", type=int, required=True)
    p_synth.add_argument("--dims", type=int, required=True)
    p_synth.add_argument("--layers", type=int, required=True)
    p_synth.add_argument("--per-class", dest="per_class", type=int, required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=cmd_synth)

    p_plot = sub.add_parser("plot", help="render score-vs-accuracy SVG scatter plots from a report")
    p_plot.add_argument("--report", required=True)
    p_plot.add_argument("--out", required=True)
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
