"""Command-line entry point.

Commands: gen (synthetic datasets), train (fit a pipeline), eval (score a
labeled set), detect (single attempt), sweep (training-size study).
``detect`` exits 0 for a normal verdict, 1 for anomalous, >= 2 on errors;
all other commands exit 0 on success, 1 on runtime errors, 2 on usage
errors. A flat key=value config file seeds the pipeline settings and
individual flags override it.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import synthgen
from .config import (
    CLASSIFIERS,
    EXTRACTORS,
    FUSIONS,
    PipelineConfig,
    load_config,
)
from .dataset import PressPair, load_dataset, parse_timestamp, read_pgm
from .errors import PupguardError
from .evaluate import evaluate_model, run_pipeline, sweep, sweep_csv
from .pipeline import fit_pipeline, load_bundle, save_bundle, score_pair

PAPER_TABLE_HEADER = "extractor,classifier,fusion,accuracy,fpr,recall,precision,f1"


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--extractor", choices=EXTRACTORS)
    parser.add_argument("--fusion", choices=FUSIONS)
    parser.add_argument("--classifier", choices=CLASSIFIERS)
    parser.add_argument("--pca-k", type=int)
    parser.add_argument("--cross-offset", type=float)
    parser.add_argument("--nu", type=float)
    parser.add_argument("--embedding-file")
    parser.add_argument("--lbp-grid", type=int)
    parser.add_argument(
        "--decision-fusion", action="store_true", default=None,
        help="two one-class detectors (image, timing) fused with logical AND",
    )
    parser.add_argument(
        "--no-standardize-fused", dest="standardize_fused",
        action="store_false", default=None,
    )


def _build_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    config_path = getattr(args, "config", None)
    if config_path:
        cfg = load_config(config_path, cfg)
    overrides = {}
    for flag, key in (
        ("extractor", "extractor"),
        ("fusion", "fusion"),
        ("classifier", "classifier"),
        ("pca_k", "pca_k"),
        ("cross_offset", "cross_offset"),
        ("nu", "nu"),
        ("embedding_file", "embedding_file"),
        ("lbp_grid", "lbp_grid"),
        ("decision_fusion", "decision_fusion"),
        ("standardize_fused", "standardize_fused"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    seed = getattr(args, "seed", None)
    if seed is not None:
        overrides["seed"] = seed
    return dataclasses.replace(cfg, **overrides).validate()


def cmd_gen(args) -> int:
    attack = synthgen.AttackParams(
        interval_shift_sigmas=args.interval_shift_sigmas,
        pressure_gain=args.pressure_gain,
        center_offset_px=args.center_offset,
        rotation_deg=args.rotation,
        smear_length_px=args.smear,
        channel_mix=args.channel_mix,
    )
    seed = getattr(args, "seed", None)
    ds = synthgen.gen_dataset(
        args.normal, args.attack, args.subjects, attack,
        seed if seed is not None else 0, args.out,
        profile_seed=args.profile_seed,
    )
    n_legit = sum(p.label.value == "legit" for p in ds)
    n_attack = len(ds) - n_legit
    print(f"wrote {len(ds)} pairs to {args.out} ({n_legit} legit, {n_attack} attack)")
    return 0


def cmd_train(args) -> int:
    cfg = _build_config(args)
    train = load_dataset(args.train)
    pm = fit_pipeline(train, cfg)
    save_bundle(pm, args.model)
    print(f"trained {', '.join(pm.channels())} on {len(train)} pairs -> {args.model}")
    if getattr(args, "verbose", False):
        print(f"timing mu={pm.timing.mu:.6f}s sigma={pm.timing.sigma:.6f}s")
        if pm.pca is not None:
            print(f"pca components: {pm.pca.components.shape[0]}")
    return 0


def cmd_eval(args) -> int:
    pm = load_bundle(args.model)
    test = load_dataset(args.test)
    outcome = evaluate_model(pm, test)
    print(outcome.report.format_text())
    if pm.config.decision_fusion and getattr(args, "verbose", False):
        for name, rep in outcome.channel_reports.items():
            print(f"[{name}] accuracy {rep.format_metric('accuracy')}, "
                  f"fpr {rep.format_metric('fpr')}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            for name, value in outcome.report.csv_rows():
                fh.write(f"{name},{value}\n")
    return 0


def cmd_detect(args) -> int:
    pm = load_bundle(args.model)
    img1 = read_pgm(args.img1)
    img2 = read_pgm(args.img2)
    t1 = parse_timestamp(args.t1)
    t2 = parse_timestamp(args.t2)
    if t2 - t1 < 0:
        print("error: second press precedes the first", file=sys.stderr)
        return 2
    pair = PressPair(args.pair_id, "cli", img1, img2, t1, t2)
    verdict = score_pair(pm, pair)
    print(f"{verdict.prediction.value} (margin {verdict.score:.6f})")
    return 0 if verdict.prediction.value == "normal" else 1


def _paper_table(args, cfg: PipelineConfig, train, test) -> int:
    lines = [PAPER_TABLE_HEADER]
    for extractor in EXTRACTORS:
        for classifier in CLASSIFIERS:
            for fusion in ("cross", "concat"):
                run_cfg = dataclasses.replace(
                    cfg, extractor=extractor, classifier=classifier, fusion=fusion,
                    decision_fusion=False,
                ).validate()
                outcome = run_pipeline(train, test, run_cfg)
                rep = outcome.report
                values = ",".join(
                    "nan" if m in rep.undefined else repr(rep.metric(m))
                    for m in ("accuracy", "fpr", "recall", "precision", "f1")
                )
                lines.append(f"{extractor},{classifier},{fusion},{values}")
    table = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(table)
    else:
        print(table, end="")
    return 0


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    train = load_dataset(args.train)
    test = load_dataset(args.test)
    if args.paper_table:
        if cfg.embedding_file is None:
            print(
                "error: --paper-table includes embedding runs; "
                "provide --embedding-file",
                file=sys.stderr,
            )
            return 2
        return _paper_table(args, cfg, train, test)
    fractions = [float(f) for f in args.fractions.split(",")]
    # any --seed override has already landed in cfg.seed via _build_config
    rows = sweep(
        train, test, fractions, cfg, cfg.seed,
        by_subject=args.split_by_subject,
    )
    table = sweep_csv(rows)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(table)
    else:
        print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    # the global flags are accepted both before and after the subcommand;
    # SUPPRESS keeps an unset later occurrence from clobbering an earlier one
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", default=argparse.SUPPRESS,
        help="flat key=value configuration file",
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS,
        help="master seed override",
    )
    common.add_argument(
        "--verbose", action="store_true", default=argparse.SUPPRESS
    )

    parser = argparse.ArgumentParser(
        prog="pupguard",
        parents=[common],
        description="Two-press fingerprint behavior pipeline for "
        "puppet-attack detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "gen", parents=[common], help="generate a synthetic labeled dataset"
    )
    p.add_argument("--normal", type=int, required=True)
    p.add_argument("--attack", type=int, required=True)
    p.add_argument("--subjects", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--profile-seed", type=int, default=None,
        help="pin the subject population separately from the pair "
        "randomness (lets train and test share enrolled subjects)",
    )
    p.add_argument("--interval-shift-sigmas", type=float, default=4.0)
    p.add_argument("--pressure-gain", type=float, default=0.4)
    p.add_argument("--center-offset", type=float, default=20.0)
    p.add_argument("--rotation", type=float, default=25.0)
    p.add_argument("--smear", type=int, default=6)
    p.add_argument("--channel-mix", type=float, default=0.5)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", parents=[common], help="fit a pipeline on a normal-only dataset")
    p.add_argument("--train", required=True, help="training dataset directory")
    p.add_argument("--model", required=True, help="output bundle path")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="score a labeled dataset with a trained bundle")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, help="labeled dataset directory")
    p.add_argument("--csv", help="also write metric,value rows here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("detect", parents=[common], help="score one authentication attempt")
    p.add_argument("--model", required=True)
    p.add_argument("--img1", required=True)
    p.add_argument("--img2", required=True)
    p.add_argument("--t1", required=True, help="yyyymmddHHMMSS.xxxxxx")
    p.add_argument("--t2", required=True)
    p.add_argument("--pair-id", default="attempt")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", parents=[common], help="training-size sweep or full grid table")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--fractions", default="0.2,0.4,0.6,0.8,1.0")
    p.add_argument("--csv")
    p.add_argument("--split-by-subject", action="store_true")
    p.add_argument(
        "--paper-table", action="store_true",
        help="run the full extractor x classifier x fusion grid",
    )
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PupguardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if args.command == "detect" else 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if args.command == "detect" else 1


if __name__ == "__main__":
    sys.exit(main())
