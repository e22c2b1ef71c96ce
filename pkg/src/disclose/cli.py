"""``disclose`` command-line interface.

Exit codes: 0 success, 1 validation error, 2 stage failure, 3 I/O error.
Logs go to stderr; stdout carries only command results.
"""

import argparse
import logging
import os
import sys

from . import __version__, classifiers, pipeline, plotting
from .config import load_config
from .errors import DiscloseError, InputFileError, ValidationError
from .explain import explain, render_bars, write_attribution
from .features import TfidfConfig, load_tfidf, transform
from .ingest import FilterPolicy, read_sentences
from .weaklabel import read_labeled

log = logging.getLogger("disclose")


def _setup_logging(args):
    level = logging.INFO
    if getattr(args, "quiet", False):
        level = logging.ERROR
    elif getattr(args, "verbose", False):
        level = logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("disclose")
    root.handlers[:] = [handler]
    root.setLevel(level)


def _stem(path):
    return path[:-5] if path.endswith(".json") else os.path.splitext(path)[0]


def cmd_ingest(args):
    policy = FilterPolicy(args.min_tokens, args.max_tokens, args.max_digit_ratio,
                          not args.allow_no_prose)
    pipeline.stage_ingest(args.manifest, args.out, args.dropped, policy, args.abbrev)


def cmd_label(args):
    pipeline.stage_label(read_sentences(args.sentences), args.lexicon, args.out, args.overrides)


def cmd_dataset(args):
    pipeline.stage_dataset(read_labeled(args.input), args.out_train, args.out_test, args.meta,
                           dedup=args.dedup, balance=args.balance, test_fraction=args.split,
                           seed=args.seed)


def _tfidf_config(args):
    return TfidfConfig(sublinear_tf=args.sublinear_tf, normalize=not args.no_normalize)


def cmd_features(args):
    pipeline.stage_features(read_labeled(args.fit), args.out, _tfidf_config(args))


def cmd_train(args):
    if args.model in classifiers.UNSUPPORTED_KINDS:
        raise ValidationError("UNSUPPORTED_MODEL", f"{args.model}: {classifiers.UNSUPPORTED_KINDS[args.model]}")
    train = read_labeled(args.train)
    if args.features == "fit":
        features_path = f"{_stem(args.out)}.features.json"
        features = pipeline.stage_features(train, features_path, _tfidf_config(args))
    else:
        features_path = args.features
        features = load_tfidf(features_path)
    params = {}
    names = {
        "logreg": ("l2_lambda", "learning_rate", "max_iters", "tol"),
        "nb": ("alpha",),
        "forest": ("n_trees", "max_depth", "min_leaf"),
    }[args.model]
    for name in names:
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    pipeline.stage_train(args.model, train, features, features_path, args.out, args.seed, params, args.train)


def _load_model_and_features(model_path, features_path, need_features=True):
    model = classifiers.load_model(model_path)
    if model.kind == "EXTERNAL":
        features = load_tfidf(features_path) if features_path else None
    elif need_features or features_path:
        features = classifiers.resolve_features(model, model_path, features_path)
    else:
        features = None
    return model, features


def cmd_eval(args):
    model, features = _load_model_and_features(args.model, args.features)
    report, _ = pipeline.stage_eval(model, read_labeled(args.test), features, args.report,
                                    args.threshold, args.figures)
    print(f"accuracy={report.accuracy:.4f} precision_ai={report.precision_ai:.4f} "
          f"recall_ai={report.recall_ai:.4f} f1_ai={report.f1_ai:.4f} macro_f1={report.macro_f1:.4f} "
          f"auc={report.auc:.4f} brier={report.brier:.4f}")


def _require_text(text):
    if text is None or not text.strip():
        raise ValidationError("EMPTY_INPUT", "no text given")
    return text


def cmd_explain(args):
    text = _require_text(args.text)
    model, features = _load_model_and_features(args.model, args.features)
    report = explain(model, text, features, args.method, args.samples, args.seed)
    print(render_bars(report))
    if args.out or args.csv:
        write_attribution(report, args.out, args.csv)
    if args.figure:
        plotting.attribution(report, args.figure)


def _read_any_sentences(path):
    if str(path).endswith(".csv"):
        return [ls.sentence for ls in read_labeled(path)]
    return read_sentences(path)


def cmd_diagnose(args):
    model, features = _load_model_and_features(args.model, args.features)
    if not (args.length_bias or args.temporal or args.adversarial):
        raise ValidationError("NOTHING_TO_DO", "give --length-bias, --temporal and/or --adversarial")
    if args.temporal and args.seed is None:
        raise ValidationError("MISSING_SEED", "--temporal needs --seed")
    result, _ = pipeline.stage_diagnose(
        model, features, args.out,
        sentences=_read_any_sentences(args.length_bias) if args.length_bias else None,
        temporal=read_labeled(args.temporal) if args.temporal else None,
        seed=args.seed or 0, suite=args.adversarial, threshold=args.threshold, figures=args.figures,
    )
    lb = result.get("length_bias")
    if lb is not None:
        print(f"length_bias pearson_r={lb['pearson_r']:.4f} n={lb['n']}" if "pearson_r" in lb
              else f"length_bias error={lb['error']}")
    if "temporal" in result:
        for row in result["temporal"]["rows"]:
            print(f"year={row['year']} n={row['n_ai'] + row['n_non']} "
                  f"accuracy={row['accuracy']:.4f} f1_ai={row['f1_ai']:.4f}")
    if "adversarial" in result:
        adv = result["adversarial"]
        acc = adv["accuracy"]
        print(f"adversarial accuracy={'n/a' if acc is None else f'{acc:.4f}'} "
              + " ".join(f"{k}={'n/a' if v is None else f'{v:.4f}'}" for k, v in adv["accuracy_by_tag"].items()))


def cmd_predict(args):
    text = _require_text(args.text)
    model, features = _load_model_and_features(args.model, args.features)
    if model.kind == "EXTERNAL":
        raise ValidationError("UNSUPPORTED_MODEL", "external scores cannot score new text")
    p = classifiers.predict_proba(model, transform(features, text))
    print(f"label={'AI' if p >= args.threshold else 'NON_AI'} probability={p:.6f}")


def cmd_run(args):
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"dataset.seed={args.seed}")
    if args.threshold is not None:
        overrides.append(f"eval.threshold={args.threshold}")
    if args.no_figures:
        overrides.append("eval.figures=false")
    cfg = load_config(args.config, overrides)
    out = args.out or cfg.path("output")
    if not out:
        raise ValidationError("MISSING_PATH", "give --out or paths.output")
    manifest = pipeline.run_pipeline(cfg, out)
    print(f"status={manifest['status']} outputs={len(manifest['outputs'])} "
          f"manifest={os.path.join(out, 'run_manifest.json')}")


def cmd_version(args):
    print(f"disclose {__version__}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_mutually_exclusive_group()
    # SUPPRESS keeps a subcommand's defaults from undoing a flag given before it.
    g.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS, help="only log errors")
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="debug logging")

    parser = argparse.ArgumentParser(prog="disclose", parents=[common],
                                     description="Sentence-level AI disclosure detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    def tfidf_flags(sp):
        sp.add_argument("--sublinear-tf", action="store_true", help="use 1 + ln(count) term frequency")
        sp.add_argument("--no-normalize", action="store_true", help="skip L2 normalization")

    sp = add("ingest", cmd_ingest, "clean, segment and filter report text")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True, help="sentence JSONL")
    sp.add_argument("--dropped", help="JSONL of rejected sentences with reason codes")
    sp.add_argument("--min-tokens", type=int, default=4)
    sp.add_argument("--max-tokens", type=int, default=128)
    sp.add_argument("--max-digit-ratio", type=float, default=0.5)
    sp.add_argument("--allow-no-prose", action="store_true", help="keep sentences with no lowercase word")
    sp.add_argument("--abbrev", help="abbreviation list, one per line (replaces the default list)")

    sp = add("label", cmd_label, "weak-label sentences with a lexicon")
    sp.add_argument("--sentences", required=True)
    sp.add_argument("--lexicon", required=True)
    sp.add_argument("--overrides")
    sp.add_argument("--out", required=True)

    sp = add("dataset", cmd_dataset, "deduplicate, balance and split")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--dedup", action="store_true")
    sp.add_argument("--balance", action="store_true")
    sp.add_argument("--split", type=float, default=0.2, help="test fraction")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-train", required=True)
    sp.add_argument("--out-test", required=True)
    sp.add_argument("--meta", required=True)

    sp = add("features", cmd_features, "fit a TF-IDF model")
    sp.add_argument("--fit", required=True, help="training CSV")
    sp.add_argument("--out", required=True)
    tfidf_flags(sp)

    sp = add("train", cmd_train, "train a classical baseline")
    sp.add_argument("--model", required=True, choices=["logreg", "nb", "forest", "xgboost"])
    sp.add_argument("--train", required=True)
    sp.add_argument("--features", required=True, help="feature model JSON, or 'fit'")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--l2-lambda", type=float)
    sp.add_argument("--learning-rate", type=float)
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--n-trees", type=int)
    sp.add_argument("--max-depth", type=int)
    sp.add_argument("--min-leaf", type=int)
    tfidf_flags(sp)

    sp = add("eval", cmd_eval, "evaluate a model or external scores on a test set")
    sp.add_argument("--model", required=True, help="model JSON or sentence_id,probability CSV")
    sp.add_argument("--test", required=True)
    sp.add_argument("--features")
    sp.add_argument("--report", required=True)
    sp.add_argument("--threshold", type=float, default=0.5)
    sp.add_argument("--figures", action="store_true", help="also render <report>.png")

    sp = add("explain", cmd_explain, "Shapley attributions for one sentence")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features")
    sp.add_argument("--text", required=True)
    sp.add_argument("--method", choices=["exact", "linear", "kernel"], default="kernel")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="attribution JSON")
    sp.add_argument("--csv", help="token,position,phi CSV")
    sp.add_argument("--figure", help="bar chart PNG")

    sp = add("diagnose", cmd_diagnose, "length bias, per-year and adversarial checks")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features")
    sp.add_argument("--length-bias", help="sentence JSONL or labeled CSV")
    sp.add_argument("--temporal", help="labeled test CSV")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--adversarial", help="suite CSV, or 'builtin'")
    sp.add_argument("--threshold", type=float, default=0.5)
    sp.add_argument("--out", required=True)
    sp.add_argument("--figures", action="store_true")

    sp = add("predict", cmd_predict, "classify one sentence")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features")
    sp.add_argument("--text", required=True)
    sp.add_argument("--threshold", type=float, default=0.5)

    sp = add("run", cmd_run, "run the full pipeline from a TOML config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--no-figures", action="store_true")
    sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                    help="override a config value (repeatable)")

    add("version", cmd_version, "print the version")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    _setup_logging(args)
    try:
        args.func(args)
    except DiscloseError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return InputFileError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
