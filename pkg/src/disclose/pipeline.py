"""Stage functions shared by the CLI subcommands and the end-to-end run."""

import logging
import os
import time
from importlib import resources

import numpy as np

from . import __version__, classifiers, plotting
from .dataset import build_dataset, write_dataset
from .diagnostics import adversarial_suite, length_bias, temporal_eval, write_temporal_csv
from .errors import DiscloseError, InputFileError, ValidationError
from .evaluation import evaluate, write_report
from .features import TfidfConfig, fit_tfidf, save_tfidf, transform_matrix
from .ingest import DEFAULT_ABBREVIATIONS, FilterPolicy, ingest, load_abbreviations, \
    write_dropped, write_sentences
from .io import sha256_file, write_json
from .weaklabel import apply_overrides, load_lexicon, read_labeled, weak_label, write_labeled

log = logging.getLogger("disclose")


def builtin_path(name):
    return str(resources.files("disclose") / "data" / name)


def stage_ingest(manifest, out, dropped_out=None, policy=None, abbreviations=None):
    abbrevs = load_abbreviations(abbreviations) if abbreviations else DEFAULT_ABBREVIATIONS
    kept, dropped = ingest(manifest, policy or FilterPolicy(), abbrevs)
    write_sentences(out, kept)
    if dropped_out:
        write_dropped(dropped_out, dropped)
    log.info("ingest: kept %d sentences, dropped %d", len(kept), len(dropped))
    return kept, dropped


def stage_label(sentences, lexicon_path, out, overrides=None):
    lexicon = load_lexicon(lexicon_path)
    labeled = weak_label(sentences, lexicon)
    if overrides:
        labeled = apply_overrides(labeled, overrides)
    write_labeled(out, labeled)
    n_ai = sum(ls.is_ai for ls in labeled)
    log.info("label: %d AI, %d NON_AI (lexicon %s, %d terms)",
             n_ai, len(labeled) - n_ai, lexicon.version, len(lexicon))
    return labeled


def stage_dataset(labeled, out_train, out_test, meta_out, *, dedup, balance, test_fraction, seed):
    if seed is None:
        raise ValidationError("MISSING_SEED", "dataset construction needs --seed")
    split, meta = build_dataset(
        labeled, dedup=dedup, do_balance=balance, test_fraction=test_fraction, seed=seed
    )
    write_dataset(out_train, split.train)
    write_dataset(out_test, split.test)
    write_json(meta_out, meta)
    log.info("dataset: train %d, test %d", len(split.train), len(split.test))
    return split, meta


def stage_features(train, out, config=None):
    model = fit_tfidf([ls.sentence for ls in train], config or TfidfConfig())
    save_tfidf(model, out)
    log.info("features: vocabulary of %d tokens", model.dim)
    return model


def model_params(kind, section):
    params = dict(section or {})
    if kind == "forest" and not params.get("max_depth"):
        params["max_depth"] = None
    return params


def stage_train(kind, train, features, features_path, out, seed=0, params=None, train_path=None):
    X = transform_matrix(features, [ls.sentence for ls in train])
    y = [ls.label for ls in train]
    meta = {"feature_model_ref": classifiers.feature_ref(features_path, out), "seed": seed}
    if train_path:
        meta["train_sha256"] = sha256_file(train_path)
    background = np.asarray(X.mean(axis=0)).ravel() if kind == "logreg" else None
    model = classifiers.train(kind, X, y, seed=seed, params=model_params(kind, params),
                              background=background, metadata=meta)
    classifiers.save_model(model, out)
    log.info("train: %s model written to %s", model.kind, out)
    return model


def _stem(path):
    return path[:-5] if path.endswith(".json") else os.path.splitext(path)[0]


def stage_eval(model, test, features, report_path, threshold=0.5, figures=True, title=""):
    report = evaluate(model, test, features, threshold)
    stem = _stem(report_path)
    write_report(report, report_path, roc_csv=f"{stem}.roc.csv")
    outputs = [report_path, f"{stem}.roc.csv"]
    if figures:
        outputs.append(plotting.confusion_roc(report, f"{stem}.png", title))
    log.info("eval %s: accuracy=%.4f f1_ai=%.4f auc=%.4f brier=%.4f",
             model.kind, report.accuracy, report.f1_ai, report.auc, report.brier)
    return report, outputs


def stage_diagnose(model, features, out, *, sentences=None, temporal=None, seed=0,
                   suite=None, threshold=0.5, figures=True):
    result = {"model_kind": model.kind}
    stem = _stem(out)
    outputs = []
    if sentences is not None:
        try:
            lb = length_bias(model, sentences, features)
        except DiscloseError as exc:
            # ZERO_VARIANCE and friends are findings, not crashes.
            result["length_bias"] = {"error": exc.code, "message": exc.message}
        else:
            result["length_bias"] = lb.to_dict()
            if figures:
                outputs.append(plotting.length_scatter(lb, f"{stem}.length_bias.png"))
    if temporal is not None:
        tr = temporal_eval(model, temporal, features, seed, threshold)
        result["temporal"] = tr.to_dict()
        write_temporal_csv(f"{stem}.temporal.csv", tr)
        outputs.append(f"{stem}.temporal.csv")
        if figures:
            outputs.append(plotting.temporal(tr, f"{stem}.temporal.png"))
    if suite is not None:
        sr = adversarial_suite(model, builtin_path("adversarial_suite.csv") if suite == "builtin" else suite,
                               features, threshold)
        result["adversarial"] = sr.to_dict()
    write_json(out, result)
    return result, [out] + outputs


STAGES = ("ingest", "label", "dataset", "features", "train", "eval", "diagnose")


class StageError(DiscloseError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = 3 if isinstance(cause, (InputFileError, OSError)) else 2
        code = getattr(cause, "code", type(cause).__name__)
        super().__init__("STAGE_FAILED", f"stage {stage} failed: {code}: {cause}")


def run_pipeline(cfg, out_dir):
    """Run every stage in order under ``out_dir`` and write ``run_manifest.json`` last.

    On failure the manifest is still written, with ``status = "failed"`` and the
    failing stage, and the partial outputs are left in place.
    """
    os.makedirs(out_dir, exist_ok=True)

    def p(*parts):
        return os.path.join(out_dir, *parts)

    def rel(path):
        return os.path.relpath(path, out_dir).replace(os.sep, "/")

    inputs = {}
    for key in ("manifest", "lexicon", "overrides", "abbreviations", "adversarial", "external_scores"):
        path = cfg.path(key)
        if path == "builtin":
            path = builtin_path("adversarial_suite.csv")
        if path:
            inputs[key] = {"file": os.path.basename(path), "sha256": sha256_file(path)}
    timings, outputs = {}, []
    manifest = {"tool": "disclose", "tool_version": __version__, "config": cfg.snapshot(),
                "inputs": inputs, "timings": timings, "outputs": outputs, "status": "running"}
    state = {}
    f, ds, ev, dg = cfg["filter"], cfg["dataset"], cfg["eval"], cfg["diagnostics"]
    kinds = list(cfg["models"]["kinds"])

    def do_ingest():
        policy = FilterPolicy(f["min_tokens"], f["max_tokens"], f["max_digit_ratio"],
                              f["require_lowercase_word"])
        state["sentences"], _ = stage_ingest(cfg.path("manifest"), p("sentences.jsonl"),
                                             p("dropped.jsonl"), policy, cfg.path("abbreviations"))
        return [p("sentences.jsonl"), p("dropped.jsonl")]

    def do_label():
        stage_label(state["sentences"], cfg.path("lexicon"), p("labeled.csv"), cfg.path("overrides") or None)
        return [p("labeled.csv")]

    def do_dataset():
        # Read back from disk so the run consumes exactly what a step-by-step run would.
        labeled = read_labeled(p("labeled.csv"))
        stage_dataset(labeled, p("dataset", "train.csv"), p("dataset", "test.csv"),
                      p("dataset", "split_meta.json"), dedup=ds["dedup"], balance=ds["balance"],
                      test_fraction=ds["test_fraction"], seed=ds["seed"])
        state["train"] = read_labeled(p("dataset", "train.csv"))
        state["test"] = read_labeled(p("dataset", "test.csv"))
        return [p("dataset", "train.csv"), p("dataset", "test.csv"), p("dataset", "split_meta.json")]

    def do_features():
        state["features"] = stage_features(state["train"], p("features.json"),
                                           TfidfConfig(**cfg["features"]))
        return [p("features.json")]

    def do_train():
        state["models"] = {}
        written = []
        for kind in kinds:
            path = p("models", f"{kind}.json")
            stage_train(kind, state["train"], state["features"], p("features.json"), path,
                        ds["seed"], cfg["models"].get(kind), p("dataset", "train.csv"))
            state["models"][kind] = classifiers.load_model(path)
            written.append(path)
        ext = cfg.path("external_scores")
        if ext:
            state["models"]["external"] = classifiers.load_external_scores(ext)
        return written

    def do_eval():
        written = []
        for name, model in state["models"].items():
            _, outs = stage_eval(model, state["test"], state["features"],
                                 p("reports", f"eval_{name}.json"), ev["threshold"], ev["figures"], name)
            written += outs
        return written

    def do_diagnose():
        written = []
        for name, model in state["models"].items():
            suite = None
            if dg["adversarial"] and name != "external":
                suite = cfg.path("adversarial") or None
            _, outs = stage_diagnose(
                model, state["features"], p("reports", f"diagnostics_{name}.json"),
                sentences=[ls.sentence for ls in state["test"]] if dg["length_bias"] else None,
                temporal=state["test"] if dg["temporal"] else None,
                seed=ds["seed"], suite=suite, threshold=ev["threshold"], figures=ev["figures"],
            )
            written += outs
        return written

    steps = dict(zip(STAGES, (do_ingest, do_label, do_dataset, do_features, do_train, do_eval, do_diagnose)))
    try:
        for name in STAGES:
            t0 = time.perf_counter()
            try:
                written = steps[name]()
            except Exception as exc:
                timings[name] = time.perf_counter() - t0
                manifest.update(status="failed", failed_stage=name, error=str(exc))
                raise StageError(name, exc) from exc
            timings[name] = time.perf_counter() - t0
            outputs.extend({"path": rel(w), "sha256": sha256_file(w)} for w in written)
        manifest["status"] = "ok"
    finally:
        write_json(p("run_manifest.json"), manifest)
    return manifest
