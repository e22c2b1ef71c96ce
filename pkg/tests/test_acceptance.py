"""Acceptance criteria 1-11, one test each.

Every test records PASS / FAIL / SKIPPED in ``RESULTS``; the summary hook in
conftest.py prints one line per criterion at the end of the session.  Run it
alone with ``pytest tests/test_acceptance.py -v``.

Criterion 10 needs the externally distributed annotated sentence CSV; point
``DISCLOSE_REFERENCE_DATA`` at it, otherwise the criterion is SKIPPED.
"""

import filecmp
import itertools
import json
import math
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import sparse

from disclose import classifiers
from disclose.classifiers.external import ExternalScores
from disclose.classifiers.logreg import LogRegModel, loss_and_grad
from disclose.classifiers.naive_bayes import train_nb
from disclose.config import load_config
from disclose.dataset import read_loose_dataset, stratified_split
from disclose.diagnostics import pearson_r, temporal_eval
from disclose.evaluation import brier, evaluate, roc_curve, trapezoid_area
from disclose.explain import MARGIN, exact_shap, kernel_shap, linear_shap
from disclose.features import TfidfConfig, fit_tfidf, transform, transform_matrix
from disclose.pipeline import run_pipeline
from disclose.synth import generate_corpus
from disclose.weaklabel import AI, NON_AI, read_labeled

from conftest import lab, sent

RESULTS = {}


@contextmanager
def criterion(n, what):
    try:
        yield
    except pytest.skip.Exception:
        RESULTS[n] = ("SKIPPED", what)
        raise
    except BaseException:
        RESULTS[n] = ("FAIL", what)
        raise
    RESULTS[n] = ("PASS", what)


def test_c01_tfidf_oracle(toy_corpus):
    with criterion(1, "TF-IDF idf and unit-vector oracle (1e-9)"):
        m = fit_tfidf(toy_corpus)
        assert abs(m.idf_of("ai") - (math.log(4 / 3) + 1)) < 1e-9
        assert abs(m.idf_of("credit") - (math.log(2) + 1)) < 1e-9
        v = transform(m, toy_corpus[0])
        assert len(v) == 2 and np.all(np.abs(np.asarray(v.values) - 1 / math.sqrt(2)) < 1e-9)


def test_c02_gradient_check():
    with criterion(2, "LogReg gradient vs central differences (rel err < 1e-6)"):
        rng = np.random.default_rng(2024)
        h = 1e-5
        for _ in range(20):
            d, n = int(rng.integers(1, 11)), int(rng.integers(2, 20))
            X = sparse.csr_matrix(rng.normal(size=(n, d)))
            y = rng.integers(0, 2, n).astype(float)
            w, b, lam = rng.normal(size=d), float(rng.normal()), float(rng.random())
            _, gw, gb = loss_and_grad(w, b, X, y, lam)
            num = np.zeros(d + 1)
            for j in range(d + 1):
                e = np.zeros(d + 1)
                e[j] = h
                f = lambda t: loss_and_grad(w + t[:d], b + t[d], X, y, lam)[0]  # noqa: E731
                num[j] = (f(e) - f(-e)) / (2 * h)
            ana = np.r_[gw, gb]
            assert np.linalg.norm(ana - num) / np.linalg.norm(ana) < 1e-6


def test_c03_naive_bayes_oracle():
    with criterion(3, "Naive Bayes P(ai|AI)=1/3, P(AI|ai)=2/3 (1e-12)"):
        docs = [sent("ai model"), sent("credit risk")]
        feats = fit_tfidf(docs, TfidfConfig(normalize=False))
        X = transform_matrix(feats, docs)
        X.data[:] = 1.0
        m = train_nb(X, [AI, NON_AI], alpha=1.0)
        ai = feats.vocabulary.get("ai")
        assert abs(math.exp(m.log_likelihood[1, ai]) - 1 / 3) < 1e-12
        x = sparse.csr_matrix(([1.0], ([0], [ai])), shape=(1, feats.dim))
        assert abs(m.predict_proba_matrix(x)[0] - 2 / 3) < 1e-12


def test_c04_auc_oracle():
    with criterion(4, "sweep AUC == pairwise concordance on 200 sets (1e-12)"):
        rng = np.random.default_rng(4)
        for i in range(200):
            n = int(rng.integers(2, 51))
            y = rng.integers(0, 2, n)
            y[:2] = [0, 1]
            p = np.round(rng.random(n), int(rng.integers(1, 3)))  # rounding forces ties
            scores = [(float(a), AI if b else NON_AI) for a, b in zip(p, y)]
            pos, neg = p[y == 1], p[y == 0]
            brute = sum(1.0 if a > c else 0.5 if a == c else 0.0
                        for a, c in itertools.product(pos, neg)) / (len(pos) * len(neg))
            assert abs(trapezoid_area(roc_curve(scores)) - brute) < 1e-12
        sep = [(0.9, AI), (0.8, AI), (0.3, NON_AI), (0.1, NON_AI)]
        assert trapezoid_area(roc_curve(sep)) == 1.0


def test_c05_brier_oracle():
    with criterion(5, "Brier 0.065 and 0.0 limits"):
        assert abs(brier([(0.7, AI), (0.2, NON_AI)]) - 0.065) < 1e-15
        assert brier([(1.0, AI), (0.0, NON_AI), (1.0, AI)]) == 0.0


def shap_fixtures():
    # Raw tf*idf (no normalization) keeps the margin additive over token positions.
    rng = np.random.default_rng(6)
    vocab = ["ai", "bank", "chatbot", "credit", "data", "fraud", "loan", "model", "risk", "the"]
    feats = fit_tfidf([sent(" ".join(vocab[: i + 1])) for i in range(len(vocab))],
                      TfidfConfig(normalize=False))
    out = []
    for _ in range(20):
        model = LogRegModel(rng.normal(size=feats.dim), float(rng.normal()), 0.0, {})
        words = rng.choice(vocab + ["oov"], size=int(rng.integers(1, 9)))
        out.append((model, sent(" ".join(words)), feats))
    return out


def test_c06_shapley_oracles():
    with criterion(6, "linear/kernel SHAP == exact SHAP and efficiency (1e-9)"):
        for i, (model, s, feats) in enumerate(shap_fixtures()):
            ex_m = exact_shap(model, s, feats, scale=MARGIN)
            lin = linear_shap(model, s, feats, background=np.zeros(feats.dim))
            assert np.max(np.abs(np.array(lin.phi) - ex_m.phi)) < 1e-9
            ex_p = exact_shap(model, s, feats)
            n = len(ex_p.tokens)
            ke = kernel_shap(model, s, feats, n_samples=2 ** n, seed=i)
            assert np.max(np.abs(np.array(ke.phi) - ex_p.phi)) < 1e-9
            for r in (ex_m, ex_p, lin):
                assert abs(r.efficiency_gap()) < 1e-9


def _tree_files(root):
    out = []
    for dirpath, _, files in os.walk(root):
        for f in files:
            out.append(os.path.relpath(os.path.join(dirpath, f), root))
    return sorted(out)


def test_c07_pipeline_determinism(tmp_path, minicorpus_config):
    with criterion(7, "two runs on the bundled corpus are byte-identical"):
        cfg = load_config(minicorpus_config)
        a, b = tmp_path / "a", tmp_path / "b"
        run_pipeline(cfg, str(a))
        run_pipeline(cfg, str(b))
        train = read_labeled(a / "dataset/train.csv")
        test = read_labeled(a / "dataset/test.csv")
        assert len(train) + len(test) >= 200
        banks = {ls.sentence.doc_id.split("-")[0] for ls in train + test}
        years = {ls.year for ls in train + test}
        assert len(banks) >= 6 and set(range(2015, 2024)) <= years
        files = _tree_files(a)
        assert files == _tree_files(b)
        assert any(f.startswith("models/") for f in files) and any(f.startswith("reports/") for f in files)
        for f in files:
            if f == "run_manifest.json":
                continue
            assert filecmp.cmp(a / f, b / f, shallow=False), f
        ma, mb = (json.loads((d / "run_manifest.json").read_text()) for d in (a, b))
        ma.pop("timings"), mb.pop("timings")
        assert ma == mb


def test_c08_separable_sanity(tmp_path, minicorpus_config):
    with criterion(8, "LogReg/NB/Forest F1(AI)=1.0 on separable synthetic data (< 10 s)"):
        corpus = tmp_path / "corpus"
        generate_corpus(str(corpus), seed=7, false_positives=False)
        cfg = load_config(minicorpus_config, [
            f"paths.manifest={json.dumps(str(corpus / 'manifest.csv'))}",
            f"paths.lexicon={json.dumps(str(corpus / 'lexicon.csv'))}",
            "paths.overrides=''", "eval.figures=false",
            "diagnostics.temporal=false", "diagnostics.length_bias=false", "diagnostics.adversarial=false",
        ])
        t0 = time.perf_counter()
        run_pipeline(cfg, str(tmp_path / "out"))
        elapsed = time.perf_counter() - t0
        for kind in ("logreg", "nb", "forest"):
            r = json.loads((tmp_path / f"out/reports/eval_{kind}.json").read_text())
            assert r["f1_ai"] == 1.0, (kind, r["confusion"])
        assert elapsed < 10.0, elapsed


def test_c09_balanced_split_arithmetic():
    with criterion(9, "793+793 at 0.2 gives test n=318 (159 per class)"):
        rows = ([lab(f"ai {i}", AI, f"a{i}") for i in range(793)]
                + [lab(f"non {i}", NON_AI, f"n{i}") for i in range(793)])
        split = stratified_split(rows, 0.2, seed=42)
        assert len(split.test) == 318
        assert sum(ls.label == AI for ls in split.test) == 159
        assert sum(ls.label == NON_AI for ls in split.test) == 159


TABLE1_F1 = {"logreg": 0.98, "nb": 0.91, "forest": 0.99}


def test_c10_reference_reproduction():
    with criterion(10, "reference-data F1(AI) within 0.03 of 0.98/0.91/0.99"):
        path = os.environ.get("DISCLOSE_REFERENCE_DATA", "")
        if not path or not os.path.exists(path):
            pytest.skip("DISCLOSE_REFERENCE_DATA not set or file absent")
        rows = read_loose_dataset(path)
        split = stratified_split(rows, 0.2, seed=42)
        feats = fit_tfidf([ls.sentence for ls in split.train])
        X = transform_matrix(feats, [ls.sentence for ls in split.train])
        y = [ls.label for ls in split.train]
        got = {}
        for kind in TABLE1_F1:
            model = classifiers.train(kind, X, y, seed=42)
            got[kind] = evaluate(model, split.test, feats).f1_ai
        print("reference F1(AI):", {k: round(v, 4) for k, v in got.items()})
        for kind, target in TABLE1_F1.items():
            assert abs(got[kind] - target) <= 0.03, (kind, got[kind], target)


def test_c11_diagnostics_oracles(separable_run):
    with criterion(11, "Pearson r=1.0, ZERO_VARIANCE, perfect-model temporal accuracy 1.0"):
        assert abs(pearson_r([1, 2, 3], [0.1, 0.2, 0.3]) - 1.0) < 1e-12
        with pytest.raises(Exception) as e:
            pearson_r([1, 2, 3], [0.5, 0.5, 0.5])
        assert e.value.code == "ZERO_VARIANCE"
        test = read_labeled(separable_run / "dataset/test.csv")
        perfect = ExternalScores({ls.sentence_id: 1.0 if ls.label == AI else 0.0 for ls in test})
        report = temporal_eval(perfect, test, seed=42)
        assert len(report.rows) >= 2
        assert all(row["accuracy"] == 1.0 for row in report.rows)
