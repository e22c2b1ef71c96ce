import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from disclose import classifiers
from disclose.classifiers.external import load_external_scores
from disclose.classifiers.forest import ForestConfig, train_forest
from disclose.classifiers.logreg import LogRegConfig, loss_and_grad, train_logreg
from disclose.classifiers.naive_bayes import train_nb
from disclose.errors import DiscloseError
from disclose.features import TfidfConfig, fit_tfidf, transform, transform_matrix
from disclose.weaklabel import AI, NON_AI

from conftest import sent


def fd_grad(w, b, X, y, lam, h=1e-5):
    g = np.zeros_like(w)
    for j in range(len(w)):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (loss_and_grad(w + e, b, X, y, lam)[0] - loss_and_grad(w - e, b, X, y, lam)[0]) / (2 * h)
    gb = (loss_and_grad(w, b + h, X, y, lam)[0] - loss_and_grad(w, b - h, X, y, lam)[0]) / (2 * h)
    return g, gb


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        d, n = int(rng.integers(1, 11)), int(rng.integers(2, 15))
        X = sparse.csr_matrix(rng.normal(size=(n, d)) * (rng.random((n, d)) < 0.6))
        y = rng.integers(0, 2, size=n).astype(float)
        w, b, lam = rng.normal(size=d), float(rng.normal()), float(rng.random())
        _, gw, gb = loss_and_grad(w, b, X, y, lam)
        fw, fb = fd_grad(w, b, X, y, lam)
        full, approx = np.r_[gw, gb], np.r_[fw, fb]
        assert np.linalg.norm(full - approx) / max(np.linalg.norm(full), 1e-12) < 1e-6


def test_logreg_examples():
    X = sparse.csr_matrix(np.array([[1.0], [-1.0]]))
    m = train_logreg(X, [AI, NON_AI], LogRegConfig(l2_lambda=0.1))
    assert m.weights[0] > 0
    assert m.predict_proba_matrix(sparse.csr_matrix([[1.0]]))[0] > 0.5
    big = train_logreg(X, [AI, NON_AI], LogRegConfig(l2_lambda=1e6, learning_rate=5e-7))
    assert abs(big.weights[0]) < 1e-5
    assert big.predict_proba_matrix(X) == pytest.approx([0.5, 0.5], abs=1e-5)
    assert m.trace["converged"] in (True, False) and m.trace["iterations"] >= 1


def test_logreg_against_sklearn():
    from sklearn.linear_model import LogisticRegression

    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 4))
    y = (X @ [1.0, -2.0, 0.5, 0.0] + rng.normal(size=60) > 0).astype(int)
    lam = 0.05
    ours = train_logreg(sparse.csr_matrix(X), y, LogRegConfig(l2_lambda=lam, tol=1e-10, max_iters=100000,
                                                                learning_rate=1.0))
    # sklearn minimizes C*sum(loss) + |w|^2/2, i.e. ours with C = 1/(n*lam).
    sk = LogisticRegression(C=1 / (60 * lam), tol=1e-12, max_iter=10000).fit(X, y)
    assert np.allclose(ours.weights, sk.coef_.ravel(), atol=1e-6)
    assert ours.bias == pytest.approx(sk.intercept_[0], abs=1e-6)


def test_logreg_errors():
    X = sparse.csr_matrix(np.eye(2))
    with pytest.raises(DiscloseError) as e:
        train_logreg(X, [AI, AI])
    assert e.value.code == "SINGLE_CLASS"
    with pytest.raises(DiscloseError) as e:
        train_logreg(sparse.csr_matrix([[1e3], [-1e3]]), [AI, NON_AI], LogRegConfig(learning_rate=1e6))
    assert e.value.code == "DIVERGED"


def nb_toy():
    docs = [sent("ai model"), sent("credit risk")]
    feats = fit_tfidf(docs, TfidfConfig(normalize=False))
    X = transform_matrix(feats, docs)
    X.data[:] = 1.0  # raw counts
    return train_nb(X, [AI, NON_AI], alpha=1.0), feats


def test_nb_toy_oracle():
    m, feats = nb_toy()
    ai = feats.vocabulary.get("ai")
    assert math.exp(m.log_likelihood[1, ai]) == pytest.approx(1 / 3, abs=1e-12)
    x = sparse.csr_matrix(([1.0], ([0], [ai])), shape=(1, feats.dim))
    assert m.predict_proba_matrix(x)[0] == pytest.approx(2 / 3, abs=1e-12)
    empty = sparse.csr_matrix((1, feats.dim))
    assert m.predict_proba_matrix(empty)[0] == pytest.approx(0.5, abs=1e-12)


def test_nb_against_sklearn():
    from sklearn.naive_bayes import MultinomialNB

    rng = np.random.default_rng(1)
    X = rng.random((40, 6)) * (rng.random((40, 6)) < 0.5)
    y = rng.integers(0, 2, 40)
    ours = train_nb(sparse.csr_matrix(X), y, alpha=0.5)
    sk = MultinomialNB(alpha=0.5).fit(X, y)
    assert np.allclose(ours.predict_proba_matrix(sparse.csr_matrix(X)), sk.predict_proba(X)[:, 1], atol=1e-12)


def test_nb_errors():
    X = sparse.csr_matrix(np.eye(2))
    with pytest.raises(DiscloseError) as e:
        train_nb(X, [AI, NON_AI], alpha=0)
    assert e.value.code == "BAD_ALPHA"
    with pytest.raises(DiscloseError) as e:
        train_nb(-X, [AI, NON_AI])
    assert e.value.code == "NEGATIVE_FEATURE"


def test_forest_separable_and_deterministic():
    X = sparse.csr_matrix(np.array([[0.0], [0.1], [0.2], [0.8], [0.9], [1.0]]))
    y = [NON_AI] * 3 + [AI] * 3
    f = train_forest(X, y, ForestConfig(n_trees=10, seed=4))
    assert np.array_equal(f.predict_proba_matrix(X) >= 0.5, np.array([0, 0, 0, 1, 1, 1], bool))
    g = train_forest(X, y, ForestConfig(n_trees=10, seed=4))
    assert json.dumps(f.to_dict(), sort_keys=True) == json.dumps(g.to_dict(), sort_keys=True)
    assert all(t.depth() <= 1 for t in f.trees)


def test_forest_more_trees_help():
    accs = {1: [], 100: []}
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(200, 5))
        y = np.where(X[:, 0] + X[:, 1] + rng.normal(scale=1.0, size=200) > 0, 1, 0)
        Xtr, Xte, ytr, yte = X[:150], X[150:], y[:150], y[150:]
        for k in accs:
            f = train_forest(sparse.csr_matrix(Xtr), ytr, ForestConfig(n_trees=k, seed=seed))
            accs[k].append(np.mean((f.predict_proba_matrix(sparse.csr_matrix(Xte)) >= 0.5) == yte))
    assert np.mean(accs[100]) >= np.mean(accs[1])


def test_forest_max_depth_and_min_leaf():
    rng = np.random.default_rng(2)
    X = sparse.csr_matrix(rng.random((80, 4)))
    y = rng.integers(0, 2, 80)
    f = train_forest(X, y, ForestConfig(n_trees=5, max_depth=2, seed=0))
    assert max(t.depth() for t in f.trees) <= 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.sampled_from(["logreg", "nb", "forest"]))
def test_probability_range(seed, kind):
    rng = np.random.default_rng(seed)
    X = sparse.csr_matrix(rng.random((12, 5)) * (rng.random((12, 5)) < 0.5))
    y = np.r_[np.ones(6), np.zeros(6)]
    m = classifiers.train(kind, X, y, seed=seed, params={"n_trees": 5} if kind == "forest" else None)
    p = m.predict_proba_matrix(sparse.csr_matrix(rng.random((7, 5))))
    assert np.all((p >= 0) & (p <= 1))


def test_logreg_zero_model_gives_half_and_oov_gives_sigmoid_b(toy_corpus):
    from disclose.classifiers.logreg import LogRegModel

    feats = fit_tfidf(toy_corpus)
    m = LogRegModel(np.zeros(feats.dim), 0.0, 0.0, {})
    assert classifiers.predict_proba(m, transform(feats, sent("ai risk"))) == 0.5
    m2 = LogRegModel(np.ones(feats.dim), -1.5, 0.0, {})
    assert classifiers.predict_proba(m2, transform(feats, sent("quantum ledger"))) == pytest.approx(
        1 / (1 + math.exp(1.5)))


def test_save_load_roundtrip(tmp_path, toy_corpus):
    feats = fit_tfidf(toy_corpus)
    from disclose.features import save_tfidf
    save_tfidf(feats, tmp_path / "f.json")
    X = transform_matrix(feats, toy_corpus)
    y = [AI, NON_AI, AI]
    for kind in ("logreg", "nb", "forest"):
        meta = {"feature_model_ref": classifiers.feature_ref(tmp_path / "f.json", tmp_path / f"{kind}.json")}
        m = classifiers.train(kind, X, y, seed=1, params={"n_trees": 3} if kind == "forest" else None,
                              metadata=meta)
        classifiers.save_model(m, tmp_path / f"{kind}.json")
        m2 = classifiers.load_model(tmp_path / f"{kind}.json")
        assert m2.kind == m.kind
        assert np.array_equal(m.predict_proba_matrix(X), m2.predict_proba_matrix(X))
        f2 = classifiers.resolve_features(m2, tmp_path / f"{kind}.json")
        assert f2.vocabulary.tokens == feats.vocabulary.tokens
    (tmp_path / "f.json").write_text((tmp_path / "f.json").read_text().replace("risk", "riskx"))
    with pytest.raises(DiscloseError) as e:
        classifiers.resolve_features(m2, tmp_path / "forest.json")
    assert e.value.code == "FEATURE_DIGEST_MISMATCH"


def test_external_scores(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("sentence_id,probability\ns1,0.97\ns2,0\n")
    ext = load_external_scores(p)
    assert ext.predict_proba("s1") == 0.97
    with pytest.raises(DiscloseError) as e:
        ext.predict_proba("s9")
    assert e.value.code == "MISSING_SENTENCE_ID"
    p.write_text("sentence_id,probability\ns1,0.5\ns2,1.5\n")
    with pytest.raises(DiscloseError) as e:
        load_external_scores(p)
    assert e.value.code == "PROBABILITY_OUT_OF_RANGE" and "3" in e.value.message


def test_xgboost_unsupported():
    with pytest.raises(DiscloseError) as e:
        classifiers.train("xgboost", sparse.csr_matrix(np.eye(2)), [AI, NON_AI])
    assert e.value.code == "UNSUPPORTED_MODEL"
