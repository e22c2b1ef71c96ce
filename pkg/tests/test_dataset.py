import pytest
from hypothesis import given, settings, strategies as st

from disclose.dataset import (
    balance, build_dataset, deduplicate, n_test_for_class, read_loose_dataset, round_half_up,
    stratified_split,
)
from disclose.errors import DiscloseError
from disclose.weaklabel import AI, NON_AI

from conftest import lab


def make(n_ai, n_non):
    return ([lab(f"ai sentence number {i}", AI, f"a:{i:05d}") for i in range(n_ai)]
            + [lab(f"plain sentence number {i}", NON_AI, f"n:{i:05d}") for i in range(n_non)])


def test_dedup_examples():
    rows = [lab("We use AI.", AI, "a", 2019), lab("we use ai", AI, "b", 2021), lab("Loans.", NON_AI, "c")]
    out = deduplicate(rows)
    assert [r.sentence_id for r in out] == ["a", "c"]
    uniq = make(3, 3)
    assert deduplicate(uniq) == uniq


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["A b.", "a B", "c d!", "e", "E  "]),
                          st.sampled_from([AI, NON_AI])), max_size=15))
def test_dedup_idempotent(items):
    rows = [lab(t, y, f"s{i}") for i, (t, y) in enumerate(items)]
    once = deduplicate(rows)
    assert deduplicate(once) == once


def test_balance_counts():
    out = balance(make(793, 5000), seed=1)
    assert sum(r.label == AI for r in out) == 793 and sum(r.label == NON_AI for r in out) == 793
    assert len(balance(make(10, 10), 0)) == 20
    with pytest.raises(DiscloseError) as e:
        balance(make(10, 6), 0)
    assert e.value.code == "INSUFFICIENT_NEGATIVES"
    with pytest.raises(DiscloseError) as e:
        balance(make(0, 6), 0)
    assert e.value.code == "NO_POSITIVES"


def test_balance_deterministic_and_seed_sensitive():
    rows = make(20, 200)
    a, b, c = balance(rows, 5), balance(rows, 5), balance(rows, 6)
    assert a == b and a != c


def test_rounding():
    assert round_half_up(158.6) == 159
    assert round_half_up(0.5) == 1 and round_half_up(2.5) == 3
    assert n_test_for_class(793, 0.2) == 159
    assert n_test_for_class(5, 0.1) == 1


def test_split_examples():
    split = stratified_split(make(793, 793), 0.2, seed=42)
    assert len(split.test) == 318
    assert sum(r.label == AI for r in split.test) == 159
    s2 = stratified_split(make(10, 10), 0.2, 0)
    assert len(s2.test) == 4
    s3 = stratified_split(make(4, 4), 0.5, 0)
    assert len(s3.train) == len(s3.test) == 4
    assert {r.sentence_id for r in s3.train}.isdisjoint(r.sentence_id for r in s3.test)


def test_split_errors():
    with pytest.raises(DiscloseError) as e:
        stratified_split(make(4, 4), 1.0, 0)
    assert e.value.code == "BAD_FRACTION"
    with pytest.raises(DiscloseError) as e:
        stratified_split(make(1, 4), 0.2, 0)
    assert e.value.code == "CLASS_TOO_SMALL"


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.integers(2, 40), st.floats(0.05, 0.95), st.integers(0, 2**32))
def test_split_partition(n_ai, n_non, frac, seed):
    rows = make(n_ai, n_non)
    s = stratified_split(rows, frac, seed)
    assert sorted(r.sentence_id for r in s.train + s.test) == sorted(r.sentence_id for r in rows)
    assert sum(r.label == AI for r in s.test) == n_test_for_class(n_ai, frac)
    order = {r.sentence_id: i for i, r in enumerate(rows)}
    assert [order[r.sentence_id] for r in s.test] == sorted(order[r.sentence_id] for r in s.test)


def test_build_dataset_meta():
    rows = make(30, 100) + [lab("ai sentence number 0.", AI, "dup")]
    split, meta = build_dataset(rows, seed=3)
    assert meta["dedup"]["removed"] == 1
    assert meta["balanced"] == {"AI": 30, "NON_AI": 30}
    assert meta["test"] == {"AI": 6, "NON_AI": 6}
    assert meta["generator"]["bit_generator"] == "numpy.random.PCG64"


def test_read_loose_dataset(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("Sentence,Label\nWe use AI.,1\nLoans grew.,0\n")
    rows = read_loose_dataset(p)
    assert [r.label for r in rows] == [AI, NON_AI]
    p.write_text("text,label\nWe use AI.,AI\nLoans grew.,Non-AI\n")
    assert [r.label for r in read_loose_dataset(p)] == [AI, NON_AI]
