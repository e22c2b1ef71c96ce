import os

import pytest

from disclose.ingest import Sentence
from disclose.pipeline import builtin_path
from disclose.weaklabel import AI, NON_AI, LabeledSentence

MINICORPUS = builtin_path("minicorpus")


def sent(text, sid="s", year=2020):
    return Sentence.from_text(sid, text, sid.rsplit(":", 1)[0], year)


def lab(text, label, sid="s", year=2020):
    return LabeledSentence(sent(text, sid, year), label)


@pytest.fixture
def toy_corpus():
    return [sent("ai risk", "d:1"), sent("credit risk", "d:2"), sent("ai model", "d:3")]


@pytest.fixture(scope="session")
def minicorpus_config():
    return os.path.join(MINICORPUS, "config.toml")


@pytest.fixture(scope="session")
def separable_run(tmp_path_factory, minicorpus_config):
    """One full pipeline run on the bundled corpus, shared across tests."""
    from disclose.config import load_config
    from disclose.pipeline import run_pipeline

    out = tmp_path_factory.mktemp("run")
    run_pipeline(load_config(minicorpus_config), str(out))
    return out


__all__ = ["AI", "NON_AI", "sent", "lab"]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        status, what = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {what}")
