"""Deterministic synthetic annual-report corpus for smoke tests and demos.

The generated text imitates bank annual reports: narrative paragraphs
wrapped at a fixed width (with occasional hyphenated line breaks), section
headers, table rows and control characters from PDF extraction.  AI
sentences always contain a seed term, so the corpus is lexically separable
apart from optional planted false positives that the overrides file fixes.
"""

import csv
import os
import shutil
import textwrap

from . import _rng
from .ingest import Document, clean_text, segment_sentences

BANKS = (
    ("ABRK", "Arbor Ridge Bancorp"),
    ("BCFN", "Bluecrest Financial"),
    ("CDLB", "Cedar Lake Bank"),
    ("DLTA", "Delta Prairie Bancshares"),
    ("ESTR", "Eastern Shore Trust"),
    ("FLNT", "Flint Hills Bancorp"),
    ("GRNT", "Granite Harbor Bank"),
    ("HWKS", "Hawkstone Financial"),
)

AI_TERMS = (
    "artificial intelligence", "machine learning", "deep learning", "generative AI",
    "AI", "natural language processing", "chatbot", "neural network", "computer vision",
    "large language models", "AI-powered", "conversational AI", "virtual assistant",
)

AI_TEMPLATES = (
    "In {year}, {bank} deployed {term} tools to strengthen fraud detection across card transactions.",
    "In {year} we expanded our use of {term} to automate document review in commercial lending.",
    "Our digital team piloted {term} capabilities in {year} that help customers resolve routine service requests.",
    "The Company invested ${a} million in {term} to improve anti-money laundering alert triage.",
    "{bank} established a governance committee in {year} to oversee the responsible use of {term}.",
    "Management believes {term} will change how the bank underwrites small business credit after {year}.",
    "We introduced a {term} model in {year} that prioritizes collection calls for delinquent accounts.",
    "Regulators have increased scrutiny of models that rely on {term}, which may raise our compliance costs.",
    "Our {term} program reduced manual processing time in deposit operations by {p}% in {year}.",
    "During {year} the bank hired {n} specialists in {term} within its enterprise data office.",
    "Third-party vendors that provide {term} services expose us to operational and model risk.",
    "We use {term} to personalize product offers delivered to {n} thousand mobile banking users.",
    "The U.S. banking industry is adopting {term} rapidly, and in {year} we intend to remain competitive.",
    "A cross-functional working group evaluated {n} new {term} use cases before production release.",
)

NON_AI_TEMPLATES = (
    "Net interest income increased to ${a}.{b} million in {year}, driven by higher loan balances.",
    "Total deposits grew {p}% compared with the prior year as we added new retail customers.",
    "The allowance for credit losses was {p}.{b}% of total loans at December 31, {year}.",
    "{bank} opened {n} new branches and consolidated {m} locations during the year.",
    "Noninterest expense rose {p}% in {year}, primarily due to higher salaries and employee benefits.",
    "At year end {year}, {bank} remained well capitalized under the framework applicable to U.S. banks.",
    "Commercial real estate loans represented {n}% of our loan portfolio at year end {year}.",
    "The Board of Directors declared a quarterly cash dividend of ${c} per share.",
    "In {year} we conducted internal audits of our loan portfolios and found no material weaknesses.",
    "Our wealth management business generated record fee income of ${a} million in {year}.",
    "Competition for deposits intensified in {year} as market interest rates moved higher.",
    "{bank} spent ${a} million on cybersecurity controls to protect customer information in {year}.",
    "The Company repurchased {n} thousand shares of common stock under its buyback program.",
    "Nonperforming assets declined to {p}.{b}% of total assets from the prior year.",
    "Our mortgage banking segment originated ${a} million of residential loans in {year}.",
    "Changes in interest rates after {year} could adversely affect the net interest margin of {bank}.",
    "In {year}, {bank} was subject to extensive supervision by the Federal Reserve and state regulators.",
    "Employees volunteered more than {n} thousand hours in the communities we serve.",
    "The efficiency ratio improved to {n}.{b}% as revenue growth outpaced expense growth.",
    "Securities available for sale of ${a} million are reported at fair value.",
    "Our liquidity position remained strong in {year}, supported by stable core deposits.",
    "The bank completed the acquisition of a community lender with {n} branch offices.",
    "Credit quality at {bank} remained sound in {year} across consumer and commercial portfolios.",
    "In {year} {bank} upgraded its core deposit platform to shorten account opening times.",
    "Mr. Jones retired from the Board after {n} years of service.",
    "Forward-looking statements in the {year} report of {bank} are subject to risks and uncertainties.",
)

HEADERS = (
    "ITEM 7.",
    "MANAGEMENT'S DISCUSSION AND ANALYSIS OF FINANCIAL CONDITION.",
    "LETTER TO SHAREHOLDERS.",
    "RISK FACTORS.",
)

FALSE_POSITIVES = (
    "Employees completed a deep learning program on leadership at our training academy.",
)


def _fill(rng, template, bank, year):
    return template.format(
        bank=bank, year=year, term=str(rng.choice(AI_TERMS)),
        a=int(rng.integers(20, 900)), b=int(rng.integers(0, 10)), c=f"0.{int(rng.integers(10, 60))}",
        p=int(rng.integers(1, 12)), n=int(rng.integers(2, 40)), m=int(rng.integers(1, 6)),
    )


def _wrap(rng, paragraph):
    lines = textwrap.wrap(paragraph, width=78, break_on_hyphens=False)
    out = []
    for line in lines:
        words = line.split(" ")
        long_words = [i for i, w in enumerate(words) if len(w) >= 9 and w.isalpha()]
        if long_words and rng.random() < 0.15:
            i = long_words[int(rng.integers(0, len(long_words)))]
            w = words[i]
            cut = len(w) // 2
            words[i] = w[:cut] + "-\n" + w[cut:]
        out.append(" ".join(words))
    return "\n".join(out)


def document_text(rng, bank_name, year, with_false_positive=False):
    n_ai = min(len(AI_TEMPLATES), max(1, 4 + (year - 2015) // 2 + int(rng.integers(0, 3))))
    n_non = int(rng.integers(18, 24))
    ai = [_fill(rng, AI_TEMPLATES[i], bank_name, year)
          for i in rng.choice(len(AI_TEMPLATES), size=n_ai, replace=False)]
    non = [_fill(rng, NON_AI_TEMPLATES[i], bank_name, year)
           for i in rng.choice(len(NON_AI_TEMPLATES), size=n_non, replace=False)]
    body = ai + non
    if with_false_positive:
        body.extend(FALSE_POSITIVES)
    order = rng.permutation(len(body))
    body = [body[i] for i in order]
    parts = [f"{bank_name.upper()}\n{year} ANNUAL REPORT.", str(HEADERS[int(rng.integers(0, len(HEADERS)))])]
    for start in range(0, len(body), 4):
        parts.append(_wrap(rng, "  ".join(body[start:start + 4])))
        if rng.random() < 0.3:
            parts.append(f"{year} {year - 1} {int(rng.integers(100, 999))},{int(rng.integers(100, 999))} "
                         f"{int(rng.integers(100, 999))},{int(rng.integers(100, 999))}.")
        if rng.random() < 0.2:
            parts.append("\x0c")
    return "\n\n".join(parts) + "\n"


def generate_corpus(out_dir, seed=7, n_banks=6, years=range(2015, 2024), false_positives=True):
    """Write ``texts/*.txt``, ``manifest.csv``, ``lexicon.csv`` and ``overrides.csv``.

    Returns the manifest path.  Output bytes depend only on the arguments.
    """
    texts_dir = os.path.join(out_dir, "texts")
    os.makedirs(texts_dir, exist_ok=True)
    rng = _rng.make_rng(seed, 99)
    rows, overrides = [], []
    for bank_id, bank_name in BANKS[:n_banks]:
        for year in years:
            doc_id = f"{bank_id}-{year}"
            fp = false_positives and year in (2018, 2022)
            text = document_text(rng, bank_name, year, fp)
            rel = f"texts/{doc_id}.txt"
            with open(os.path.join(out_dir, rel), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            rows.append((doc_id, bank_id, year, rel))
            if fp:
                doc = Document(doc_id, bank_id, year, clean_text(text))
                for s in segment_sentences(doc):
                    if s.text in FALSE_POSITIVES:
                        overrides.append((s.sentence_id, "NON_AI"))
    with open(os.path.join(out_dir, "manifest.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("doc_id", "bank_id", "year", "path"))
        w.writerows(rows)
    with open(os.path.join(out_dir, "overrides.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("sentence_id", "label"))
        w.writerows(overrides)
    here = os.path.dirname(os.path.abspath(__file__))
    shutil.copyfile(os.path.join(here, "data", "ai_seedwords.csv"), os.path.join(out_dir, "lexicon.csv"))
    return os.path.join(out_dir, "manifest.csv")
