from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# Independent token rule used by test oracles (mirrors the documented
# contract: word runs with intra-word hyphens kept, lowercased).
ORACLE_TOKEN_RE = re.compile(r"\w+(?:-\w+)*", re.UNICODE)


def oracle_tokens(text: str) -> list[str]:
    return [m.group(0).lower() for m in ORACLE_TOKEN_RE.finditer(text)]


def read_jsonl_rows(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "_header" in rec:
                continue
            rows.append(rec)
    return rows


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fig_corpus_index():
    from dforge.corpus import ingest

    return ingest(FIXTURES / "corpus.txt", "text")


@pytest.fixture(scope="session")
def train_items():
    from dforge.dataset import load_dataset

    return load_dataset(FIXTURES / "mcq_train.jsonl", "mcq")


@pytest.fixture(scope="session")
def test_items():
    from dforge.dataset import load_dataset

    return load_dataset(FIXTURES / "mcq_test.jsonl", "mcq")


@pytest.fixture(scope="session")
def fixture_kg():
    from dforge.kg import load_kg

    return load_kg(FIXTURES / "kg.tsv")
