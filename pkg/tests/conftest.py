import os
from pathlib import Path

import pytest

from chromalign.cielab import load_chip_table
from chromalign.embeddings import load_embedding_directory, load_embeddings
from chromalign.lexicon import load_lexicon

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def chips():
    return load_chip_table(FIXTURES / "chips_synthetic.txt")


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(FIXTURES / "lexicon_synthetic.tsv")


@pytest.fixture(scope="session")
def embedding_layers():
    return load_embedding_directory(FIXTURES / "embeddings" / "synthmodel_cc")


@pytest.fixture(scope="session")
def static_embeddings():
    return load_embeddings(FIXTURES / "fasttext_like.vec", model_id="fasttext_like")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def real_data_dir() -> Path | None:
    """Directory with the real datasets (chips.txt, lexicon.tsv, fasttext.vec),
    prepared per README; tests depending on it skip when unset."""
    value = os.environ.get("CHROMALIGN_DATA_DIR")
    return Path(value) if value else None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid:
                name = report.nodeid.split("::")[-1]
                lines.append((name, outcome))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            mark = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"{mark}  {name}")
