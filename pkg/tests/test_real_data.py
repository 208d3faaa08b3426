"""Conditional checks against the real datasets (color naming lexicon, chip
coordinates, pretrained static vectors).

Point CHROMALIGN_DATA_DIR at a directory containing, in the formats described
in the README:
    chips.txt      - 330-row chip coordinate table
    lexicon.tsv    - 330 x 51 naming judgments
    fasttext.vec   - static vectors covering the 18 frequent terms

Everything here skips when the variable is unset; these tests are the only
ones that need non-committed data.
"""

import pytest

from chromalign.cielab import load_chip_table
from chromalign.embeddings import load_embeddings
from chromalign.lexicon import filter_terms, load_lexicon
from chromalign.rsa import build_cielab_rsm, build_embedding_rsm, kendall_tau
from tests.conftest import real_data_dir
from tests.test_lexicon import APPENDIX_TERMS

pytestmark = pytest.mark.skipif(
    real_data_dir() is None,
    reason="CHROMALIGN_DATA_DIR not set; real-dataset checks skipped")


@pytest.fixture(scope="module")
def data_dir():
    return real_data_dir()


def test_criterion_real_lexicon_cutoff_terms(data_dir):
    lexicon = load_lexicon(data_dir / "lexicon.tsv")
    assert len(lexicon.term_vocabulary) == 122
    terms = filter_terms(lexicon, 100)
    assert set(terms) == APPENDIX_TERMS


def test_criterion_real_fasttext_rsa(data_dir):
    lexicon = load_lexicon(data_dir / "lexicon.tsv")
    chips = load_chip_table(data_dir / "chips.txt")
    terms = filter_terms(lexicon, 100)
    vectors = load_embeddings(data_dir / "fasttext.vec", model_id="fasttext")
    result = kendall_tau(build_embedding_rsm(vectors, terms),
                         build_cielab_rsm(lexicon, chips, terms),
                         n_permutations=10_000, seed=0)
    assert result.tau == pytest.approx(0.23, abs=0.05)
    assert result.p_value < 0.05


def test_real_violet_neighborhood(data_dir):
    lexicon = load_lexicon(data_dir / "lexicon.tsv")
    chips = load_chip_table(data_dir / "chips.txt")
    terms = filter_terms(lexicon, 100)
    rsm = build_cielab_rsm(lexicon, chips, terms)
    row = dict(zip(rsm.labels, rsm.matrix[rsm.labels.index("violet")]))
    ranked = sorted((t for t in rsm.labels if t != "violet"),
                    key=lambda t: -row[t])
    assert {"purple", "lavender", "pink"} <= set(ranked[:5])
    assert {"aqua", "olive", "black"} & set(ranked[-5:])
