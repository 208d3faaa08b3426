import math

import numpy as np
import pytest

from chromalign.embeddings import (EmbeddingSet, ExtractionConfig,
                                   load_embedding_directory, load_embeddings,
                                   pearson_similarity, save_embeddings,
                                   write_embedding_directory)
from chromalign.errors import (AlignmentError, IntegrityError, NotFoundError,
                               ParseError, UndefinedStatisticError)


def write_vec(path, lines, header=None):
    body = [header or f"{len(lines)} {len(lines[0].split()) - 1}"] + lines
    path.write_text("\n".join(body) + "\n")


class TestLoadEmbeddings:
    def test_header_and_dims(self, tmp_path):
        path = tmp_path / "v.vec"
        rng = np.random.default_rng(0)
        lines = [f"t{i} " + " ".join(f"{v:.6f}" for v in rng.normal(size=1024))
                 for i in range(18)]
        write_vec(path, lines, header="18 1024")
        es = load_embeddings(path)
        assert es.dim == 1024
        assert len(es.vectors) == 18

    def test_dimension_mismatch_names_term(self, tmp_path):
        path = tmp_path / "v.vec"
        write_vec(path, ["good 1.0 2.0 3.0", "short 1.0 2.0"], header="2 3")
        with pytest.raises(ParseError, match="short"):
            load_embeddings(path)

    def test_duplicate_term_rejected(self, tmp_path):
        path = tmp_path / "v.vec"
        write_vec(path, ["dup 1.0", "dup 2.0"], header="2 1")
        with pytest.raises(IntegrityError, match="dup"):
            load_embeddings(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "v.vec"
        write_vec(path, ["bad 1.0 nan"], header="1 2")
        with pytest.raises(IntegrityError, match="bad"):
            load_embeddings(path)

    def test_header_count_enforced(self, tmp_path):
        path = tmp_path / "v.vec"
        write_vec(path, ["a 1.0"], header="2 1")
        with pytest.raises(IntegrityError, match="2"):
            load_embeddings(path)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        vectors = {f"t{i}": rng.normal(size=7) for i in range(5)}
        es = EmbeddingSet("m", ExtractionConfig.CC, 2, 7, vectors)
        path = tmp_path / "rt.vec"
        save_embeddings(es, path)
        loaded = load_embeddings(path, model_id="m", config=ExtractionConfig.CC, layer=2)
        for term, vec in vectors.items():
            assert np.array_equal(loaded.vectors[term], vec)
        save_embeddings(loaded, tmp_path / "rt2.vec")
        assert (tmp_path / "rt.vec").read_bytes() == (tmp_path / "rt2.vec").read_bytes()


class TestEmbeddingDirectory:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        sets = [EmbeddingSet("m", ExtractionConfig.RC, layer, 4,
                             {f"t{i}": rng.normal(size=4) for i in range(3)})
                for layer in range(3)]
        write_embedding_directory(sets, tmp_path / "dir")
        loaded = load_embedding_directory(tmp_path / "dir")
        assert [e.layer for e in loaded] == [0, 1, 2]
        assert all(e.model_id == "m" and e.config is ExtractionConfig.RC for e in loaded)

    def test_missing_layer_file_named(self, tmp_path):
        d = tmp_path / "dir"
        d.mkdir()
        (d / "manifest.txt").write_text("model=m\nconfig=CC\nlayers=2\n")
        (d / "layer00.vec").write_text("1 2\nt 1.0 2.0\n")
        with pytest.raises(NotFoundError, match="layer01.vec"):
            load_embedding_directory(d)

    def test_fixture_manifest(self, embedding_layers):
        assert len(embedding_layers) == 2
        assert embedding_layers[0].model_id == "synthmodel"
        assert embedding_layers[0].config is ExtractionConfig.CC
        assert embedding_layers[0].dim == 24


class TestPearsonSimilarity:
    def test_self_correlation(self):
        u = np.array([1.0, 2.0, 5.0, 3.0])
        assert pearson_similarity(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_anticorrelation(self):
        u = np.array([1.0, 2.0, 5.0, 3.0])
        assert pearson_similarity(u, -u) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_computed_case(self):
        # oracle: covariance / std formula evaluated by hand:
        # centered u = (-1.5,-.5,.5,1.5), centered v = (-1.75,.25,1.25,.25)
        # sum uv = 3.5 ; ss_u = 5 ; ss_v = 4.75
        expected = 3.5 / math.sqrt(5.0 * 4.75)
        got = pearson_similarity([1, 2, 3, 4], [2, 4, 5, 4])
        assert got == pytest.approx(expected, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(9)
        u, v = rng.normal(size=20), rng.normal(size=20)
        assert pearson_similarity(u, v) == pearson_similarity(v, u)

    def test_positive_affine_invariance(self):
        rng = np.random.default_rng(10)
        u, v = rng.normal(size=15), rng.normal(size=15)
        base = pearson_similarity(u, v)
        assert pearson_similarity(3.2 * u + 7.0, v) == pytest.approx(base, abs=1e-12)

    def test_constant_vector_error(self):
        with pytest.raises(UndefinedStatisticError):
            pearson_similarity([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(AlignmentError):
            pearson_similarity([1.0, 2.0], [1.0, 2.0, 3.0])
