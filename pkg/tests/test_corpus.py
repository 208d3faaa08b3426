import math

import numpy as np
import pytest

from chromalign.corpus import (FEATURE_COLUMNS, conllu_term_stats,
                               count_cooccurrences, export_feature_table,
                               load_feature_table, pmi_collocation_entropy,
                               pmi_vector, spearman)
from chromalign.errors import (ConfigurationError, InputError, NotFoundError,
                               ParseError, UndefinedStatisticError)


class TestCountCooccurrences:
    def test_adjacency_window_one(self):
        counts = count_cooccurrences(["the red car"], ["red"], window=1)
        assert counts.counts["red"] == {"the": 1, "car": 1}

    def test_sentence_boundary_clips(self):
        w1 = count_cooccurrences(["the red car"], ["red"], window=1)
        w2 = count_cooccurrences(["the red car"], ["red"], window=2)
        assert w1.counts["red"] == w2.counts["red"]

    def test_multiple_occurrences_additive(self):
        counts = count_cooccurrences(["red car red"], ["red"], window=1)
        assert counts.counts["red"]["car"] == 2

    def test_window_dominance(self):
        rng = np.random.default_rng(0)
        vocab = ["a", "b", "c", "d", "red"]
        corpus = [" ".join(rng.choice(vocab, size=rng.integers(2, 9)))
                  for _ in range(50)]
        small = count_cooccurrences(corpus, ["red"], window=1)
        large = count_cooccurrences(corpus, ["red"], window=3)
        for ctx, count in small.counts["red"].items():
            assert large.counts["red"][ctx] >= count

    def test_marginals_consistent_with_total(self):
        counts = count_cooccurrences(["a b c", "b c d e"], ["b"], window=2)
        assert counts.total == sum(counts.marginals.values())

    def test_empty_corpus_rejected(self):
        with pytest.raises(InputError):
            count_cooccurrences([], ["red"], window=1)
        with pytest.raises(ConfigurationError):
            count_cooccurrences(["a b"], ["a"], window=0)


class TestPmiVector:
    def test_perfect_collocation_oracle(self):
        # oracle: direct probability ratio. 10x "aaa bbb" plus fillers:
        # count(aaa,bbb)=10, marg(aaa)=10, marg(bbb)=10, total=20+2*n_filler_events
        corpus = ["aaa bbb"] * 10 + ["ccc ddd"] * 5
        counts = count_cooccurrences(corpus, ["aaa"], window=1)
        total = counts.total
        expected = math.log2(10 * total / (10 * 10))
        assert pmi_vector(counts, "aaa")["bbb"] == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(math.log2(total / 10), abs=1e-12)

    def test_independent_pair_clipped_to_zero(self):
        # xx co-occurs with yy and zz equally; PMI against each ~ log2(2*total/..)
        rng = np.random.default_rng(1)
        tokens = rng.choice(["xx", "yy", "zz", "ww"], size=4000)
        corpus = [" ".join(tokens[i:i + 8]) for i in range(0, 4000, 8)]
        counts = count_cooccurrences(corpus, ["xx"], window=2)
        vec = pmi_vector(counts, "xx")
        for value in vec.values():
            assert value < 0.3  # near-independence: PMI ~ 0 (clipped at 0)

    def test_never_cooccurring_context_absent(self):
        counts = count_cooccurrences(["aaa bbb", "ccc ddd"], ["aaa"], window=1)
        assert "ccc" not in pmi_vector(counts, "aaa")

    def test_unseen_term_rejected(self):
        counts = count_cooccurrences(["aaa bbb"], ["aaa"], window=1)
        with pytest.raises(NotFoundError):
            pmi_vector(counts, "zzz")


class TestCollocationEntropy:
    def test_point_mass_zero(self):
        assert pmi_collocation_entropy({"only": 2.5}) == 0.0

    def test_uniform_log2_k(self):
        for k in (2, 4, 8):
            vec = {f"c{i}": 1.7 for i in range(k)}
            assert pmi_collocation_entropy(vec) == pytest.approx(math.log2(k), abs=1e-12)

    def test_hand_computed_three_one(self):
        expected = 0.75 * math.log2(4 / 3) + 0.25 * math.log2(4)
        assert pmi_collocation_entropy({"a": 3.0, "b": 1.0}) == pytest.approx(
            expected, abs=1e-12)
        assert expected == pytest.approx(0.811, abs=1e-3)

    def test_scale_invariance(self):
        vec = {"a": 0.3, "b": 1.1, "c": 2.4}
        scaled = {k: 7.3 * v for k, v in vec.items()}
        assert pmi_collocation_entropy(vec) == pytest.approx(
            pmi_collocation_entropy(scaled), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(UndefinedStatisticError):
            pmi_collocation_entropy({})


class TestConlluStats:
    def test_fixture_statistics(self, fixtures_dir):
        with open(fixtures_dir / "parsed_small.conllu", encoding="utf-8") as fh:
            stats = conllu_term_stats(fh, ["red", "yellow", "green", "blue"])
        assert "blue" not in stats  # never occurs
        yellow = stats["yellow"]
        # single occurrence, root, governs a cop child
        assert yellow.count == 1
        assert yellow.deprel_ent == 0.0
        assert yellow.head_ent == 0.0
        assert yellow.cop_prop == 1.0
        assert yellow.adj_prop == 1.0
        red = stats["red"]
        # red: amod(car), nsubj(wins), amod(rose), amod:emph(rose) -> 4 occurrences
        assert red.count == 4
        assert red.amod_prop == 0.75   # amod:emph counts toward amod
        assert red.adj_prop == 0.75    # one NOUN usage
        assert red.log_freq == pytest.approx(math.log(4), abs=1e-12)
        assert red.cop_prop == 0.0
        green = stats["green"]
        assert green.count == 3
        assert green.cop_prop == pytest.approx(1 / 3, abs=1e-12)

    def test_two_way_uniform_deprel_entropy(self):
        lines = [
            "1\tred\tred\tADJ\tJJ\t_\t2\tamod\t_\t_",
            "2\tcar\tcar\tNOUN\tNN\t_\t0\troot\t_\t_",
            "",
            "1\tred\tred\tNOUN\tNN\t_\t2\tnsubj\t_\t_",
            "2\twins\twin\tVERB\tVBZ\t_\t0\troot\t_\t_",
        ]
        stats = conllu_term_stats(lines, ["red"])
        assert stats["red"].deprel_ent == pytest.approx(1.0, abs=1e-12)

    def test_self_attachment_flag(self):
        lines = [
            "1\tyellow\tyellow\tADJ\tJJ\t_\t2\tcop\t_\t_",
            "2\tthing\tthing\tNOUN\tNN\t_\t0\troot\t_\t_",
        ]
        child = conllu_term_stats(lines, ["yellow"], cop_attachment="child")
        own = conllu_term_stats(lines, ["yellow"], cop_attachment="self")
        assert child["yellow"].cop_prop == 0.0
        assert own["yellow"].cop_prop == 1.0

    def test_malformed_row_strict_and_tolerant(self):
        lines = ["1\tred\tred\tADJ\tJJ\t_\t0\troot\t_\t_", "broken row"]
        with pytest.raises(ParseError, match="line 2"):
            conllu_term_stats(lines, ["red"])
        stats = conllu_term_stats(lines, ["red"], tolerant=True)
        assert stats["red"].count == 1

    def test_proportions_bounded(self, fixtures_dir):
        with open(fixtures_dir / "parsed_small.conllu", encoding="utf-8") as fh:
            stats = conllu_term_stats(fh, ["red", "yellow", "green"])
        for st in stats.values():
            for value in (st.adj_prop, st.amod_prop, st.cop_prop):
                assert 0.0 <= value <= 1.0
            assert st.pos_ent >= 0.0 and st.deprel_ent >= 0.0 and st.head_ent >= 0.0


class TestSpearman:
    def test_monotone_increasing(self):
        x = [1.0, 2.0, 5.0, 9.0, 11.0]
        y = [2.0, 4.0, 4.5, 8.0, 30.0]
        rho, p = spearman(x, y, n_permutations=500, seed=0)
        assert rho == pytest.approx(1.0, abs=1e-12)
        assert p < 0.05

    def test_monotone_decreasing(self):
        x = [1.0, 2.0, 5.0, 9.0, 11.0]
        rho, _ = spearman(x, [-v for v in x], n_permutations=100, seed=0)
        assert rho == pytest.approx(-1.0, abs=1e-12)

    def test_ties_match_rank_then_pearson_oracle(self):
        x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0]
        y = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0, 2.0, 8.0]

        def ranks(values):
            order = sorted(range(len(values)), key=lambda i: values[i])
            out = [0.0] * len(values)
            i = 0
            while i < len(order):
                j = i
                while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
                    j += 1
                mean_rank = (i + j) / 2.0 + 1.0
                for k in range(i, j + 1):
                    out[order[k]] = mean_rank
                i = j + 1
            return out

        rx, ry = ranks(x), ranks(y)
        mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
        cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
        expected = cov / math.sqrt(sum((a - mx) ** 2 for a in rx)
                                   * sum((b - my) ** 2 for b in ry))
        rho, _ = spearman(x, y, n_permutations=10, seed=0)
        assert rho == pytest.approx(expected, abs=1e-12)

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=25)
        y = rng.normal(size=25)
        base, _ = spearman(x, y, n_permutations=10, seed=0)
        transformed, _ = spearman(np.exp(x), y, n_permutations=10, seed=0)
        assert transformed == pytest.approx(base, abs=1e-12)

    def test_constant_input_rejected(self):
        with pytest.raises(UndefinedStatisticError):
            spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0], n_permutations=10)


class TestFeatureTable:
    def _stats(self, terms):
        from chromalign.corpus import TermCorpusStats
        return {
            t: TermCorpusStats(term=t, count=10, log_freq=math.log(10),
                               pmi_col=1.5, pos_ent=0.3, deprel_ent=0.6,
                               head_ent=2.2, adj_prop=0.8, amod_prop=0.7,
                               cop_prop=0.1)
            for t in terms
        }

    def test_cross_product_rows(self, tmp_path):
        terms = [f"term{i:02d}" for i in range(18)]
        models = [f"model{i}-cc" for i in range(9)]
        responses = {(t, m): 0.1 for t in terms for m in models}
        path = tmp_path / "features.tsv"
        export_feature_table(self._stats(terms), responses, path)
        rows = load_feature_table(path)
        assert len(rows) == 162

    def test_header_contract(self, tmp_path):
        path = tmp_path / "features.tsv"
        export_feature_table(self._stats(["red"]), {("red", "m-cc"): 0.2}, path)
        header = path.read_text().splitlines()[0]
        assert header == "\t".join(FEATURE_COLUMNS)
        assert FEATURE_COLUMNS == ("term", "model", "tau", "log_freq", "pmi_col",
                                   "pos_ent", "deprel_ent", "head_ent",
                                   "adj_prop", "amod_prop", "cop_prop")

    def test_round_trip_preserves_values(self, tmp_path):
        stats = self._stats(["red", "blue"])
        responses = {("red", "m-cc"): 0.123456789, ("blue", "m-cc"): -0.4}
        path = tmp_path / "features.tsv"
        export_feature_table(stats, responses, path)
        rows = load_feature_table(path)
        by_term = {r["term"]: r for r in rows}
        assert by_term["red"]["tau"] == 0.123456789
        assert by_term["blue"]["pmi_col"] == 1.5

    def test_missing_predictor_flagged_not_dropped(self, tmp_path, caplog):
        import logging
        from dataclasses import replace
        stats = self._stats(["red"])
        stats["red"] = replace(stats["red"], pmi_col=None)
        responses = {("red", "m-cc"): 0.2, ("ghost", "m-cc"): 0.3}
        path = tmp_path / "features.tsv"
        with caplog.at_level(logging.WARNING):
            export_feature_table(stats, responses, path)
        rows = load_feature_table(path)
        assert len(rows) == 2
        by_term = {r["term"]: r for r in rows}
        assert by_term["red"]["pmi_col"] is None
        assert by_term["ghost"]["log_freq"] is None
        assert "missing" in caplog.text
