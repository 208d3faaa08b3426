"""Corpus-derived predictors: PPMI vectors and collocation entropy,
dependency-parse usage statistics, Spearman correlation, and the feature
table consumed by external mixed-effects modeling."""

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from chromalign.embeddings import pearson_similarity
from chromalign.errors import (ConfigurationError, InputError, NotFoundError,
                               ParseError, UndefinedStatisticError)

log = logging.getLogger(__name__)

FEATURE_COLUMNS = ("term", "model", "tau", "log_freq", "pmi_col", "pos_ent",
                   "deprel_ent", "head_ent", "adj_prop", "amod_prop", "cop_prop")


@dataclass(frozen=True)
class CooccurrenceCounts:
    """Sliding-window co-occurrence events, target rows only.

    An event is an ordered (focus, context) pair within the window, clipped at
    sentence boundaries. Marginals count event participation for every word,
    so total = sum of marginals = number of events.
    """

    window: int
    counts: Mapping[str, Counter]   # target term -> context word -> count
    marginals: Mapping[str, int]
    total: int


def count_cooccurrences(corpus: Iterable[str], targets, window: int) -> CooccurrenceCounts:
    """Scan a pre-tokenized one-sentence-per-line corpus.

    Windows are symmetric and sentence-bounded; tokens are lowercased to match
    the lexicon convention.
    """
    if window < 1:
        raise ConfigurationError(f"window must be >= 1, got {window}")
    target_set = set(targets)
    counts: dict[str, Counter] = {t: Counter() for t in target_set}
    marginals: Counter = Counter()
    total = 0
    seen_any = False
    for line in corpus:
        tokens = line.strip().lower().split()
        if not tokens:
            continue
        seen_any = True
        n = len(tokens)
        for i, focus in enumerate(tokens):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            n_neighbors = hi - lo - 1
            marginals[focus] += n_neighbors
            total += n_neighbors
            if focus in target_set:
                row = counts[focus]
                for j in range(lo, hi):
                    if j != i:
                        row[tokens[j]] += 1
    if not seen_any:
        raise InputError("corpus is empty")
    return CooccurrenceCounts(window, counts, dict(marginals), total)


def pmi_vector(counts: CooccurrenceCounts, term: str) -> dict[str, float]:
    """Positive PMI over context words: log2 of the observed/expected event
    ratio, clipped at zero; non-positive entries omitted."""
    if counts.marginals.get(term, 0) == 0 or term not in counts.counts:
        raise NotFoundError(f"term {term!r} has no co-occurrence counts")
    m_term = counts.marginals[term]
    vec = {}
    for ctx, joint in counts.counts[term].items():
        value = math.log2(joint * counts.total / (m_term * counts.marginals[ctx]))
        if value > 0.0:
            vec[ctx] = value
    return vec


def pmi_collocation_entropy(pmi_vec: Mapping[str, float]) -> float:
    """Shannon entropy (bits) of the PMI vector normalized to a distribution.

    Low entropy = mass on few collocates = strong collocation.
    """
    values = np.array([v for v in pmi_vec.values() if v > 0.0])
    if values.size == 0:
        raise UndefinedStatisticError("entropy undefined: no positive PMI entries")
    p = values / values.sum()
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class TermCorpusStats:
    term: str
    count: int
    log_freq: float                # natural log of the occurrence count
    pmi_col: float | None          # filled in from the PMI module
    pos_ent: float
    deprel_ent: float
    head_ent: float
    adj_prop: float
    amod_prop: float
    cop_prop: float

    def with_pmi_col(self, value: float) -> "TermCorpusStats":
        return replace(self, pmi_col=value)


def _entropy_bits(counter: Counter) -> float:
    total = sum(counter.values())
    if total == 0:
        return 0.0
    p = np.array(list(counter.values()), dtype=float) / total
    return float(-(p * np.log2(p)).sum()) + 0.0


def _base_relation(deprel: str) -> str:
    # subtyped relations (amod:poss) count toward their base relation
    return deprel.split(":", 1)[0].lower()


def conllu_term_stats(source: Iterable[str], terms, tolerant: bool = False,
                      cop_attachment: str = "child") -> dict[str, TermCorpusStats]:
    """Usage statistics per term from a 10-column dependency-annotated corpus.

    Matching is lowercase on the FORM column. cop_attachment="child" counts an
    occurrence toward cop_prop when the term governs a child with relation
    `cop` (the UD analysis of "the banana is yellow"); "self" instead counts
    the term itself bearing the relation. In tolerant mode malformed rows are
    skipped and counted in a warning instead of raising.
    """
    if cop_attachment not in ("child", "self"):
        raise ConfigurationError(f"cop_attachment must be 'child' or 'self', got {cop_attachment!r}")
    term_set = set(terms)
    occurrences: Counter = Counter()
    pos_dist: dict[str, Counter] = {t: Counter() for t in term_set}
    deprel_dist: dict[str, Counter] = {t: Counter() for t in term_set}
    head_dist: dict[str, Counter] = {t: Counter() for t in term_set}
    adj_count: Counter = Counter()
    amod_count: Counter = Counter()
    cop_count: Counter = Counter()
    skipped = 0

    sentence: list[tuple[int, str, str, str, int, str]] = []

    def flush():
        if not sentence:
            return
        by_id = {tok[0]: tok for tok in sentence}
        cop_heads = {tok[4] for tok in sentence if _base_relation(tok[5]) == "cop"}
        for tok_id, form, lemma, upos, head, deprel in sentence:
            if form not in term_set:
                continue
            occurrences[form] += 1
            pos_dist[form][upos] += 1
            rel = _base_relation(deprel)
            deprel_dist[form][rel] += 1
            if head == 0:
                head_dist[form]["<root>"] += 1
            elif head in by_id:
                head_dist[form][by_id[head][2].lower()] += 1
            else:
                head_dist[form]["<unknown>"] += 1
            if upos == "ADJ":
                adj_count[form] += 1
            if rel == "amod":
                amod_count[form] += 1
            if cop_attachment == "child":
                if tok_id in cop_heads:
                    cop_count[form] += 1
            elif rel == "cop":
                cop_count[form] += 1
        sentence.clear()

    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 10:
            if tolerant:
                skipped += 1
                continue
            raise ParseError(f"expected 10 tab-separated columns, got {len(fields)}", line_no)
        tok_id_raw = fields[0]
        if "-" in tok_id_raw or "." in tok_id_raw:
            continue  # multiword tokens and empty nodes carry no tree position
        try:
            tok_id = int(tok_id_raw)
            head = int(fields[6]) if fields[6] != "_" else 0
        except ValueError as exc:
            if tolerant:
                skipped += 1
                continue
            raise ParseError(f"bad ID or HEAD field: {exc}", line_no) from exc
        sentence.append((tok_id, fields[1].lower(), fields[2], fields[3], head, fields[7]))
    flush()
    if skipped:
        log.warning("skipped %d malformed rows in tolerant mode", skipped)

    stats = {}
    for term in sorted(term_set):
        count = occurrences[term]
        if count == 0:
            continue
        stats[term] = TermCorpusStats(
            term=term,
            count=count,
            log_freq=math.log(count),
            pmi_col=None,
            pos_ent=_entropy_bits(pos_dist[term]),
            deprel_ent=_entropy_bits(deprel_dist[term]),
            head_ent=_entropy_bits(head_dist[term]),
            adj_prop=adj_count[term] / count,
            amod_prop=amod_count[term] / count,
            cop_prop=cop_count[term] / count,
        )
    return stats


def spearman(x: Sequence[float], y: Sequence[float], n_permutations: int = 10_000,
             seed: int = 0) -> tuple[float, float]:
    """Spearman's rho (Pearson correlation of mean-tie ranks) with a seeded
    two-sided permutation p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigurationError("x and y must be equal-length 1-D sequences")
    if x.size < 3:
        raise ConfigurationError("need at least 3 observations")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    rho = pearson_similarity(rx, ry)
    exceed = 0
    for i in range(n_permutations):
        perm = np.random.default_rng([seed, i]).permutation(x.size)
        rho_p = pearson_similarity(rx, ry[perm])
        if abs(rho_p) >= abs(rho) - 1e-12:
            exceed += 1
    p = (1 + exceed) / (1 + n_permutations)
    return rho, p


def export_feature_table(stats: Mapping[str, TermCorpusStats],
                         responses: Mapping[tuple[str, str], float],
                         path: str | Path) -> None:
    """TSV with one row per (term, model): response tau plus all predictors.

    Rows with missing predictors are written with NA cells and flagged in the
    log, never dropped silently.
    """
    rows = sorted(responses.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    flagged = []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(FEATURE_COLUMNS)
        for (term, model), tau in rows:
            st = stats.get(term)
            if st is None:
                flagged.append((term, model, "all predictors"))
                writer.writerow([term, model, repr(float(tau))] + ["NA"] * 8)
                continue
            values = [st.log_freq, st.pmi_col, st.pos_ent, st.deprel_ent,
                      st.head_ent, st.adj_prop, st.amod_prop, st.cop_prop]
            if st.pmi_col is None:
                flagged.append((term, model, "pmi_col"))
            writer.writerow([term, model, repr(float(tau))]
                            + ["NA" if v is None else repr(float(v)) for v in values])
    if flagged:
        log.warning("feature table rows with missing predictors: %s", flagged)


def load_feature_table(path: str | Path) -> list[dict[str, object]]:
    """Round-trip reader for the exported feature table."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = tuple(next(reader))
        if header != FEATURE_COLUMNS:
            raise ParseError(f"unexpected feature table header: {header}", 1)
        for raw in reader:
            row: dict[str, object] = {"term": raw[0], "model": raw[1]}
            for key, value in zip(FEATURE_COLUMNS[2:], raw[2:]):
                row[key] = None if value == "NA" else float(value)
            rows.append(row)
    return rows
