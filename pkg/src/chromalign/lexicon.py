"""Color-naming lexicon: ingestion, term filtering, centroids, modal terms,
and listener surprisal."""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from chromalign.cielab import ChipTable, LabColor
from chromalign.errors import (ChipExcluded, IntegrityError, NotFoundError,
                               ParseError)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NamingLexicon:
    """Naming judgments per chip. Production data: 330 chips x 51 judgments.

    judgments maps chip_id -> Counter of terms; term_vocabulary holds total
    counts across chips.
    """

    judgments: Mapping[int, Counter]
    term_vocabulary: Counter = field(init=False)

    def __post_init__(self):
        vocab = Counter()
        for counts in self.judgments.values():
            vocab.update(counts)
        object.__setattr__(self, "term_vocabulary", vocab)

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, str, str]]) -> "NamingLexicon":
        """Build from (chip_id, subject_id, term) rows; no size validation."""
        judgments: dict[int, Counter] = {}
        for chip_id, _subject, term in rows:
            judgments.setdefault(int(chip_id), Counter())[term] += 1
        return cls(judgments)

    @property
    def chip_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.judgments))

    @property
    def n_judgments(self) -> int:
        return sum(self.term_vocabulary.values())

    def chip_judgment_total(self, chip_id: int) -> int:
        return sum(self._chip_counts(chip_id).values())

    def _chip_counts(self, chip_id: int) -> Counter:
        try:
            return self.judgments[chip_id]
        except KeyError:
            raise NotFoundError(f"no judgments for chip {chip_id}") from None


def load_lexicon(path: str | Path, expected_chips: int = 330,
                 judgments_per_chip: int = 51) -> NamingLexicon:
    """Read a judgment file: TSV rows ``chip_id<TAB>subject_id<TAB>term``.

    Enforces the dataset shape: chip ids 0..expected_chips-1 all present and
    each with exactly judgments_per_chip rows.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", line_no)
            try:
                chip_id = int(fields[0])
            except ValueError as exc:
                raise ParseError(f"bad chip_id {fields[0]!r}", line_no) from exc
            term = fields[2].strip().lower()
            if not term:
                raise ParseError("empty term", line_no)
            rows.append((chip_id, fields[1], term))
    lexicon = NamingLexicon.from_rows(rows)
    missing = sorted(set(range(expected_chips)) - set(lexicon.judgments))
    unexpected = sorted(set(lexicon.judgments) - set(range(expected_chips)))
    if missing or unexpected:
        raise IntegrityError(
            f"chip ids must cover 0..{expected_chips - 1} "
            f"(missing: {missing}, unexpected: {unexpected})")
    offenders = {cid: total for cid in lexicon.chip_ids
                 if (total := lexicon.chip_judgment_total(cid)) != judgments_per_chip}
    if offenders:
        raise IntegrityError(
            f"each chip needs exactly {judgments_per_chip} judgments; "
            f"offending chips: {offenders}")
    return lexicon


@dataclass(frozen=True)
class TermSet:
    """Retained color terms, ordered by descending count then alphabetically."""

    terms: tuple[str, ...]
    counts: Mapping[str, int]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in set(self.terms)


def filter_terms(lexicon: NamingLexicon, cutoff: int) -> TermSet:
    """Terms whose total lexicon count is >= cutoff."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    kept = [(term, count) for term, count in lexicon.term_vocabulary.items()
            if count >= cutoff]
    if not kept:
        raise NotFoundError(
            f"no term reaches the cutoff {cutoff}; lower the cutoff "
            f"(max observed count: {max(lexicon.term_vocabulary.values(), default=0)})")
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    return TermSet(tuple(t for t, _ in kept), {t: c for t, c in kept})


def term_centroid_lab(lexicon: NamingLexicon, chips: ChipTable, term: str,
                      dedupe_chips: bool = False) -> LabColor:
    """Mean Lab coordinate of the chips named with the term.

    Each judgment contributes one sample; with dedupe_chips each distinct chip
    counts once regardless of how many subjects used the term on it.
    """
    total = np.zeros(3)
    weight = 0
    for chip_id, counts in lexicon.judgments.items():
        count = counts.get(term, 0)
        if count == 0:
            continue
        w = 1 if dedupe_chips else count
        total += w * chips.by_id(chip_id).lab.as_array()
        weight += w
    if weight == 0:
        raise NotFoundError(f"term {term!r} does not occur in the lexicon")
    mean = total / weight
    return LabColor(float(mean[0]), float(mean[1]), float(mean[2]))


def chip_centroid_embedding(lexicon: NamingLexicon, chip_id: int,
                            embeddings, terms) -> np.ndarray:
    """Embedding centroid of a chip: judgment-count-weighted mean over the
    retained terms used to label it, weights renormalized over retained terms.

    Raises ChipExcluded when none of the chip's judgments use a retained term.
    """
    counts = lexicon._chip_counts(chip_id)
    retained = [(term, counts[term]) for term in terms if counts.get(term, 0) > 0]
    if not retained:
        raise ChipExcluded(chip_id)
    total = sum(c for _, c in retained)
    vec = np.zeros(embeddings.dim)
    for term, count in retained:
        try:
            vec += (count / total) * embeddings.vectors[term]
        except KeyError:
            raise NotFoundError(
                f"term {term!r} has no embedding in {embeddings.model_id}") from None
    return vec


def modal_term(lexicon: NamingLexicon, chip_id: int) -> str:
    """Most frequent term among the chip's judgments; ties break alphabetically."""
    counts = lexicon._chip_counts(chip_id)
    if not counts:
        raise NotFoundError(f"chip {chip_id} has no judgments")
    best = max(counts.values())
    return min(t for t, c in counts.items() if c == best)


@dataclass(frozen=True)
class NamingProbabilities:
    """Row-stochastic P(term|chip) and column-inverted P(chip|term) under a
    uniform chip prior."""

    chip_ids: tuple[int, ...]
    terms: tuple[str, ...]
    term_given_chip: np.ndarray  # (n_chips, n_terms), rows sum to 1
    chip_given_term: np.ndarray  # (n_chips, n_terms), columns sum to 1


def naming_probabilities(lexicon: NamingLexicon) -> NamingProbabilities:
    chip_ids = lexicon.chip_ids
    terms = tuple(sorted(lexicon.term_vocabulary))
    t_index = {t: i for i, t in enumerate(terms)}
    counts = np.zeros((len(chip_ids), len(terms)))
    for row, cid in enumerate(chip_ids):
        for term, count in lexicon.judgments[cid].items():
            counts[row, t_index[term]] = count
    p_w_c = counts / counts.sum(axis=1, keepdims=True)
    # uniform P(c) cancels in the Bayes inversion
    p_c_w = p_w_c / p_w_c.sum(axis=0, keepdims=True)
    return NamingProbabilities(chip_ids, terms, p_w_c, p_c_w)


def surprisal(lexicon: NamingLexicon, chip_id: int) -> float:
    """Expected optimal-listener cost (bits) of identifying the chip:
    S(c) = sum_w P(w|c) * log2(1 / P(c|w)), uniform prior over chips."""
    counts = lexicon._chip_counts(chip_id)
    total_c = sum(counts.values())
    s = 0.0
    for term, count in counts.items():
        p_w_c = count / total_c
        denom = sum(cc.get(term, 0) / sum(cc.values())
                    for cc in lexicon.judgments.values())
        p_c_w = p_w_c / denom
        s -= p_w_c * math.log2(p_c_w)
    return max(s, 0.0)


def surprisal_all(lexicon: NamingLexicon) -> dict[int, float]:
    """Surprisal for every chip, via one pass over the probability matrices."""
    probs = naming_probabilities(lexicon)
    with np.errstate(divide="ignore", invalid="ignore"):
        info = -np.log2(probs.chip_given_term)
    info = np.where(probs.term_given_chip > 0, info, 0.0)
    values = (probs.term_given_chip * info).sum(axis=1)
    return {cid: max(float(v), 0.0) for cid, v in zip(probs.chip_ids, values)}
