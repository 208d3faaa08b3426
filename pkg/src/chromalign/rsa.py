"""Representational similarity analysis: RSM construction for both spaces,
Kendall's tau-b alignment with a seeded permutation test, per-term tau,
shuffled-centroid controls, and cross-model RSM comparison."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from chromalign import _kernels
from chromalign.cielab import (DEFAULT_C_SCALE, DEFAULT_CMC_RATIOS, ChipTable,
                               delta_e_cmc, similarity_kernel)
from chromalign.embeddings import EmbeddingSet
from chromalign.errors import (AlignmentError, IntegrityError,
                               UndefinedStatisticError)
from chromalign.lexicon import NamingLexicon, term_centroid_lab

_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class Rsm:
    """N x N similarity matrix over labelled conditions."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise IntegrityError("RSM labels must be unique")
        if self.matrix.shape != (n, n):
            raise IntegrityError(
                f"matrix shape {self.matrix.shape} does not match {n} labels")
        if not np.all(np.isfinite(self.matrix)):
            raise IntegrityError("RSM contains non-finite entries")
        if np.abs(self.matrix - self.matrix.T).max() > _SYMMETRY_TOL:
            raise IntegrityError("RSM must be symmetric within 1e-9")
        diag = np.diag(self.matrix)
        if np.any(self.matrix.max(axis=1) > diag + 1e-12):
            raise IntegrityError("diagonal must hold each row's maximum")

    def __len__(self) -> int:
        return len(self.labels)

    def upper_triangle(self) -> np.ndarray:
        iu = np.triu_indices(len(self.labels), k=1)
        return self.matrix[iu]

    def reordered(self, labels: Sequence[str]) -> "Rsm":
        """Same RSM with rows/columns permuted into the given label order."""
        if set(labels) != set(self.labels):
            raise AlignmentError("label sets differ")
        idx = [self.labels.index(lab) for lab in labels]
        return Rsm(tuple(labels), self.matrix[np.ix_(idx, idx)])


def rsm_to_csv(rsm: Rsm, path: str | Path) -> None:
    """CSV with a header row of labels; values at full repr precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(rsm.labels)
        for row in rsm.matrix:
            writer.writerow([repr(float(v)) for v in row])


def rsm_from_csv(path: str | Path) -> Rsm:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        labels = tuple(next(reader))
        matrix = np.array([[float(v) for v in row] for row in reader])
    return Rsm(labels, matrix)


def build_embedding_rsm(embeddings: EmbeddingSet, terms) -> Rsm:
    """Pairwise Pearson similarities between term vectors; diagonal 1."""
    term_list = list(terms)
    vectors = embeddings.matrix(term_list)
    sd = vectors.std(axis=1)
    constant = [t for t, s in zip(term_list, sd) if s == 0]
    if constant:
        raise UndefinedStatisticError(
            f"constant embedding vectors have no defined correlation: {constant}")
    matrix = np.clip(np.corrcoef(vectors), -1.0, 1.0)
    matrix = (matrix + matrix.T) / 2.0   # BLAS products are not bit-symmetric
    np.fill_diagonal(matrix, 1.0)
    return Rsm(tuple(term_list), matrix)


def build_cielab_rsm(lexicon: NamingLexicon, chips: ChipTable, terms,
                     c_scale: float = DEFAULT_C_SCALE,
                     cmc_ratios: tuple[float, float] = DEFAULT_CMC_RATIOS,
                     dedupe_chips: bool = False) -> Rsm:
    """Kernel similarities of term centroids in CIELAB.

    The CMC difference is asymmetric, so the distance is symmetrized as the
    mean of both directions before entering the kernel. dedupe_chips weights
    each distinct chip once in the centroids instead of per judgment.
    """
    term_list = list(terms)
    centroids = [term_centroid_lab(lexicon, chips, t, dedupe_chips=dedupe_chips)
                 for t in term_list]
    n = len(term_list)
    matrix = np.ones((n, n))
    l_ratio, c_ratio = cmc_ratios
    for i in range(n):
        for j in range(i + 1, n):
            dist = 0.5 * (delta_e_cmc(centroids[i], centroids[j], l_ratio, c_ratio)
                          + delta_e_cmc(centroids[j], centroids[i], l_ratio, c_ratio))
            matrix[i, j] = matrix[j, i] = similarity_kernel(dist, c_scale)
    return Rsm(tuple(term_list), matrix)


def _pair_stats(x: np.ndarray, y: np.ndarray) -> tuple[int, int, int, int]:
    s, tx, ty = _kernels.kendall_stats(x, y)
    m = x.size
    n0 = m * (m - 1) // 2
    return s, tx, ty, n0


def tau_b(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall's tau-b between two paired sequences."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AlignmentError(f"paired sequences required, got {x.shape} vs {y.shape}")
    s, tx, ty, n0 = _pair_stats(x, y)
    denom = math.sqrt(float((n0 - tx)) * float((n0 - ty)))
    if denom == 0.0:
        raise UndefinedStatisticError("tau undefined: one sequence is fully tied")
    return s / denom


def _tie_group_sizes(values: np.ndarray) -> np.ndarray:
    _, counts = np.unique(values, return_counts=True)
    return counts[counts > 1]


def _normal_p_value(s: int, x: np.ndarray, y: np.ndarray) -> float:
    """Two-sided normal approximation with the standard tie correction."""
    m = x.size
    tg = _tie_group_sizes(x).astype(float)
    ug = _tie_group_sizes(y).astype(float)
    v0 = m * (m - 1) * (2 * m + 5)
    vt = float((tg * (tg - 1) * (2 * tg + 5)).sum())
    vu = float((ug * (ug - 1) * (2 * ug + 5)).sum())
    v1 = float((tg * (tg - 1)).sum()) * float((ug * (ug - 1)).sum()) / (2.0 * m * (m - 1))
    v2 = 0.0
    if m > 2:
        v2 = (float((tg * (tg - 1) * (tg - 2)).sum())
              * float((ug * (ug - 1) * (ug - 2)).sum())
              / (9.0 * m * (m - 1) * (m - 2)))
    var_s = (v0 - vt - vu) / 18.0 + v1 + v2
    if var_s <= 0.0:
        return 1.0
    z = s / math.sqrt(var_s)
    return math.erfc(abs(z) / math.sqrt(2.0))


def _replicate_permutations(n: int, seed: int, count: int) -> np.ndarray:
    """Permutation per replicate, seeded from (master seed, replicate index)
    so results are schedule-independent."""
    perms = np.empty((count, n), dtype=np.int64)
    for i in range(count):
        perms[i] = np.random.default_rng([seed, i]).permutation(n)
    return perms


def _check_aligned(rsm_a: Rsm, rsm_b: Rsm) -> None:
    if rsm_a.labels != rsm_b.labels:
        raise AlignmentError(
            f"RSM labels differ: {rsm_a.labels[:3]}... vs {rsm_b.labels[:3]}...")


@dataclass(frozen=True)
class TauResult:
    tau: float
    p_value: float      # two-sided, seeded Monte-Carlo permutation test
    p_normal: float     # tie-corrected normal approximation, for reference
    n_permutations: int


def kendall_tau(rsm_a: Rsm, rsm_b: Rsm, n_permutations: int = 10_000,
                seed: int = 0) -> TauResult:
    """Kendall's tau-b over the strict upper triangles of two aligned RSMs.

    The p-value permutes the labels of rsm_b (rows and columns together) and
    counts permuted |tau| >= observed |tau|, with the +1 correction.
    """
    _check_aligned(rsm_a, rsm_b)
    n = len(rsm_a)
    iu_rows, iu_cols = np.triu_indices(n, k=1)
    a_tri = rsm_a.matrix[iu_rows, iu_cols]
    b_tri = rsm_b.matrix[iu_rows, iu_cols]
    s, tx, ty, n0 = _pair_stats(a_tri, b_tri)
    denom = math.sqrt(float(n0 - tx) * float(n0 - ty))
    if denom == 0.0:
        raise UndefinedStatisticError("tau undefined: an RSM triangle is fully tied")
    tau = s / denom
    p_normal = _normal_p_value(s, a_tri, b_tri)

    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    perms = _replicate_permutations(n, seed, n_permutations)
    # relabeling preserves the off-diagonal value multiset, so the tie
    # corrections (and hence the denominator) are permutation-invariant
    sign_a = np.sign(a_tri[:, None] - a_tri[None, :]).astype(np.int8)
    s_perm = _kernels.perm_concordance(rsm_b.matrix, perms, iu_rows, iu_cols, sign_a)
    tau_perm = s_perm / denom
    exceed = int((np.abs(tau_perm) >= abs(tau) - 1e-12).sum())
    p_value = (1 + exceed) / (1 + n_permutations)
    return TauResult(tau, p_value, p_normal, n_permutations)


def per_term_tau(rsm_a: Rsm, rsm_b: Rsm) -> dict[str, float]:
    """tau-b between corresponding RSM rows, self-entry removed."""
    _check_aligned(rsm_a, rsm_b)
    n = len(rsm_a)
    result = {}
    for i, term in enumerate(rsm_a.labels):
        mask = np.arange(n) != i
        result[term] = tau_b(rsm_a.matrix[i, mask], rsm_b.matrix[i, mask])
    return result


@dataclass(frozen=True)
class ShuffleControl:
    baseline_tau: float
    taus: np.ndarray
    mean_tau: float


def shuffle_control(rsm_embedding: Rsm, lexicon: NamingLexicon, chips: ChipTable,
                    terms, seed: int, n_shuffles: int,
                    c_scale: float = DEFAULT_C_SCALE,
                    cmc_ratios: tuple[float, float] = DEFAULT_CMC_RATIOS,
                    dedupe_chips: bool = False) -> ShuffleControl:
    """tau after randomly re-assigning CIELAB centroids to terms.

    Permuting the term <-> centroid assignment equals relabeling the CIELAB
    RSM, so the base RSM is built once and its labels are permuted.
    """
    if n_shuffles < 1:
        raise ValueError("n_shuffles must be >= 1")
    rsm_lab = build_cielab_rsm(lexicon, chips, terms, c_scale, cmc_ratios,
                               dedupe_chips=dedupe_chips)
    _check_aligned(rsm_embedding, rsm_lab)
    n = len(rsm_lab)
    iu_rows, iu_cols = np.triu_indices(n, k=1)
    a_tri = rsm_embedding.matrix[iu_rows, iu_cols]
    b_tri = rsm_lab.matrix[iu_rows, iu_cols]
    s, tx, ty, n0 = _pair_stats(a_tri, b_tri)
    denom = math.sqrt(float(n0 - tx) * float(n0 - ty))
    if denom == 0.0:
        raise UndefinedStatisticError("tau undefined: an RSM triangle is fully tied")
    baseline = s / denom
    perms = _replicate_permutations(n, seed, n_shuffles)
    sign_a = np.sign(a_tri[:, None] - a_tri[None, :]).astype(np.int8)
    s_perm = _kernels.perm_concordance(rsm_lab.matrix, perms, iu_rows, iu_cols, sign_a)
    taus = s_perm / denom
    return ShuffleControl(baseline, taus, float(taus.mean()))


def cross_model_rsa(rsms: Sequence[Rsm]) -> np.ndarray:
    """Pairwise tau-b between upper-triangle flattenings of the RSMs.

    RSMs sharing a label set in a different order are reordered to the first
    RSM's order before comparison.
    """
    if not rsms:
        raise ValueError("need at least one RSM")
    reference = rsms[0]
    aligned = [reference]
    for rsm in rsms[1:]:
        aligned.append(rsm if rsm.labels == reference.labels
                       else rsm.reordered(reference.labels))
    triangles = [rsm.upper_triangle() for rsm in aligned]
    k = len(aligned)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = tau_b(triangles[i], triangles[j])
    return out
