"""Term-embedding ingestion and elementary vector geometry.

File format mirrors the common word-vector text layout: a ``N D`` header line
followed by N lines ``term v1 ... vD``. Layered LM embeddings live in a
directory of ``layerNN.vec`` files plus a key=value manifest.
"""

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from chromalign.errors import (AlignmentError, IntegrityError, NotFoundError,
                               ParseError, UndefinedStatisticError)

MANIFEST_NAME = "manifest.txt"


class ExtractionConfig(Enum):
    NC = "NC"          # term encoded without context
    RC = "RC"          # random sampled contexts, mean pooled
    CC = "CC"          # controlled template contexts, mean pooled
    STATIC = "STATIC"  # type-level vectors (fastText, PMI)


@dataclass(frozen=True)
class EmbeddingSet:
    """Per-model, per-layer, per-configuration term vectors."""

    model_id: str
    config: ExtractionConfig
    layer: int
    dim: int
    vectors: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.layer < 0:
            raise ValueError(f"layer must be >= 0, got {self.layer}")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        for term, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise IntegrityError(
                    f"vector for {term!r} has dim {vec.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise IntegrityError(f"vector for {term!r} has non-finite entries")

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(self.vectors)

    def matrix(self, terms: Sequence[str]) -> np.ndarray:
        """(len(terms), dim) matrix in the given term order."""
        missing = [t for t in terms if t not in self.vectors]
        if missing:
            raise NotFoundError(f"terms missing from {self.model_id}: {missing}")
        return np.stack([self.vectors[t] for t in terms])


def load_embeddings(path: str | Path, model_id: str = "static",
                    config: ExtractionConfig = ExtractionConfig.STATIC,
                    layer: int = 0) -> EmbeddingSet:
    """Read one embedding text file."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("header must be 'N D'", 1)
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ParseError(f"bad header {header!r}", 1) from exc
        vectors: dict[str, np.ndarray] = {}
        for line_no, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ")
            term = fields[0]
            if len(fields) - 1 != dim:
                raise ParseError(
                    f"term {term!r} has {len(fields) - 1} values, expected {dim}", line_no)
            try:
                vec = np.array([float(v) for v in fields[1:]])
            except ValueError as exc:
                raise ParseError(f"term {term!r}: {exc}", line_no) from exc
            if not np.all(np.isfinite(vec)):
                raise IntegrityError(f"term {term!r} has non-finite values (line {line_no})")
            if term in vectors:
                raise IntegrityError(f"duplicate term {term!r} (line {line_no})")
            vectors[term] = vec
    if len(vectors) != count:
        raise IntegrityError(f"header declares {count} terms, file has {len(vectors)}")
    return EmbeddingSet(model_id, config, layer, dim, vectors)


def save_embeddings(embeddings: EmbeddingSet, path: str | Path) -> None:
    """Write the text format; floats use repr so round-trips are bit-exact."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(embeddings.vectors)} {embeddings.dim}\n")
        for term, vec in embeddings.vectors.items():
            fh.write(term + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def _parse_manifest(path: Path) -> dict[str, str]:
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"manifest line must be key=value, got {line!r}", line_no)
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


def load_embedding_directory(path: str | Path) -> list[EmbeddingSet]:
    """Read a layered embedding directory (manifest + layerNN.vec files)."""
    path = Path(path)
    manifest = path / MANIFEST_NAME
    if not manifest.exists():
        raise NotFoundError(f"no {MANIFEST_NAME} in {path}")
    entries = _parse_manifest(manifest)
    for key in ("model", "config", "layers"):
        if key not in entries:
            raise IntegrityError(f"manifest {manifest} missing key {key!r}")
    try:
        config = ExtractionConfig(entries["config"].upper())
    except ValueError:
        raise IntegrityError(
            f"manifest config must be NC|RC|CC|STATIC, got {entries['config']!r}") from None
    n_layers = int(entries["layers"])
    sets = []
    for layer in range(n_layers):
        vec_path = path / f"layer{layer:02d}.vec"
        if not vec_path.exists():
            raise NotFoundError(
                f"manifest {manifest} declares {n_layers} layers but {vec_path.name} is missing")
        sets.append(load_embeddings(vec_path, model_id=entries["model"],
                                    config=config, layer=layer))
    return sets


def write_embedding_directory(sets: Sequence[EmbeddingSet], path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if not sets:
        raise ValueError("no embedding sets to write")
    with open(path / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        fh.write(f"model={sets[0].model_id}\n")
        fh.write(f"config={sets[0].config.value}\n")
        fh.write(f"layers={len(sets)}\n")
    for es in sorted(sets, key=lambda e: e.layer):
        save_embeddings(es, path / f"layer{es.layer:02d}.vec")


def pearson_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """Sample Pearson correlation of two coordinate sequences."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise AlignmentError(f"length mismatch: {u.shape} vs {v.shape}")
    if u.size < 2:
        raise AlignmentError("vectors must have length >= 2")
    uc = u - u.mean()
    vc = v - v.mean()
    nu = math.sqrt(float(uc @ uc))
    nv = math.sqrt(float(vc @ vc))
    if nu == 0.0 or nv == 0.0:
        raise UndefinedStatisticError("correlation undefined for a constant vector")
    return float(np.clip((uc @ vc) / (nu * nv), -1.0, 1.0))
