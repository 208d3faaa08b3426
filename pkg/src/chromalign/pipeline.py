"""Pipeline orchestration: resolved run configuration, the RSA and linear-
mapping pipelines, and report assembly.

Reports are plain dicts serialized with sorted keys and no timestamps, so a
rerun with the same config and seed is byte-identical. Every report embeds
the resolved configuration and sha256 checksums of the input files.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from chromalign import cielab, linmap, rsa
from chromalign.cielab import (DEFAULT_C_SCALE, DEFAULT_CMC_RATIOS,
                               DEFAULT_WARM_HUE_RANGES, Temperature,
                               classify_temperature, load_chip_table)
from chromalign.corpus import spearman
from chromalign.embeddings import (EmbeddingSet, load_embedding_directory,
                                   load_embeddings)
from chromalign.errors import ConfigurationError
from chromalign.lexicon import (filter_terms, load_lexicon, modal_term,
                                surprisal_all, term_centroid_lab)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Resolved run parameters. Defaults follow the reference analysis:
    cutoff 100, kernel scale 0.001, 6 folds, 10 controls."""

    chip_table: Path
    lexicon: Path
    embeddings: tuple[Path, ...]
    cutoff: int = 100
    c_scale: float = DEFAULT_C_SCALE
    cmc_ratios: tuple[float, float] = DEFAULT_CMC_RATIOS
    folds: int = linmap.DEFAULT_FOLDS
    controls: int = linmap.DEFAULT_CONTROLS
    shuffles: int = 100
    n_permutations: int = 10_000
    seed: int | None = None
    alpha: float = 0.1
    alpha_grid: tuple[float, ...] = linmap.DEFAULT_ALPHA_GRID
    run_sweep: bool = True
    rank_metric: str = "pearson"
    warm_hue_ranges: tuple[tuple[float, float], ...] = DEFAULT_WARM_HUE_RANGES
    dedupe_chips: bool = False

    def as_dict(self) -> dict:
        return {
            "chip_table": str(self.chip_table),
            "lexicon": str(self.lexicon),
            "embeddings": [str(p) for p in self.embeddings],
            "cutoff": self.cutoff,
            "c_scale": self.c_scale,
            "cmc_ratios": list(self.cmc_ratios),
            "folds": self.folds,
            "controls": self.controls,
            "shuffles": self.shuffles,
            "n_permutations": self.n_permutations,
            "seed": self.seed,
            "alpha": self.alpha,
            "alpha_grid": [float(a) for a in self.alpha_grid],
            "run_sweep": self.run_sweep,
            "rank_metric": self.rank_metric,
            "warm_hue_ranges": [list(r) for r in self.warm_hue_ranges],
            "dedupe_chips": self.dedupe_chips,
        }


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def input_checksums(config: RunConfig) -> dict:
    sums = {
        "chip_table": sha256_file(config.chip_table),
        "lexicon": sha256_file(config.lexicon),
        "embeddings": {},
    }
    for source in config.embeddings:
        source = Path(source)
        if source.is_dir():
            sums["embeddings"][str(source)] = {
                f.name: sha256_file(f) for f in sorted(source.iterdir()) if f.is_file()
            }
        else:
            sums["embeddings"][str(source)] = sha256_file(source)
    return sums


def load_embedding_source(path: Path) -> list[EmbeddingSet]:
    """A source is either one .vec file (static, layer 0) or a layered
    directory with a manifest."""
    path = Path(path)
    if path.is_dir():
        return load_embedding_directory(path)
    return [load_embeddings(path, model_id=path.stem)]


def _py(value):
    """Recursively convert numpy containers/scalars for json serialization."""
    if isinstance(value, np.ndarray):
        return [_py(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _py(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_py(v) for v in value]
    return value


def write_report(report: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_py(report), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _model_key(embedding: EmbeddingSet) -> str:
    return f"{embedding.model_id}-{embedding.config.value.lower()}"


def run_rsa_pipeline(config: RunConfig) -> dict:
    """Per (model, config, layer): tau, permutation p, per-term tau; layer
    aggregates; shuffled-centroid control at each source's best layer; the
    cross-model tau matrix over best-layer RSMs plus CIELAB."""
    if config.shuffles > 0 and config.seed is None:
        raise ConfigurationError("a seed is required when shuffle controls run")
    seed = config.seed if config.seed is not None else 0

    chips = load_chip_table(config.chip_table)
    lexicon = load_lexicon(config.lexicon)
    terms = filter_terms(lexicon, config.cutoff)
    rsm_lab = rsa.build_cielab_rsm(lexicon, chips, terms,
                                   c_scale=config.c_scale, cmc_ratios=config.cmc_ratios,
                                   dedupe_chips=config.dedupe_chips)
    term_temperature = {
        term: classify_temperature(
            term_centroid_lab(lexicon, chips, term,
                              dedupe_chips=config.dedupe_chips),
            config.warm_hue_ranges).value
        for term in terms
    }

    model_reports = []
    best_rsms: list[tuple[str, rsa.Rsm]] = []
    for source in config.embeddings:
        layer_sets = load_embedding_source(Path(source))
        layer_rows = []
        layer_rsms = []
        for es in layer_sets:
            rsm_emb = rsa.build_embedding_rsm(es, terms)
            layer_rsms.append(rsm_emb)
            result = rsa.kendall_tau(rsm_emb, rsm_lab,
                                     n_permutations=config.n_permutations, seed=seed)
            layer_rows.append({
                "layer": es.layer,
                "tau": result.tau,
                "p_value": result.p_value,
                "p_normal": result.p_normal,
                "per_term_tau": rsa.per_term_tau(rsm_emb, rsm_lab),
            })
        taus = np.array([row["tau"] for row in layer_rows])
        best_idx = int(taus.argmax())
        best_per_term = layer_rows[best_idx]["per_term_tau"]
        warm = [best_per_term[t] for t, temp in term_temperature.items()
                if temp == Temperature.WARM.value]
        cool = [best_per_term[t] for t, temp in term_temperature.items()
                if temp == Temperature.COOL.value]
        entry = {
            "model": layer_sets[0].model_id,
            "config": layer_sets[0].config.value,
            "source": str(source),
            "layers": layer_rows,
            "max_tau": float(taus.max()),
            "max_tau_layer": layer_rows[best_idx]["layer"],
            "mean_tau": float(taus.mean()),
            "std_tau": float(taus.std()),
            "temperature_split": {
                "warm_mean_tau": float(np.mean(warm)) if warm else None,
                "cool_mean_tau": float(np.mean(cool)) if cool else None,
            },
        }
        if config.shuffles > 0:
            control = rsa.shuffle_control(layer_rsms[best_idx], lexicon, chips, terms,
                                          seed=seed, n_shuffles=config.shuffles,
                                          c_scale=config.c_scale,
                                          cmc_ratios=config.cmc_ratios,
                                          dedupe_chips=config.dedupe_chips)
            entry["shuffle_control"] = {
                "n_shuffles": config.shuffles,
                "baseline_tau": control.baseline_tau,
                "mean_tau": control.mean_tau,
                "max_abs_tau": float(np.abs(control.taus).max()),
            }
        model_reports.append(entry)
        best_rsms.append((_model_key(layer_sets[0]), layer_rsms[best_idx]))

    cross_labels = ["cielab"] + [name for name, _ in best_rsms]
    cross_matrix = rsa.cross_model_rsa([rsm_lab] + [r for _, r in best_rsms])
    return {
        "kind": "rsa",
        "config": config.as_dict(),
        "inputs": input_checksums(config),
        "terms": list(terms),
        "term_temperature": term_temperature,
        "models": model_reports,
        "cross_model": {"labels": cross_labels, "matrix": cross_matrix},
    }


def _subset_ev(dataset: linmap.ProbeDataset, predictions: np.ndarray,
               mask: np.ndarray) -> float | None:
    if mask.sum() < 2:
        return None
    return linmap.explained_variance(dataset.Y[mask], predictions[mask])


def run_linmap_pipeline(config: RunConfig) -> dict:
    """Per (model, config, layer): EV, selectivity, nuclear norm, per-chip
    ranks; warm/cool EV split; Spearman of rank vs surprisal; subspace curve;
    optional complexity sweep."""
    if config.seed is None:
        raise ConfigurationError("a seed is required for the linear-mapping pipeline")
    if config.run_sweep and not config.alpha_grid:
        raise ConfigurationError("alpha grid is empty")

    chips = load_chip_table(config.chip_table)
    lexicon = load_lexicon(config.lexicon)
    terms = filter_terms(lexicon, config.cutoff)
    chip_surprisal = surprisal_all(lexicon)
    temperature = {
        chip.chip_id: classify_temperature(chip.lab, config.warm_hue_ranges)
        for chip in chips
    }

    model_reports = []
    for source in config.embeddings:
        layer_sets = load_embedding_source(Path(source))
        layer_rows = []
        for es in layer_sets:
            dataset = linmap.build_probe_dataset(lexicon, chips, es, terms)
            probe = linmap.run_probe(dataset, chips, config.alpha,
                                     folds=config.folds, n_controls=config.controls,
                                     seed=config.seed, rank_metric=config.rank_metric)
            warm_mask = np.array([temperature[c] is Temperature.WARM
                                  for c in dataset.chip_ids])
            ranks = np.array([probe.chip_ranks[c] for c in dataset.chip_ids])
            surp = np.array([chip_surprisal[c] for c in dataset.chip_ids])
            rho, rho_p = spearman(ranks, surp, seed=config.seed)
            subspace = linmap.subspace_analysis(probe.weights, dataset)
            row = {
                "layer": es.layer,
                "n_chips": dataset.n,
                "excluded_chips": sorted(set(c.chip_id for c in chips)
                                         - set(dataset.chip_ids)),
                "explained_variance": probe.explained_variance,
                "per_fold_ev": list(probe.per_fold_ev),
                "selectivity": probe.selectivity,
                "ev_controls": list(probe.ev_controls),
                "nuclear_norm": probe.nuclear_norm,
                "chip_ranks": {str(c): r for c, r in sorted(probe.chip_ranks.items())},
                "rank_fallback_chips": list(probe.rank_fallback_chips),
                "warm_mean_ev": _subset_ev(dataset, probe.predictions, warm_mask),
                "cool_mean_ev": _subset_ev(dataset, probe.predictions, ~warm_mask),
                "rank_surprisal_spearman": {"rho": rho, "p_value": rho_p},
                "subspace": {
                    "weight_fraction": 0.95,
                    "k": subspace.k,
                    "ev_at_k": subspace.ev_at_k,
                    "curve": [list(point) for point in subspace.curve],
                },
            }
            if config.run_sweep:
                sweep = linmap.complexity_sweep(dataset, config.alpha_grid,
                                                folds=config.folds,
                                                n_controls=config.controls,
                                                seed=config.seed)
                row["complexity_sweep"] = {
                    "norm_monotone": sweep.norm_monotone,
                    "points": [
                        {"alpha": p.alpha, "nuclear_norm": p.nuclear_norm,
                         "ev_real": p.ev_real, "ev_control": p.ev_control}
                        for p in sweep.points
                    ],
                }
            layer_rows.append(row)
        sel = np.array([row["selectivity"] for row in layer_rows])
        model_reports.append({
            "model": layer_sets[0].model_id,
            "config": layer_sets[0].config.value,
            "source": str(source),
            "layers": layer_rows,
            "max_selectivity": float(sel.max()),
            "mean_selectivity": float(sel.mean()),
            "std_selectivity": float(sel.std()),
        })

    return {
        "kind": "linmap",
        "config": config.as_dict(),
        "inputs": input_checksums(config),
        "terms": list(terms),
        "models": model_reports,
    }


def write_rank_chart_csv(report_row: dict, chips: cielab.ChipTable,
                         lexicon, path: Path) -> None:
    """Chart data for the per-chip ranking figure:
    chip_id, value_row, hue_column, rank, modal_term."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("chip_id,value_row,hue_column,rank,modal_term\n")
        for cid_str, rank in report_row["chip_ranks"].items():
            cid = int(cid_str)
            chip = chips.by_id(cid)
            fh.write(f"{cid},{chip.value_row},{chip.hue_column},"
                     f"{repr(float(rank))},{modal_term(lexicon, cid)}\n")
