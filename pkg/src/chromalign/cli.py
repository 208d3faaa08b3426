"""Command-line interface.

Exit codes: 0 success, 1 input error (bad files, labels, configuration),
2 numerical failure (non-convergence, undefined statistics).
"""

import csv
import json
import logging
import sys
from pathlib import Path

import click

from chromalign import corpus as corpus_mod
from chromalign import pipeline, rsa
from chromalign.cielab import load_chip_table
from chromalign.corpus import (conllu_term_stats, count_cooccurrences,
                               export_feature_table, pmi_collocation_entropy,
                               pmi_vector)
from chromalign.embeddings import EmbeddingSet, ExtractionConfig, save_embeddings
from chromalign.errors import ConfigurationError, InputError, NumericalError
from chromalign.lexicon import (filter_terms, load_lexicon, modal_term,
                                surprisal_all)
from chromalign.pipeline import RunConfig, write_rank_chart_csv, write_report
from chromalign.templates import (DEFAULT_OBJECTS, generate_controlled_contexts,
                                  write_contexts)

log = logging.getLogger(__name__)


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def _resolve_terms(lexicon_path: str | None, terms_file: str | None,
                   cutoff: int | None) -> list[str]:
    if terms_file:
        return [t.lower() for t in _read_lines(terms_file)]
    if lexicon_path:
        lexicon = load_lexicon(lexicon_path)
        if cutoff:
            return list(filter_terms(lexicon, cutoff))
        return sorted(lexicon.term_vocabulary)
    raise ConfigurationError("provide --terms-file or --lexicon")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def cli(verbose: bool):
    """Alignment analysis between color term embeddings and CIELAB."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True),
              help="Take all distinct terms from a lexicon file.")
@click.option("--terms-file", type=click.Path(exists=True),
              help="Plain list of terms, one per line.")
@click.option("--objects-file", type=click.Path(exists=True),
              help="Object nouns, one per line (default: built-in 18).")
@click.option("--out-dir", type=click.Path(), required=True)
def templates(lexicon_path, terms_file, objects_file, out_dir):
    """Generate controlled-context sentences and their index."""
    terms = _resolve_terms(lexicon_path, terms_file, cutoff=None)
    objects = _read_lines(objects_file) if objects_file else list(DEFAULT_OBJECTS)
    contexts = generate_controlled_contexts(terms, objects)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_contexts(contexts, out / "sentences.txt", out / "index.tsv")
    click.echo(f"wrote {len(contexts)} sentences "
               f"({len(contexts) // max(len(terms), 1)} per term) to {out}")


@cli.command()
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True), required=True)
@click.option("--chips", "chips_path", type=click.Path(exists=True),
              help="Chip table; adds chart position columns when given.")
@click.option("--out", "out_path", type=click.Path(), required=True)
def surprisal(lexicon_path, chips_path, out_path):
    """Per-chip listener surprisal (bits) with modal terms."""
    lexicon = load_lexicon(lexicon_path)
    values = surprisal_all(lexicon)
    chips = load_chip_table(chips_path) if chips_path else None
    with open(out_path, "w", encoding="utf-8") as fh:
        if chips is not None:
            fh.write("chip_id,value_row,hue_column,surprisal,modal_term\n")
            for cid in sorted(values):
                chip = chips.by_id(cid)
                fh.write(f"{cid},{chip.value_row},{chip.hue_column},"
                         f"{values[cid]!r},{modal_term(lexicon, cid)}\n")
        else:
            fh.write("chip_id,surprisal,modal_term\n")
            for cid in sorted(values):
                fh.write(f"{cid},{values[cid]!r},{modal_term(lexicon, cid)}\n")
    click.echo(f"wrote surprisal for {len(values)} chips to {out_path}")


def _common_config(chips, lexicon, embeddings, **overrides) -> RunConfig:
    return RunConfig(chip_table=Path(chips), lexicon=Path(lexicon),
                     embeddings=tuple(Path(e) for e in embeddings), **overrides)


@cli.command()
@click.option("--chips", type=click.Path(exists=True), required=True)
@click.option("--lexicon", type=click.Path(exists=True), required=True)
@click.option("--embeddings", type=click.Path(exists=True), multiple=True, required=True,
              help="One or more .vec files or layered embedding directories.")
@click.option("--cutoff", default=100, show_default=True)
@click.option("--c-scale", default=0.001, show_default=True)
@click.option("--cmc-l", default=2.0, show_default=True)
@click.option("--cmc-c", default=1.0, show_default=True)
@click.option("--shuffles", default=100, show_default=True)
@click.option("--permutations", default=10_000, show_default=True)
@click.option("--seed", type=int, default=None,
              help="Required when shuffle controls run (shuffles > 0).")
@click.option("--dedupe-chips", is_flag=True,
              help="Weight each distinct chip once in Lab centroids.")
@click.option("--export-rsms", is_flag=True, help="Also write every RSM as CSV.")
@click.option("--out-dir", type=click.Path(), required=True)
def rsa_cmd(chips, lexicon, embeddings, cutoff, c_scale, cmc_l, cmc_c, shuffles,
            permutations, seed, dedupe_chips, export_rsms, out_dir):
    """Representational similarity analysis of embeddings against CIELAB."""
    config = _common_config(chips, lexicon, embeddings, cutoff=cutoff,
                            c_scale=c_scale, cmc_ratios=(cmc_l, cmc_c),
                            shuffles=shuffles, n_permutations=permutations,
                            seed=seed, dedupe_chips=dedupe_chips)
    report = pipeline.run_rsa_pipeline(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "rsa_report.json")
    with open(out / "per_term_tau.csv", "w", encoding="utf-8") as fh:
        fh.write("model,config,layer,term,tau\n")
        for model in report["models"]:
            for row in model["layers"]:
                for term, tau in sorted(row["per_term_tau"].items()):
                    fh.write(f"{model['model']},{model['config']},{row['layer']},"
                             f"{term},{tau!r}\n")
    with open(out / "cross_model.csv", "w", encoding="utf-8") as fh:
        labels = report["cross_model"]["labels"]
        fh.write("," + ",".join(labels) + "\n")
        for label, row in zip(labels, report["cross_model"]["matrix"]):
            fh.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")
    if export_rsms:
        terms = filter_terms(load_lexicon(config.lexicon), config.cutoff)
        chips_table = load_chip_table(config.chip_table)
        lex = load_lexicon(config.lexicon)
        rsa.rsm_to_csv(rsa.build_cielab_rsm(lex, chips_table, terms,
                                            config.c_scale, config.cmc_ratios,
                                            dedupe_chips=config.dedupe_chips),
                       out / "rsm_cielab.csv")
        for source in config.embeddings:
            for es in pipeline.load_embedding_source(Path(source)):
                rsm = rsa.build_embedding_rsm(es, terms)
                name = f"rsm_{es.model_id}_{es.config.value.lower()}_layer{es.layer:02d}.csv"
                rsa.rsm_to_csv(rsm, out / name)
    for model in report["models"]:
        click.echo(f"{model['model']} ({model['config']}): "
                   f"max tau {model['max_tau']:.3f} @ layer {model['max_tau_layer']}, "
                   f"mean {model['mean_tau']:.3f} +/- {model['std_tau']:.3f}")
    click.echo(f"report written to {out / 'rsa_report.json'}")


@cli.command()
@click.option("--chips", type=click.Path(exists=True), required=True)
@click.option("--lexicon", type=click.Path(exists=True), required=True)
@click.option("--embeddings", type=click.Path(exists=True), multiple=True, required=True)
@click.option("--cutoff", default=100, show_default=True)
@click.option("--alpha", default=0.1, show_default=True,
              help="Penalty for the headline probe.")
@click.option("--alpha-grid", default=None,
              help="Comma-separated grid for the complexity sweep "
                   "(default: 13 log-spaced points 1e-4..1e3).")
@click.option("--folds", default=6, show_default=True)
@click.option("--controls", default=10, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--sweep/--no-sweep", default=True, show_default=True)
@click.option("--rank-metric", type=click.Choice(["pearson", "euclidean"]),
              default="pearson", show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def linmap_cmd(chips, lexicon, embeddings, cutoff, alpha, alpha_grid, folds,
               controls, seed, sweep, rank_metric, out_dir):
    """Lasso probe from embedding space to CIELAB with controls."""
    if alpha_grid is None:
        grid = RunConfig.__dataclass_fields__["alpha_grid"].default
    else:
        grid = tuple(float(a) for a in alpha_grid.split(",") if a.strip())
    config = _common_config(chips, lexicon, embeddings, cutoff=cutoff, alpha=alpha,
                            alpha_grid=grid, folds=folds, controls=controls,
                            seed=seed, run_sweep=sweep, rank_metric=rank_metric)
    report = pipeline.run_linmap_pipeline(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "linmap_report.json")
    chips_table = load_chip_table(config.chip_table)
    lex = load_lexicon(config.lexicon)
    for model in report["models"]:
        for row in model["layers"]:
            name = (f"ranks_{model['model']}_{model['config'].lower()}"
                    f"_layer{row['layer']:02d}.csv")
            write_rank_chart_csv(row, chips_table, lex, out / name)
        click.echo(f"{model['model']} ({model['config']}): "
                   f"max selectivity {model['max_selectivity']:.3f}, "
                   f"mean {model['mean_selectivity']:.3f} +/- {model['std_selectivity']:.3f}")
    click.echo(f"report written to {out / 'linmap_report.json'}")


@cli.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True,
              help="Pre-tokenized corpus, one sentence per line.")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True))
@click.option("--terms-file", type=click.Path(exists=True))
@click.option("--cutoff", default=100, show_default=True,
              help="Term cutoff when --lexicon is used.")
@click.option("--window", default=2, show_default=True)
@click.option("--vec-out", type=click.Path(), default=None,
              help="Also write dense PPMI vectors in the embedding format.")
@click.option("--out-dir", type=click.Path(), required=True)
def pmi(corpus_path, lexicon_path, terms_file, cutoff, window, vec_out, out_dir):
    """PPMI vectors and collocation entropies for the color terms."""
    terms = _resolve_terms(lexicon_path, terms_file, cutoff)
    with open(corpus_path, encoding="utf-8") as fh:
        counts = count_cooccurrences(fh, terms, window)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vectors = {}
    for term in terms:
        try:
            vectors[term] = pmi_vector(counts, term)
        except InputError:
            log.warning("term %r absent from the corpus; skipped", term)
    with open(out / "pmi_vectors.tsv", "w", encoding="utf-8") as fh:
        fh.write("term\tcontext\tppmi\n")
        for term in sorted(vectors):
            for ctx, value in sorted(vectors[term].items()):
                fh.write(f"{term}\t{ctx}\t{value!r}\n")
    with open(out / "pmi_entropy.csv", "w", encoding="utf-8") as fh:
        fh.write("term,pmi_col\n")
        for term in sorted(vectors):
            if vectors[term]:
                fh.write(f"{term},{pmi_collocation_entropy(vectors[term])!r}\n")
    if vec_out:
        context_vocab = sorted({ctx for vec in vectors.values() for ctx in vec})
        import numpy as np
        dense = {
            term: np.array([vectors[term].get(ctx, 0.0) for ctx in context_vocab])
            for term in sorted(vectors)
        }
        save_embeddings(EmbeddingSet(f"pmi-{window}", ExtractionConfig.STATIC, 0,
                                     len(context_vocab), dense), vec_out)
    click.echo(f"wrote PPMI statistics for {len(vectors)} terms to {out}")


@cli.command()
@click.option("--conllu", "conllu_path", type=click.Path(exists=True), required=True)
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True))
@click.option("--terms-file", type=click.Path(exists=True))
@click.option("--cutoff", default=100, show_default=True)
@click.option("--tolerant", is_flag=True, help="Skip malformed rows with a count.")
@click.option("--cop-attachment", type=click.Choice(["child", "self"]),
              default="child", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def stats(conllu_path, lexicon_path, terms_file, cutoff, tolerant,
          cop_attachment, out_path):
    """Dependency-corpus usage statistics per color term."""
    terms = _resolve_terms(lexicon_path, terms_file, cutoff)
    with open(conllu_path, encoding="utf-8") as fh:
        result = conllu_term_stats(fh, terms, tolerant=tolerant,
                                   cop_attachment=cop_attachment)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["term", "count", "log_freq", "pos_ent", "deprel_ent",
                         "head_ent", "adj_prop", "amod_prop", "cop_prop"])
        for term in sorted(result):
            st = result[term]
            writer.writerow([term, st.count] + [repr(v) for v in (
                st.log_freq, st.pos_ent, st.deprel_ent, st.head_ent,
                st.adj_prop, st.amod_prop, st.cop_prop)])
    click.echo(f"wrote statistics for {len(result)} terms to {out_path}")


@cli.command()
@click.option("--rsa-report", "rsa_reports", type=click.Path(exists=True),
              multiple=True, required=True)
@click.option("--stats", "stats_path", type=click.Path(exists=True), required=True)
@click.option("--pmi-entropy", "pmi_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
def report(rsa_reports, stats_path, pmi_path, out_path):
    """Assemble the predictor/response feature table for external
    mixed-effects modeling. Response: per-term tau at each model's best layer."""
    responses: dict[tuple[str, str], float] = {}
    for path in rsa_reports:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        for model in data["models"]:
            key = f"{model['model']}-{model['config'].lower()}"
            best = next(row for row in model["layers"]
                        if row["layer"] == model["max_tau_layer"])
            for term, tau in best["per_term_tau"].items():
                responses[(term, key)] = tau

    stats_by_term: dict[str, corpus_mod.TermCorpusStats] = {}
    with open(stats_path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        for row in reader:
            stats_by_term[row["term"]] = corpus_mod.TermCorpusStats(
                term=row["term"], count=int(row["count"]),
                log_freq=float(row["log_freq"]), pmi_col=None,
                pos_ent=float(row["pos_ent"]), deprel_ent=float(row["deprel_ent"]),
                head_ent=float(row["head_ent"]), adj_prop=float(row["adj_prop"]),
                amod_prop=float(row["amod_prop"]), cop_prop=float(row["cop_prop"]))
    if pmi_path:
        with open(pmi_path, encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                term = row["term"]
                if term in stats_by_term:
                    stats_by_term[term] = stats_by_term[term].with_pmi_col(
                        float(row["pmi_col"]))
    export_feature_table(stats_by_term, responses, out_path)
    click.echo(f"wrote {len(responses)} feature rows to {out_path}")


# click collapses trailing underscores, so register explicit names
cli.add_command(rsa_cmd, name="rsa")
cli.add_command(linmap_cmd, name="linmap")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InputError as exc:
        click.echo(f"input error: {exc}", err=True)
        return 1
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"input error: {exc}", err=True)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
