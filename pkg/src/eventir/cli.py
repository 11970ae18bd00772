"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
invariant violation.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click
import yaml

from eventir.config import PipelineConfig, load_config
from eventir.corpus import Query, load_ground_truth, load_queries
from eventir.errors import ConfigError, DataError, InvariantViolation
from eventir.evaluation import evaluate_run, load_run, save_report, save_run
from eventir.persist import save_entity_index, save_index
from eventir.pipeline import (
    ENTITY_INDEX_FILE,
    LEXICAL_INDEX_FILE,
    RetrievalSystem,
)
from eventir.synthetic import generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3

config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
    help="Pipeline config (YAML).",
)


def _config(path: Path | None) -> PipelineConfig:
    if path is None:
        raise click.UsageError("--config is required")
    return load_config(path)


def _find_query(config: PipelineConfig, query_id: str | None, text: str | None) -> Query:
    if text is not None:
        return Query(query_id or "adhoc", text)
    if query_id is None:
        raise click.UsageError("give --query-id or --text")
    if config.queries is None:
        raise ConfigError("config does not set queries")
    for q in load_queries(config.queries, config.entities):
        if q.id == query_id:
            return q
    raise DataError(f"query {query_id!r} not found in {config.queries}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress and warnings.")
def cli(verbose: bool):
    """Entity-guided two-stage event image retrieval."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@cli.command()
@config_option
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              help="Directory for index files (default: index_dir from config).")
def index(config_path, out_dir):
    """Build and persist the lexical and entity indexes."""
    config = _config(config_path)
    out_dir = out_dir or config.index_dir
    if out_dir is None:
        raise click.UsageError("no --out given and config has no index_dir")
    config.index_dir = None  # always rebuild here
    system = RetrievalSystem.from_config(config, need_slots=False)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_index(system.index, out_dir / LEXICAL_INDEX_FILE)
    save_entity_index(system.entity_index, out_dir / ENTITY_INDEX_FILE)
    click.echo(f"indexed {system.index.doc_count} articles, {len(system.index.postings)} terms, "
               f"{len(system.entity_index.postings)} entities -> {out_dir}")


@cli.command()
@config_option
@click.option("--query-id", help="Query id from the configured query file.")
@click.option("--text", help="Ad-hoc query text instead of --query-id.")
@click.option("--json", "as_json", is_flag=True, help="Emit all three stage-one rankings as JSON.")
def search(config_path, query_id, text, as_json):
    """Run stage one only and print the fused article ranking."""
    config = _config(config_path)
    query = _find_query(config, query_id, text)
    system = RetrievalSystem.from_config(config, need_slots=False)
    ent, lex, fused = system.stage_one(query)
    if as_json:
        click.echo(json.dumps({"entity_branch": list(ent), "bm25_branch": list(lex),
                               "fused_articles": list(fused)}, indent=2))
        return
    for rank, (aid, score) in enumerate(fused, start=1):
        click.echo(f"{rank}\t{aid}\t{score:.6f}\t{system.corpus.articles[aid].title}")


@cli.command()
@config_option
@click.option("--queries", "queries_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Query file (default: queries from config).")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Run file to write.")
@click.option("--trace", is_flag=True, help="Also write per-query traces to OUTPUT.trace.jsonl.")
@click.option("--workers", type=click.IntRange(min=1), help="Concurrent queries (default: config).")
def retrieve(config_path, queries_path, output, trace, workers):
    """Run the full pipeline over a query file and write a run file."""
    config = _config(config_path)
    queries_path = queries_path or config.queries
    if queries_path is None:
        raise click.UsageError("no --queries given and config has no queries")
    queries = load_queries(queries_path, config.entities)
    system = RetrievalSystem.from_config(config)
    run = system.retrieve_all(queries, workers or config.workers)
    save_run(((qid, ranking.ids) for qid, ranking in run), output)
    if trace:
        trace_path = output.with_name(output.name + ".trace.jsonl")
        with open(trace_path, "w", encoding="utf-8") as fh:
            for q in queries:
                _, t = system.retrieve(q, trace=True)
                fh.write(json.dumps(t.to_dict(), sort_keys=True) + "\n")
    click.echo(f"wrote {len(run)} rankings to {output}")


@cli.command()
@config_option
@click.option("--run", "run_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Ground-truth file (default: ground_truth from config).")
@click.option("--ks", default="1,5,10", show_default=True, help="Comma-separated recall cutoffs.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Write the full per-query report as JSON.")
def evaluate(config_path, run_path, truth_path, ks, report_path):
    """Score a run file against ground truth (mAP, mRR, Recall@K)."""
    if truth_path is None:
        truth_path = _config(config_path).ground_truth
        if truth_path is None:
            raise click.UsageError("no --truth given and config has no ground_truth")
    try:
        cutoffs = [int(k) for k in ks.split(",") if k.strip()]
    except ValueError:
        raise click.UsageError(f"--ks must be comma-separated integers, got {ks!r}") from None
    if not cutoffs or min(cutoffs) < 1:
        raise click.UsageError("--ks values must be >= 1")
    report = evaluate_run(load_run(run_path), load_ground_truth(truth_path), cutoffs)
    click.echo(report.summary())
    if report_path is not None:
        save_report(report, report_path)


@cli.command("gen-synthetic")
@config_option
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--articles", "n_articles", default=200, show_default=True, type=click.IntRange(min=1))
@click.option("--queries", "n_queries", default=50, show_default=True, type=click.IntRange(min=1))
@click.option("--dim", default=64, show_default=True, type=click.IntRange(min=2))
@click.option("--adversarial", is_flag=True, help="Distractors share the query GPE but not its PERSON.")
def gen_synthetic(config_path, out_dir, seed, n_articles, n_queries, dim, adversarial):
    """Write a synthetic corpus, embeddings, ground truth and config.

    --config, when given, is an extra location to write the generated
    pipeline config to (paths are rewritten relative to it).
    """
    try:
        paths = generate_synthetic(out_dir, seed=seed, n_articles=n_articles, n_queries=n_queries,
                                   dim=dim, adversarial=adversarial)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    except OSError as exc:
        raise DataError(f"cannot write to {out_dir}: {exc}") from None
    if config_path is not None and config_path.resolve() != paths.config.resolve():
        raw = yaml.safe_load(paths.config.read_text(encoding="utf-8"))
        base = config_path.resolve().parent

        def rel(p):
            return os.path.relpath((paths.root / p).resolve(), base)

        for key in ("articles", "images", "queries", "ground_truth", "gazetteer", "synonyms"):
            raw[key] = rel(raw[key])
        for slot in raw["slots"].values():
            slot["images"], slot["queries"] = rel(slot["images"]), rel(slot["queries"])
        config_path.write_text(yaml.safe_dump(raw, sort_keys=True), encoding="utf-8")
    click.echo(f"wrote synthetic corpus ({n_articles} articles, {n_queries} queries) to {out_dir}")


@cli.command()
@config_option
@click.option("--query-id", help="Query id from the configured query file.")
@click.option("--text", help="Ad-hoc query text (needs embeddings keyed by --query-id).")
@click.option("--trace", "full", is_flag=True, help="Include every intermediate ranking, not just the head.")
@click.option("--head", default=5, show_default=True, type=click.IntRange(min=1))
def inspect(config_path, query_id, text, full, head):
    """Print the QueryTrace for one query as JSON."""
    config = _config(config_path)
    query = _find_query(config, query_id, text)
    system = RetrievalSystem.from_config(config)
    _, t = system.retrieve(query, trace=True)
    d = t.to_dict()
    if not full:
        for key in ("entity_branch", "bm25_branch", "fused_articles", "final"):
            d[key] = d[key][:head]
        d["model_rankings"] = {k: v[:head] for k, v in d["model_rankings"].items()}
        d["candidates"] = len(d["candidates"])
    click.echo(json.dumps(d, indent=2))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="eventir", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_DATA
    except InvariantViolation as exc:
        click.echo(f"error: invariant violated: {exc}", err=True)
        return EXIT_INVARIANT
    except (DataError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
