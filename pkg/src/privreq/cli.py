"""Command-line entry point wiring the pipeline end to end.

Exit codes: 0 success, 1 domain error, 2 usage error. Domain errors are
printed to standard error as `error: <code>: <message>`. Subcommands are
deterministic for identical inputs and seeds.
"""

import json
import sys
from pathlib import Path

import click

from . import annotation, classifier, reporting, stats
from .errors import PrivReqError, ValidationError
from .ingestion import (
    FilterCriteria,
    fetch_issues,
    filter_low_information,
    filter_privacy_issues,
    normalize_issue,
    parse_timestamp,
)
from .store import (
    Corpus,
    ensure_layout,
    load_corpus,
    load_gold,
    read_ndjson,
    save_corpus,
    write_ndjson,
)
from .taxonomy import load_canonical, load_taxonomy

CONFIG_NAME = "privreq.config.json"
CONFIG_KEYS = frozenset({
    "project_dir", "taxonomy_path", "trackers", "filter", "classifier", "seeds",
})
DEFAULT_SEED = 13


def load_config(path=None):
    """The project configuration; {} when no file exists and none was named."""
    if path is None:
        candidate = Path(CONFIG_NAME)
        if not candidate.exists():
            return {}
        path = candidate
    path = Path(path)
    if not path.exists():
        raise ValidationError("missing config", str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError("bad config", f"{path}: {exc}")
    if not isinstance(doc, dict):
        raise ValidationError("bad config", f"{path}: top level must be an object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise ValidationError("bad config",
                              f"unknown keys: {', '.join(sorted(unknown))}")
    if doc.get("taxonomy_path") and not Path(doc["taxonomy_path"]).exists():
        raise ValidationError("bad config",
                              f"taxonomy_path does not exist: {doc['taxonomy_path']}")
    return doc


def project_taxonomy(ctx):
    path = ctx.obj["config"].get("taxonomy_path")
    return load_taxonomy(path) if path else load_canonical()


def echo_json(payload):
    click.echo(json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2))


@click.group()
@click.option("--project", "-p", "project",
              type=click.Path(file_okay=False), default=None,
              help="Project directory (default: from config, else '.').")
@click.option("--config", "config_path",
              type=click.Path(dir_okay=False), default=None,
              help=f"Config file (default: ./{CONFIG_NAME} when present).")
@click.pass_context
def cli(ctx, project, config_path):
    """Mine, annotate, and analyze privacy requirements in issue reports."""
    config = load_config(config_path)
    project_dir = Path(project or config.get("project_dir") or ".")
    ctx.obj = {"config": config, "project_dir": project_dir}


@cli.command()
@click.argument("directory", required=False)
@click.pass_context
def init(ctx, directory):
    """Create the project layout and a starter config file."""
    target = Path(directory) if directory else ctx.obj["project_dir"]
    ensure_layout(target)
    config_path = target / CONFIG_NAME
    if not config_path.exists():
        starter = {
            "project_dir": ".",
            "trackers": {
                "local": {"connector": "local-file", "source": "local"},
            },
            "filter": {
                "required_component": "privacy",
                "allowed_statuses": ["assigned", "fixed", "verified"],
                "min_description_tokens": 20,
            },
            "classifier": {"k": 3, "floor": 0.05},
            "seeds": {"sampling": DEFAULT_SEED},
        }
        config_path.write_text(
            json.dumps(starter, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"initialized project at {target}")


@cli.command("validate-taxonomy")
@click.argument("path", type=click.Path(exists=True, dir_okay=False),
                required=False)
def validate_taxonomy_cmd(path):
    """Validate a taxonomy document (the bundled one when PATH is omitted)."""
    taxonomy = load_taxonomy(path) if path else load_canonical()
    click.echo(f"{len(taxonomy.requirements)} requirements, "
               f"{len(taxonomy.goals)} goals")


@cli.command()
@click.option("--tracker", "-t", required=True,
              help="Tracker name from the config's trackers table.")
@click.option("--corpus", "-c", "corpus_name", required=True,
              help="Corpus name to write.")
@click.option("--path", "local_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Input file for local-file trackers.")
@click.pass_context
def ingest(ctx, tracker, corpus_name, local_path):
    """Fetch issues from a tracker and store them as a corpus."""
    trackers = ctx.obj["config"].get("trackers", {})
    descriptor = dict(trackers.get(tracker, {}))
    if not descriptor:
        if local_path is None:
            raise ValidationError("unknown tracker", tracker)
        descriptor = {"connector": "local-file", "source": tracker}
    if local_path:
        descriptor["path"] = local_path
    source = descriptor.get("source", tracker)

    issues = [normalize_issue(raw, source) for raw in fetch_issues(descriptor)]
    corpus = Corpus(name=corpus_name, issues=tuple(issues))
    save_corpus(corpus, ctx.obj["project_dir"])
    click.echo(f"ingested {len(issues)} issues into corpus {corpus_name!r}")


def _criteria_from(config: dict, component, statuses, min_tokens) -> FilterCriteria:
    base = config.get("filter", {})
    kwargs = {}
    if component is not None:
        kwargs["required_component"] = component
    elif "required_component" in base:
        kwargs["required_component"] = base["required_component"]
    if statuses is not None:
        kwargs["allowed_statuses"] = frozenset(
            s.strip().lower() for s in statuses.split(",") if s.strip())
    elif "allowed_statuses" in base:
        kwargs["allowed_statuses"] = frozenset(base["allowed_statuses"])
    if min_tokens is not None:
        kwargs["min_description_tokens"] = min_tokens
    elif "min_description_tokens" in base:
        kwargs["min_description_tokens"] = base["min_description_tokens"]
    return FilterCriteria(**kwargs)


@cli.command("filter")
@click.option("--corpus", "-c", "corpus_name", required=True)
@click.option("--out", "-o", "out_name", required=True,
              help="Name of the filtered corpus to write.")
@click.option("--component", default=None,
              help="Required component tag (default from config).")
@click.option("--statuses", default=None,
              help="Comma-separated allowed statuses (default from config).")
@click.option("--min-tokens", type=int, default=None,
              help="Minimum description tokens (default from config).")
@click.option("--invert", is_flag=True,
              help="Keep issues WITHOUT the required component instead "
                   "(builds a comparison corpus; status filter still applies).")
@click.option("--sample", "sample_n", type=int, default=None,
              help="Downsample the result to N issues.")
@click.option("--confidence", type=float, default=None,
              help="Pick the sample size statistically at this confidence "
                   "level (used with --interval).")
@click.option("--interval", type=float, default=None,
              help="Confidence interval width in percent for --confidence.")
@click.option("--seed", type=int, default=None,
              help="Sampling seed (default from config seeds.sampling).")
@click.pass_context
def filter_cmd(ctx, corpus_name, out_name, component, statuses, min_tokens,
               invert, sample_n, confidence, interval, seed):
    """Select privacy-relevant issues from a corpus into a new corpus."""
    config = ctx.obj["config"]
    project_dir = ctx.obj["project_dir"]
    corpus = load_corpus(project_dir, corpus_name)
    criteria = _criteria_from(config, component, statuses, min_tokens)

    if invert:
        in_status = [i for i in corpus.issues
                     if i.status in criteria.allowed_statuses]
        kept = [i for i in in_status
                if criteria.required_component not in i.components]
    else:
        kept = filter_privacy_issues(corpus.issues, criteria)
    kept = filter_low_information(kept, criteria.min_description_tokens)

    provenance = {
        "source_corpus": corpus_name,
        "criteria": criteria.as_dict(),
        "inverted": invert,
    }

    if confidence is not None or interval is not None:
        if confidence is None or interval is None:
            raise ValidationError("bad sampling options",
                                  "--confidence and --interval go together")
        if sample_n is not None:
            raise ValidationError("bad sampling options",
                                  "--sample conflicts with --confidence")
        if kept:
            sample_n = stats.sample_size(len(kept), confidence, interval)
            provenance["confidence"] = confidence
            provenance["interval"] = interval

    if sample_n is not None and kept:
        if seed is None:
            seed = config.get("seeds", {}).get("sampling", DEFAULT_SEED)
        ordered_keys = [i.key for i in
                        sorted(kept, key=lambda i: (i.source, i.external_id))]
        chosen = set(stats.draw_sample(ordered_keys, sample_n, seed))
        kept = [i for i in kept if i.key in chosen]
        provenance["sample_size"] = sample_n
        provenance["seed"] = seed

    out = Corpus(name=out_name, issues=tuple(kept), filter_provenance=provenance)
    save_corpus(out, project_dir)
    if not kept:
        click.echo("warning: no issues matched the filter; wrote an empty corpus",
                   err=True)
    click.echo(f"kept {len(kept)} of {len(corpus.issues)} issues "
               f"into corpus {out_name!r}")


@cli.group()
def annotate():
    """Manage annotation sessions from the command line."""


@annotate.command("create")
@click.option("--corpus", "-c", "corpus_name", required=True)
@click.option("--coders", required=True, help="Comma-separated coder ids.")
@click.option("--plan", "plan_kind", default="all-to-all",
              type=click.Choice(["all-to-all", "split-halves"]))
@click.option("--primary", default=None,
              help="Primary coder for the split-halves plan.")
@click.option("--session-id", default=None)
@click.pass_context
def annotate_create(ctx, corpus_name, coders, plan_kind, primary, session_id):
    """Create a session assigning coders to a corpus."""
    project_dir = ctx.obj["project_dir"]
    corpus = load_corpus(project_dir, corpus_name)
    coder_list = [c.strip() for c in coders.split(",") if c.strip()]
    plan = {"kind": plan_kind}
    if plan_kind == "split-halves":
        plan["primary_coder"] = primary or (coder_list[0] if coder_list else None)
    session = annotation.create_session(project_dir, corpus, coder_list, plan,
                                        session_id=session_id)
    click.echo(f"created session {session.session_id} "
               f"({len(session.issue_keys)} issues, {len(coder_list)} coders)")


@annotate.command("import")
@click.argument("session_id")
@click.argument("records_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def annotate_import(ctx, session_id, records_file):
    """Import label records from an NDJSON file into a session.

    Each line needs coder_id, issue_key, labels, and annotated_at, so a
    re-import reproduces the session byte for byte.
    """
    project_dir = ctx.obj["project_dir"]
    session = annotation.load_session(project_dir, session_id)
    taxonomy = project_taxonomy(ctx)
    count = 0
    for record in read_ndjson(Path(records_file)):
        for field in ("coder_id", "issue_key", "labels", "annotated_at"):
            if field not in record:
                raise ValidationError("missing field",
                                      f"record {count + 1}: {field}")
        annotation.record_label(
            project_dir, session, record["coder_id"], record["issue_key"],
            record["labels"], taxonomy,
            annotated_at=parse_timestamp(record["annotated_at"]),
            note=record.get("note"),
        )
        count += 1
    click.echo(f"imported {count} records into session {session_id}")


@annotate.command("export")
@click.argument("session_id")
@click.argument("gold_name")
@click.pass_context
def annotate_export(ctx, session_id, gold_name):
    """Export a session's agreed labels as a gold dataset."""
    project_dir = ctx.obj["project_dir"]
    session = annotation.load_session(project_dir, session_id)
    gold = annotation.export_gold(project_dir, session, gold_name)
    click.echo(f"exported gold dataset {gold_name!r} ({len(gold.entries)} issues)")


@cli.command()
@click.argument("session_id")
@click.option("--metric", type=click.Choice(["alpha", "fleiss"]), default="alpha")
@click.option("--distance", type=click.Choice(["masi", "nominal"]),
              default="masi", help="Set distance for the alpha metric.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def irr(ctx, session_id, metric, distance, as_json):
    """Inter-rater reliability for a session's current annotations."""
    project_dir = ctx.obj["project_dir"]
    session = annotation.load_session(project_dir, session_id)
    result = annotation.session_irr(project_dir, session,
                                    metric=metric, distance=distance)
    rate = annotation.total_agreement_rate(project_dir, session)
    if as_json:
        echo_json({**result.as_dict(), "total_agreement_rate": rate})
        return
    label = result.metric + (f" ({result.distance})" if result.distance else "")
    click.echo(f"{label}: {result.value:.4f} "
               f"over {result.n_items} items, {result.n_coders} coders")
    click.echo(f"total agreement rate: {rate:.4f}")


def _classifier_config(config: dict, k, floor):
    base = config.get("classifier", {})
    if k is None:
        k = base.get("k", classifier.DEFAULT_K)
    if floor is None:
        floor = base.get("floor", classifier.DEFAULT_FLOOR)
    kwargs = {}
    for field in ("mode", "min_token_length", "sublinear_tf",
                  "idf_smoothing", "embedding_path"):
        if field in base:
            kwargs[field] = base[field]
    return classifier.VectorizerConfig(**kwargs), k, floor


def _predictions_for(corpus, taxonomy, cfg, k, floor, only_keys=None):
    texts = [f"{i.title} {i.description}" for i in corpus.issues]
    profiles = classifier.build_profiles(taxonomy, cfg, corpus_texts=texts)
    ordered = sorted(corpus.issues, key=lambda i: (i.source, i.external_id))
    if only_keys is not None:
        ordered = [i for i in ordered if i.key in only_keys]
    return [classifier.classify_issue(i, profiles, k=k, floor=floor)
            for i in ordered]


@cli.command()
@click.option("--corpus", "-c", "corpus_name", required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Predictions file (default reports/<corpus>.predictions.ndjson).")
@click.option("--k", type=int, default=None, help="Labels per issue.")
@click.option("--floor", type=float, default=None, help="Minimum score kept.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def classify(ctx, corpus_name, out_path, k, floor, as_json):
    """Rank taxonomy requirements for every issue in a corpus."""
    project_dir = ctx.obj["project_dir"]
    corpus = load_corpus(project_dir, corpus_name)
    taxonomy = project_taxonomy(ctx)
    cfg, k, floor = _classifier_config(ctx.obj["config"], k, floor)
    predictions = _predictions_for(corpus, taxonomy, cfg, k, floor)
    if out_path is None:
        out_path = Path(project_dir) / "reports" / f"{corpus_name}.predictions.ndjson"
    write_ndjson(Path(out_path), [p.as_dict() for p in predictions])
    labeled = sum(1 for p in predictions if p.ranked)
    if as_json:
        echo_json({"corpus": corpus_name, "issues": len(predictions),
                   "with_predictions": labeled, "out": str(out_path)})
        return
    click.echo(f"classified {len(predictions)} issues "
               f"({labeled} with predictions) into {out_path}")


@cli.command()
@click.option("--corpus", "-c", "corpus_name", required=True)
@click.option("--gold", "-g", "gold_name", required=True)
@click.option("--k", type=int, default=None)
@click.option("--floor", type=float, default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def evaluate(ctx, corpus_name, gold_name, k, floor, as_json):
    """Score the classifier against a gold dataset."""
    project_dir = ctx.obj["project_dir"]
    corpus = load_corpus(project_dir, corpus_name)
    gold = load_gold(project_dir, gold_name)
    taxonomy = project_taxonomy(ctx)
    cfg, k, floor = _classifier_config(ctx.obj["config"], k, floor)
    missing = sorted(set(gold) - {i.key for i in corpus.issues})
    if missing:
        click.echo(f"warning: {len(missing)} gold issues not in corpus "
                   f"{corpus_name!r}; they are left unscored", err=True)
    predictions = _predictions_for(corpus, taxonomy, cfg, k, floor,
                                   only_keys=set(gold))
    metrics = classifier.evaluate(predictions, gold)
    if as_json:
        echo_json(metrics)
        return
    for scope in ("example", "micro", "macro"):
        click.echo(f"{scope:8s} P={metrics[f'{scope}_precision']:.4f} "
                   f"R={metrics[f'{scope}_recall']:.4f} "
                   f"F1={metrics[f'{scope}_f1']:.4f}")
    click.echo(f"evaluated {metrics['n_issues']} issues against {gold_name!r}")


ATTRIBUTES = {
    "resolution-days": "resolution time in whole days",
    "comment-count": "number of comments",
}


def _attribute_values(corpus, attr):
    values, skipped = [], 0
    for issue in corpus.issues:
        if attr == "resolution-days":
            if issue.resolved_at is None:
                skipped += 1
                continue
            values.append(float(stats.resolution_days(issue)))
        else:
            values.append(float(issue.comment_count))
    return values, skipped


@cli.command()
@click.argument("corpus_x")
@click.argument("corpus_y")
@click.option("--attr", type=click.Choice(sorted(ATTRIBUTES)), required=True)
@click.option("--tail", type=click.Choice(["two-sided", "greater", "less"]),
              default="two-sided")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def compare(ctx, corpus_x, corpus_y, attr, tail, as_json):
    """Rank-sum comparison of an attribute between two corpora."""
    project_dir = ctx.obj["project_dir"]
    x_corpus = load_corpus(project_dir, corpus_x)
    y_corpus = load_corpus(project_dir, corpus_y)
    x, skipped_x = _attribute_values(x_corpus, attr)
    y, skipped_y = _attribute_values(y_corpus, attr)
    if skipped_x or skipped_y:
        click.echo(f"warning: skipped {skipped_x + skipped_y} unresolved issues",
                   err=True)
    result = stats.rank_sum_test(x, y, tail)
    if as_json:
        echo_json({"attribute": attr, "corpus_x": corpus_x,
                   "corpus_y": corpus_y, **result.as_dict()})
        return
    click.echo(f"{attr}: {corpus_x} (n={result.n_x}) vs "
               f"{corpus_y} (n={result.n_y}), tail={tail}")
    click.echo(f"U={result.u_x:.1f} p={result.p_value:.6g} "
               f"RBC={result.rbc:.4f} CLES={result.cles:.4f}")


@cli.command()
@click.argument("kind", type=click.Choice(["coverage", "top", "summary"]))
@click.option("--gold", "-g", "gold_name", required=True)
@click.option("--n", type=int, default=10, help="Rows for the top ranking.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", help="File format for --out.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the report to this file.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def report(ctx, kind, gold_name, n, fmt, out_path, as_json):
    """Coverage and frequency reports over a gold dataset."""
    project_dir = ctx.obj["project_dir"]
    gold = load_gold(project_dir, gold_name)
    taxonomy = project_taxonomy(ctx)

    if kind == "summary":
        payload = reporting.summary(gold, taxonomy)
        if out_path:
            Path(out_path).write_text(
                json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2)
                + "\n", encoding="utf-8")
        if as_json:
            echo_json(payload)
        else:
            click.echo(f"issues: {payload['n_issues']}")
            click.echo(f"label occurrences: {payload['total_occurrences']}")
            click.echo(f"issues with labels: {payload['issues_with_labels']}")
        return

    if kind == "coverage":
        rows = reporting.coverage_by_goal(gold, taxonomy)
        if as_json:
            echo_json([r.as_dict() for r in rows])
        else:
            for r in rows:
                click.echo(f"goal {r.goal_id} {r.goal_name}: "
                           f"{reporting.format_pct(r.pct_occurrence)}% "
                           f"({r.n_requirements} requirements)")
    else:
        rows = reporting.top_requirements(gold, n)
        if as_json:
            echo_json([{"requirement_id": rid, "occurrence_count": c}
                       for rid, c in rows])
        else:
            for rid, count in rows:
                click.echo(f"{rid}: {count}")
    if out_path:
        reporting.export_report(rows, fmt, out_path)
        click.echo(f"wrote {out_path}", err=True)


@cli.command()
@click.option("--bind", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Directory with the built web UI bundle.")
@click.pass_context
def serve(ctx, bind, port, ui_dir):
    """Run the local HTTP API and web UI for this project."""
    from .service import serve as run_server
    config = ctx.obj["config"]
    run_server(ctx.obj["project_dir"], bind_address=bind, port=port,
               taxonomy_path=config.get("taxonomy_path"), ui_dir=ui_dir)


def run(argv=None) -> int:
    """Execute one CLI invocation and report the exit code."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except PrivReqError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: bad_value: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
