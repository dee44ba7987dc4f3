"""Command-line entry points for every pipeline stage.

Every command reads/writes the canonical JSONL formats, prints a
one-line summary on success, and exits nonzero with a machine-readable
``{"error": code, "detail": ...}`` line on failure. The output root
defaults to the current directory and can be redirected with the
``STANCEKIT_OUT`` environment variable (the only environment knob).
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import yaml

from .core import StanceLabel, read_records_jsonl, write_enriched_jsonl
from .corpus import CorpusAdapterConfig, Dataset, extend_none_subset, ingest, stats
from .enrich import cohen_kappa, extract_candidates, filter_candidates, tag
from .errors import ConfigError, StancekitError


def _out_root() -> Path:
    return Path(os.environ.get("STANCEKIT_OUT", "."))


def _out_path(name: str) -> Path:
    root = _out_root()
    root.mkdir(parents=True, exist_ok=True)
    return root / name


def _load_yaml(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a key-value tree")
    return data


def _job_config(path) -> dict:
    data = _load_yaml(path)
    if "seed" not in data:
        raise ConfigError(f"config {path}: 'seed' is mandatory")
    return data


def _train_config(job: dict, seed_override=None):
    from .model.training import TrainConfig

    params = dict(job.get("train", {}))
    params.setdefault("seed", job["seed"])
    if seed_override is not None:
        params["seed"] = seed_override
    try:
        return TrainConfig(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid train parameters: {exc}") from exc


def _dataset_from_job(job: dict, key: str) -> list:
    paths = job.get("paths", {})
    if key not in paths:
        raise ConfigError(f"config declares no paths.{key}")
    return read_records_jsonl(paths[key])


def _fail(exc: Exception) -> None:
    code = exc.code if isinstance(exc, StancekitError) else type(exc).__name__
    click.echo(json.dumps({"error": code, "detail": str(exc)}), err=True)
    sys.exit(1)


def _command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (StancekitError, OSError, ValueError, KeyError) as exc:
            _fail(exc)

    return wrapper


@click.group()
def main() -> None:
    """Stance-detection pipeline: ingest, enrich, train, evaluate, annotate."""


@main.command("ingest")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--source", "source", required=True, type=click.Path(exists=True))
@click.option("--out", "out", default=None, type=click.Path())
@_command
def ingest_cmd(config_path, source, out) -> None:
    """Read a source corpus into canonical JSONL via an adapter config."""
    adapter = CorpusAdapterConfig.from_dict(_load_yaml(config_path))
    ds = ingest(source, adapter)
    path = Path(out) if out else _out_path(f"{adapter.corpus_name}.jsonl")
    ds.save(path)
    click.echo(f"ingested {len(ds)} records from {adapter.corpus_name} -> {path}")


@main.command("stats")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="emit the full JSON report")
@_command
def stats_cmd(input_path, as_json) -> None:
    """Per-split and per-target statistics of a canonical JSONL file."""
    records = read_records_jsonl(input_path)
    report = stats(Dataset(name=Path(input_path).stem, records=tuple(records)))
    if as_json:
        click.echo(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    else:
        click.echo(report.to_table())


@main.command("extend-none")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--fraction", required=True, type=float)
@click.option("--seed", required=True, type=int)
@click.option("--out", "out", default=None, type=click.Path())
@_command
def extend_none_cmd(input_path, fraction, seed, out) -> None:
    """Add None-labeled records with irrelevant targets to a train set."""
    records = read_records_jsonl(input_path)
    ds = Dataset(name=Path(input_path).stem, records=tuple(records))
    extended = extend_none_subset(ds, fraction=fraction, seed=seed)
    path = Path(out) if out else _out_path(f"{ds.name}-extended.jsonl")
    extended.save(path)
    click.echo(f"extended {len(ds)} -> {len(extended)} records -> {path}")


@main.command("extract")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", default=None, type=click.Path())
@_command
def extract_cmd(input_path, out) -> None:
    """Propose filtered explicit-object candidates for every record."""
    records = read_records_jsonl(input_path)
    path = Path(out) if out else _out_path(f"{Path(input_path).stem}-candidates.jsonl")
    n_objects = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            tokens = tag(rec.text)
            objects = filter_candidates(extract_candidates(tokens), tokens)
            n_objects += len(objects)
            fh.write(json.dumps({
                "record": rec.to_dict(),
                "candidates": [o.to_dict() for o in objects],
            }, ensure_ascii=False) + "\n")
    click.echo(f"extracted {n_objects} candidates over {len(records)} records -> {path}")


@main.command("pair")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="JSONL of {record, candidates} rows with labeled candidates")
@click.option("--out", "out", default=None, type=click.Path())
@_command
def pair_cmd(input_path, out) -> None:
    """Adversarially pair records with their labeled dis-aligned objects."""
    from .core import ExplicitObject, StanceRecord
    from .enrich import propose_adversarial_pair
    from .errors import NoDisalignedObject

    enriched = []
    skipped = 0
    with open(input_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            rec = StanceRecord.from_dict(row["record"])
            objs = [ExplicitObject.from_dict(o) for o in row["candidates"]]
            labeled = [o for o in objs if o.label is not None]
            if not labeled or not rec.label.is_polar:
                skipped += 1
                continue
            try:
                enriched.append(propose_adversarial_pair(rec, labeled))
            except NoDisalignedObject:
                skipped += 1
    path = Path(out) if out else _out_path(f"{Path(input_path).stem}-enriched.jsonl")
    write_enriched_jsonl(path, enriched)
    click.echo(f"paired {len(enriched)} records ({skipped} skipped) -> {path}")


@main.command("kappa")
@click.option("--votes", "votes_path", required=True, type=click.Path(exists=True),
              help="JSONL of {item, annotator, label} vote rows")
@_command
def kappa_cmd(votes_path) -> None:
    """Pairwise Cohen's kappa between every two annotators in a vote file."""
    by_annotator: dict[str, dict[str, StanceLabel]] = {}
    with open(votes_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            by_annotator.setdefault(row["annotator"], {})[row["item"]] = (
                StanceLabel.from_string(row["label"])
            )
    annotators = sorted(by_annotator)
    rows = []
    for i, a in enumerate(annotators):
        for b in annotators[i + 1:]:
            shared = sorted(set(by_annotator[a]) & set(by_annotator[b]))
            if not shared:
                continue
            k = cohen_kappa([by_annotator[a][s] for s in shared],
                            [by_annotator[b][s] for s in shared])
            rows.append({"annotator_a": a, "annotator_b": b,
                         "shared_items": len(shared), "kappa": k})
    click.echo(json.dumps({"pairs": rows}, ensure_ascii=False))


@main.command("serve")
@click.option("--batch", "batch_path", required=True, type=click.Path(exists=True),
              help="JSONL of {record, candidates} rows (the enrichment batch)")
@click.option("--log", "log_path", default=None, type=click.Path(),
              help="append-only event log (default: events.jsonl under the output root)")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8400, type=int)
@click.option("--assignment", default="overlap", type=click.Choice(["overlap", "partitioned"]))
@click.option("--ui-dir", "ui_dir", default=None, type=click.Path(exists=True))
@_command
def serve_cmd(batch_path, log_path, host, port, assignment, ui_dir) -> None:
    """Run the HTTP annotation service over an enrichment batch."""
    import uvicorn

    from .service import AnnotationStore, create_app, read_batch_jsonl

    batch = read_batch_jsonl(batch_path)
    log = Path(log_path) if log_path else _out_path("events.jsonl")
    store = AnnotationStore(batch, log, assignment=assignment)
    app = create_app(store, ui_dir=ui_dir)
    click.echo(f"serving {len(batch)} items on http://{host}:{port} (log: {log})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("train")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", default=None, type=click.Path())
@_command
def train_cmd(config_path, out) -> None:
    """Train the classifier per a job config; writes a checkpoint."""
    from .model.params import save_checkpoint
    from .model.training import train
    from .model.vocab import load_embeddings, build_vocab

    job = _job_config(config_path)
    config = _train_config(job)
    train_records = _dataset_from_job(job, "train")
    valid_records = _dataset_from_job(job, "valid")

    emb = None
    vocab = None
    emb_path = job.get("paths", {}).get("embeddings")
    if emb_path:
        vocab = build_vocab(train_records, min_freq=config.min_freq)
        emb = load_embeddings(emb_path, vocab, dim=config.emb_dim, seed=config.seed)

    result = train(train_records, valid_records, config, vocab=vocab, emb=emb)
    path = Path(out) if out else _out_path("model.npz")
    save_checkpoint(
        path, result.model.params, result.model.vocab.content_hash(),
        meta={
            "vocab_tokens": list(result.model.vocab.tokens),
            "max_len": result.model.max_len,
            "best_epoch": result.best_epoch,
            "best_valid_f1": result.best_valid_f1,
        },
    )
    click.echo(
        f"trained {config.epochs} epochs, best valid macro-F1 "
        f"{result.best_valid_f1:.4f} at epoch {result.best_epoch} -> {path}"
    )


def _load_model(checkpoint_path):
    from .model.params import load_checkpoint
    from .model.training import StanceModel
    from .model.vocab import Vocab

    params, header = load_checkpoint(checkpoint_path)
    meta = header.get("meta", {})
    tokens = meta.get("vocab_tokens")
    if not tokens:
        raise ConfigError(f"checkpoint {checkpoint_path} carries no vocabulary")
    return StanceModel(
        params=params, vocab=Vocab(tokens=tuple(tokens)),
        max_len=int(meta.get("max_len", 96)),
    )


@main.command("evaluate")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--class-set", "class_set", default="3-class",
              type=click.Choice(["3-class", "2-class"]))
@click.option("--json", "as_json", is_flag=True)
@_command
def evaluate_cmd(checkpoint_path, test_path, class_set, as_json) -> None:
    """Macro P/R/F1 of a checkpoint on a canonical JSONL test set."""
    from .eval import macro_metrics

    model = _load_model(checkpoint_path)
    records = read_records_jsonl(test_path)
    preds = [model.predict(r) for r in records]
    golds = [r.label for r in records]
    report = macro_metrics(preds, golds, class_set)
    if as_json:
        click.echo(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    else:
        click.echo(report.to_table(name=Path(test_path).stem))


@main.command("kl")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@_command
def kl_cmd(checkpoint_path, test_path) -> None:
    """Mean target-dependency KL of a checkpoint over a test set."""
    from .eval import kl_target_dependency

    model = _load_model(checkpoint_path)
    records = read_records_jsonl(test_path)
    value = kl_target_dependency(model, records)
    click.echo(json.dumps({"kl_target_dependency": value, "records": len(records)}))


@main.command("ablate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", default=None, type=click.Path())
@_command
def ablate_cmd(config_path, out) -> None:
    """Enrichment-size ablation per a job config; writes a CSV curve."""
    from .eval import run_ablation

    job = _job_config(config_path)
    config = _train_config(job)
    sizes = list(job.get("sizes", []))
    if not sizes:
        raise ConfigError("config declares no 'sizes' for the ablation")
    base_train = _dataset_from_job(job, "train")
    valid_records = _dataset_from_job(job, "valid")
    pool = _dataset_from_job(job, "enriched_pool")
    test_sets = {
        name: read_records_jsonl(path)
        for name, path in job.get("paths", {}).get("test_sets", {}).items()
    }
    if not test_sets:
        raise ConfigError("config declares no paths.test_sets")
    curve = run_ablation(base_train, valid_records, pool, sizes, config, test_sets)
    path = Path(out) if out else _out_path("ablation.csv")
    curve.to_csv(path)
    summary = ", ".join(
        f"{p.enriched_size}:" + "/".join(f"{r.macro_f1:.3f}" for r in p.reports.values())
        for p in curve.points
    )
    click.echo(f"ablation {summary} -> {path}")


if __name__ == "__main__":
    main()
