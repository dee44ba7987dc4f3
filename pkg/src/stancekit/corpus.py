"""Corpus ingestion, label unification, None-subset extension, and statistics.

Source corpora arrive in whatever delimited or JSONL layout their
publishers chose, so adapters are config-driven: a column map, a label
map, and per-split file lists. Five ready-made adapter configs ship in
the repository's ``configs/`` directory.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .core import StanceLabel, StanceRecord, VALID_SPLITS, write_records_jsonl
from .enrich import detect_explicit_mention
from .errors import (
    ConfigError,
    EncodingError,
    InsufficientDiversity,
    MissingColumn,
    UnmappedLabel,
)

#: Source-label strings the label maps may produce. NEUTRAL is merged into
#: NONE during unification: the two names denote one category here.
CANONICAL_RAW_LABELS = ("FAVOR", "AGAINST", "NONE", "NEUTRAL")

#: Retry bound per record when drawing an irrelevant target.
IRRELEVANT_DRAW_BOUND = 100


def unify_label(raw: str) -> StanceLabel:
    """Map a canonical raw label string to the 3-class scheme (Neutral -> None)."""
    up = raw.strip().upper()
    if up == "NEUTRAL":
        return StanceLabel.NONE
    if up not in ("FAVOR", "AGAINST", "NONE"):
        raise UnmappedLabel(f"label string {raw!r} is not one of {CANONICAL_RAW_LABELS}")
    return StanceLabel(up)


@dataclass(frozen=True)
class Dataset:
    """An ordered, validated collection of records with per-split indices."""

    name: str
    records: tuple[StanceRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise ValueError(f"dataset {self.name!r}: duplicate record id {rec.id!r}")
            seen.add(rec.id)

    @property
    def splits(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {s: [] for s in VALID_SPLITS}
        for i, rec in enumerate(self.records):
            out[rec.split].append(i)
        return out

    def split(self, name: str) -> list[StanceRecord]:
        return [r for r in self.records if r.split == name]

    def __len__(self) -> int:
        return len(self.records)

    def save(self, path) -> None:
        write_records_jsonl(path, self.records)


@dataclass(frozen=True)
class CorpusAdapterConfig:
    """How to read one source corpus into the canonical format.

    ``columns`` maps StanceRecord fields (text, target, label, and
    optionally id) to source column names; ``label_map`` maps every
    observed source label string to a canonical raw label; ``files`` maps
    each split to a list of paths relative to the corpus root.
    """

    corpus_name: str
    file_format: str  # "csv", "tsv", or "jsonl"
    columns: dict
    label_map: dict
    files: dict
    encoding: str = "utf-8"
    domain: str = ""

    def __post_init__(self) -> None:
        for required in ("text", "target", "label"):
            if required not in self.columns:
                raise ConfigError(f"adapter {self.corpus_name!r}: column map misses {required!r}")
        if self.file_format not in ("csv", "tsv", "jsonl"):
            raise ConfigError(f"adapter {self.corpus_name!r}: unknown format {self.file_format!r}")
        for split in self.files:
            if split not in VALID_SPLITS:
                raise ConfigError(f"adapter {self.corpus_name!r}: unknown split {split!r}")
        for raw in self.label_map.values():
            if str(raw).strip().upper() not in CANONICAL_RAW_LABELS:
                raise ConfigError(
                    f"adapter {self.corpus_name!r}: label map value {raw!r} not in {CANONICAL_RAW_LABELS}"
                )

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusAdapterConfig":
        return cls(
            corpus_name=d["corpus_name"],
            file_format=d["file_format"],
            columns=dict(d["columns"]),
            label_map=dict(d["label_map"]),
            files={k: list(v) for k, v in d["files"].items()},
            encoding=d.get("encoding", "utf-8"),
            domain=d.get("domain", ""),
        )


def _iter_rows(path: Path, config: CorpusAdapterConfig):
    try:
        if config.file_format == "jsonl":
            with open(path, encoding=config.encoding) as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if line:
                        yield lineno, json.loads(line)
        else:
            delim = "\t" if config.file_format == "tsv" else ","
            with open(path, encoding=config.encoding, newline="") as fh:
                reader = csv.DictReader(fh, delimiter=delim)
                for lineno, row in enumerate(reader, start=2):
                    yield lineno, row
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{path}: cannot decode with {config.encoding!r}: {exc}") from exc


def ingest(source_path, config: CorpusAdapterConfig) -> Dataset:
    """Read a source corpus directory into a canonical, unified Dataset.

    Text is preserved verbatim: case, special tokens, and hashtags stay
    as found in the source files. Labels are mapped through the adapter's
    label map and unified to the 3-class scheme.
    """
    root = Path(source_path)
    records: list[StanceRecord] = []
    counter = 0
    for split, filenames in config.files.items():
        for filename in filenames:
            path = root / filename
            for lineno, row in _iter_rows(path, config):
                rec = _row_to_record(row, config, split, path, lineno, counter)
                records.append(rec)
                counter += 1
    return Dataset(name=config.corpus_name, records=tuple(records))


def _row_to_record(row, config, split, path, lineno, counter) -> StanceRecord:
    cols = config.columns
    for field_name in ("text", "target", "label"):
        if cols[field_name] not in row:
            raise MissingColumn(
                f"{path}:{lineno}: source column {cols[field_name]!r} (for {field_name}) not found"
            )
    raw_label = str(row[cols["label"]]).strip()
    if raw_label not in config.label_map:
        raise UnmappedLabel(f"{path}:{lineno}: unmapped source label {raw_label!r}")
    label = unify_label(str(config.label_map[raw_label]))
    if "id" in cols and cols["id"] in row and str(row[cols["id"]]).strip():
        rec_id = f"{config.corpus_name}:{row[cols['id']]}"
    else:
        rec_id = f"{config.corpus_name}:{split}:{counter}"
    return StanceRecord(
        id=rec_id,
        text=str(row[cols["text"]]),
        target=str(row[cols["target"]]),
        label=label,
        corpus=config.corpus_name,
        split=split,
        domain=config.domain,
    )


def unify_labels(ds: Dataset) -> Dataset:
    """Idempotent 3-class normalization of a dataset.

    Ingestion already merges Neutral into None (records cannot represent a
    fourth class), so on in-memory datasets this is a validated identity;
    it exists so externally built datasets pass through the same gate.
    """
    for rec in ds.records:
        if rec.label not in StanceLabel:
            raise UnmappedLabel(f"record {rec.id!r}: label {rec.label!r} outside the 3-class scheme")
    return Dataset(name=ds.name, records=ds.records)


def extend_none_subset(train: Dataset, fraction: float, seed: int) -> Dataset:
    """Add floor(fraction * |train|) None-labeled records with irrelevant targets.

    Each added record copies an existing record's text and takes a target
    drawn (seeded uniform) from a different record, rejecting draws whose
    target equals the host's or is explicitly mentioned in the host text.
    Existing records are never changed; output is deterministic per seed.
    """
    if not (0 < fraction <= 1):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if len(train) == 0:
        raise ValueError("train dataset must be non-empty")
    n_new = int(np.floor(fraction * len(train)))
    rng = np.random.default_rng(seed)
    records = list(train.records)
    added: list[StanceRecord] = []
    for k in range(n_new):
        host = records[int(rng.integers(0, len(records)))]
        target = None
        for _ in range(IRRELEVANT_DRAW_BOUND):
            donor = records[int(rng.integers(0, len(records)))]
            cand = donor.target
            if cand == host.target:
                continue
            if detect_explicit_mention(host.text, cand):
                continue
            target = cand
            break
        if target is None:
            raise InsufficientDiversity(
                f"no irrelevant target found for host {host.id!r} "
                f"after {IRRELEVANT_DRAW_BOUND} draws"
            )
        added.append(
            StanceRecord(
                id=f"{host.id}-none{k}",
                text=host.text,
                target=target,
                label=StanceLabel.NONE,
                corpus=host.corpus,
                split="train",
                domain=host.domain,
            )
        )
    return Dataset(name=train.name, records=tuple(records) + tuple(added))


@dataclass(frozen=True)
class StatsReport:
    """Per-split record counts and per-target label distributions."""

    dataset_name: str
    split_counts: dict
    target_counts: dict  # target -> {"total": n, "labels": {label: n}}

    @property
    def total(self) -> int:
        return sum(self.split_counts.values())

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset_name,
            "splits": dict(self.split_counts),
            "targets": {t: dict(c) for t, c in self.target_counts.items()},
        }

    def to_table(self) -> str:
        """Plain-text table in the corpus / targets / train / valid / test layout."""
        targets = ", ".join(sorted(self.target_counts))
        header = f"{'Corpus':<24}{'Train':>8}{'Valid':>8}{'Test':>8}"
        row = (
            f"{self.dataset_name:<24}"
            f"{self.split_counts.get('train', 0):>8}"
            f"{self.split_counts.get('valid', 0):>8}"
            f"{self.split_counts.get('test', 0):>8}"
        )
        return "\n".join([header, row, f"Targets: {targets}"])


def stats(ds: Dataset) -> StatsReport:
    split_counts = {s: 0 for s in VALID_SPLITS}
    target_counts: dict[str, dict] = {}
    for rec in ds.records:
        split_counts[rec.split] += 1
        tc = target_counts.setdefault(rec.target, {"total": 0, "labels": {}})
        tc["total"] += 1
        tc["labels"][rec.label.value] = tc["labels"].get(rec.label.value, 0) + 1
    return StatsReport(dataset_name=ds.name, split_counts=split_counts, target_counts=target_counts)
