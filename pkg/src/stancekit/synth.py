"""Synthetic stance benchmark with rule-defined target relations.

The generator builds a toy world where every text praises or attacks one
made-up entity with unambiguous cue words. Targets relate to the
mentioned entity by construction:

* the entity itself          -> label = cue polarity (alignment +1)
* "ban <entity>"             -> label flipped       (alignment -1)
* an off-topic phrase        -> label None          (alignment  0)

Training entities and test entities are disjoint, so every test target
string is unseen; a model can only succeed on the dis-aligned targets by
learning the relation rule rather than memorizing targets. This mirrors
the cross-target setup the toolkit is evaluated under, at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EnrichedRecord, ExplicitObject, StanceLabel, StanceRecord

POSITIVE_CUES = ("love", "praise", "support", "admire", "endorse")
NEGATIVE_CUES = ("hate", "despise", "reject", "condemn", "denounce")
FLIP_MARKER = "ban"
OFFTOPIC_HEADS = ("cooking", "gardening", "astronomy", "knitting", "carpentry")
OFFTOPIC_TAILS = ("recipes", "tools", "guides", "clubs", "lessons")
FILLERS = ("honestly", "frankly", "truly", "folks", "seriously", "today", "again")

_SYLLA = ("zor", "bla", "fri", "gon", "mek", "tul", "vas", "pli", "dro", "sha",
          "qui", "lem", "nox", "rud", "tev", "wib", "yal", "kez", "fom", "spi")


def entity_name(i: int) -> str:
    a = _SYLLA[i % len(_SYLLA)]
    b = _SYLLA[(i * 7 + 3) % len(_SYLLA)]
    return f"{a}{b}{i}"


@dataclass(frozen=True)
class SynthConfig:
    n_train: int = 2000
    n_valid: int = 300
    n_test: int = 600
    n_enriched: int = 1500
    n_train_entities: int = 18
    n_test_entities: int = 12
    none_fraction: float = 0.34  # share of train records with off-topic targets
    seed: int = 0


@dataclass(frozen=True)
class SynthBenchmark:
    train: list
    valid: list
    test: list
    enriched_pool: list  # StanceRecords with dis-aligned "ban" targets
    enriched_records: list  # the same pairs as validated EnrichedRecords


def _make_text(rng, entity: str) -> tuple[str, StanceLabel, int]:
    """Cue-worded sentence about ``entity``; returns (text, cue polarity, entity char offset)."""
    positive = bool(rng.integers(0, 2))
    cue = (POSITIVE_CUES if positive else NEGATIVE_CUES)[int(rng.integers(0, 5))]
    lead = FILLERS[int(rng.integers(0, len(FILLERS)))]
    tail = FILLERS[int(rng.integers(0, len(FILLERS)))]
    prefix = f"{lead} i {cue} the "
    text = f"{prefix}{entity} movement {tail}"
    label = StanceLabel.FAVOR if positive else StanceLabel.AGAINST
    return text, label, len(prefix)


def _offtopic_target(rng) -> str:
    head = OFFTOPIC_HEADS[int(rng.integers(0, len(OFFTOPIC_HEADS)))]
    tail = OFFTOPIC_TAILS[int(rng.integers(0, len(OFFTOPIC_TAILS)))]
    return f"{head} {tail}"


def generate(config: SynthConfig = SynthConfig()) -> SynthBenchmark:
    rng = np.random.default_rng(config.seed)
    train_entities = [entity_name(i) for i in range(config.n_train_entities)]
    test_entities = [
        entity_name(i + config.n_train_entities) for i in range(config.n_test_entities)
    ]

    def base_record(idx: int, split: str, entities: list[str]):
        entity = entities[int(rng.integers(0, len(entities)))]
        text, polarity, ent_off = _make_text(rng, entity)
        kind = float(rng.random())
        none_cut = config.none_fraction
        if kind < none_cut:
            target, label = _offtopic_target(rng), StanceLabel.NONE
        elif split == "train" or kind < none_cut + (1 - none_cut) / 2:
            target, label = entity, polarity
        else:
            # dis-aligned implicit target; train never sees these
            target = f"{FLIP_MARKER} {entity}"
            label = StanceLabel.AGAINST if polarity is StanceLabel.FAVOR else StanceLabel.FAVOR
        return StanceRecord(
            id=f"syn:{split}:{idx}", text=text, target=target, label=label,
            corpus="synthetic", split=split, domain="synthetic",
        ), entity, polarity, ent_off

    train = [base_record(i, "train", train_entities)[0] for i in range(config.n_train)]
    valid = [base_record(i, "valid", train_entities)[0] for i in range(config.n_valid)]
    test = [base_record(i, "test", test_entities)[0] for i in range(config.n_test)]

    enriched_pool: list[StanceRecord] = []
    enriched_records: list[EnrichedRecord] = []
    for k in range(config.n_enriched):
        rec, entity, polarity, ent_off = base_record(k, "train", train_entities)
        while rec.label is StanceLabel.NONE:
            rec, entity, polarity, ent_off = base_record(k, "train", train_entities)
        flipped = StanceLabel.AGAINST if polarity is StanceLabel.FAVOR else StanceLabel.FAVOR
        paired = StanceRecord(
            id=f"syn:enriched:{k}", text=rec.text, target=f"{FLIP_MARKER} {entity}",
            label=flipped, corpus="synthetic", split="train", domain="synthetic",
        )
        enriched_pool.append(paired)
        obj = ExplicitObject(
            surface=entity, char_start=ent_off, char_end=ent_off + len(entity), label=polarity,
        )
        enriched_records.append(
            EnrichedRecord(
                base=paired,
                explicit_objects=(obj,),
                explicit_mention=False,
                alignments=((0, -1),),
            )
        )
    return SynthBenchmark(
        train=train, valid=valid, test=test,
        enriched_pool=enriched_pool, enriched_records=enriched_records,
    )
