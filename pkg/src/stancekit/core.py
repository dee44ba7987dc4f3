"""Domain model for target-aware stance detection.

A piece of text carries stance toward objects it mentions literally
(explicit objects) and toward specified targets that may never be
mentioned. The label of a specified target is tied to the label of an
explicit object through an alignment value: +1 when they share polarity,
-1 when they are opposed, 0 when there is no correlation at all.

Everything in this module is an immutable value; records are safe to
share across threads and to hash into sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import UndefinedAlignment, UndefinedComposition


class StanceLabel(Enum):
    FAVOR = "FAVOR"
    AGAINST = "AGAINST"
    NONE = "NONE"

    @classmethod
    def from_string(cls, s: str) -> "StanceLabel":
        return cls(s.strip().upper())

    @property
    def is_polar(self) -> bool:
        return self in (StanceLabel.FAVOR, StanceLabel.AGAINST)


#: The only representable alignment values.
ALIGNMENT_VALUES = (-1, 0, 1)

VALID_SPLITS = ("train", "valid", "test")


def flip(label: StanceLabel) -> StanceLabel:
    """Swap Favor and Against; undefined (raises) for None."""
    if label is StanceLabel.FAVOR:
        return StanceLabel.AGAINST
    if label is StanceLabel.AGAINST:
        return StanceLabel.FAVOR
    raise UndefinedComposition("cannot flip the None label")


def compose_label(explicit: StanceLabel, alignment: int) -> StanceLabel:
    """Label of a specified target given an explicit object's label and their alignment.

    Zero alignment severs any correlation and always yields None. A
    nonzero alignment transfers (or flips) the polarity of the explicit
    object, which must therefore be polar.
    """
    if alignment not in ALIGNMENT_VALUES:
        raise ValueError(f"alignment must be one of {ALIGNMENT_VALUES}, got {alignment!r}")
    if alignment == 0:
        return StanceLabel.NONE
    if not explicit.is_polar:
        raise UndefinedComposition(
            f"composition from a None-labeled explicit object with alignment {alignment} is undefined"
        )
    return explicit if alignment == 1 else flip(explicit)


def derive_alignment(explicit: StanceLabel, target: StanceLabel) -> int:
    """Alignment value relating an explicit object's label to a target's label.

    Inverse of :func:`compose_label` wherever that is defined: a None
    target has no correlation (0); matching polar labels give +1 and
    opposed polar labels give -1.
    """
    if target is StanceLabel.NONE:
        return 0
    if not explicit.is_polar:
        raise UndefinedAlignment(
            "alignment from a None-labeled explicit object toward a polar target is undefined"
        )
    return 1 if explicit is target else -1


@dataclass(frozen=True)
class StanceRecord:
    """One annotated sample: raw text, a specified target, and a 3-class label."""

    id: str
    text: str
    target: str
    label: StanceLabel
    corpus: str = ""
    split: str = "train"
    domain: str = ""

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"record {self.id!r}: text must be non-empty")
        if not self.target:
            raise ValueError(f"record {self.id!r}: target must be non-empty")
        if self.split not in VALID_SPLITS:
            raise ValueError(f"record {self.id!r}: split must be one of {VALID_SPLITS}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "target": self.target,
            "label": self.label.value,
            "corpus": self.corpus,
            "split": self.split,
            "domain": self.domain,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StanceRecord":
        return cls(
            id=d["id"],
            text=d["text"],
            target=d["target"],
            label=StanceLabel.from_string(d["label"]),
            corpus=d.get("corpus", ""),
            split=d.get("split", "train"),
            domain=d.get("domain", ""),
        )


@dataclass(frozen=True)
class ExplicitObject:
    """A literally mentioned object: a character span plus an optional stance label.

    The label is None (the Python value, not the stance category) while the
    span is only a candidate that no annotator has labeled yet.
    """

    surface: str
    char_start: int
    char_end: int
    label: Optional[StanceLabel] = None

    def check_against(self, text: str) -> list[str]:
        """Return invariant violations of this span relative to its text."""
        out = []
        if not (0 <= self.char_start < self.char_end <= len(text)):
            out.append(
                f"explicit object {self.surface!r}: offsets [{self.char_start}, {self.char_end}) "
                f"out of range for text of length {len(text)}"
            )
        elif text[self.char_start:self.char_end] != self.surface:
            out.append(
                f"explicit object surface {self.surface!r} does not equal the text slice "
                f"{text[self.char_start:self.char_end]!r}"
            )
        return out

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "char_start": self.char_start,
            "char_end": self.char_end,
            "label": self.label.value if self.label is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExplicitObject":
        raw = d.get("label")
        return cls(
            surface=d["surface"],
            char_start=d["char_start"],
            char_end=d["char_end"],
            label=StanceLabel.from_string(raw) if raw is not None else None,
        )


@dataclass(frozen=True)
class EnrichedRecord:
    """A stance record expanded with explicit objects and alignment pairs.

    ``alignments`` holds ``(explicit_object_index, alignment_value)``
    pairs relating each listed explicit object to the specified target.
    """

    base: StanceRecord
    explicit_objects: tuple[ExplicitObject, ...] = ()
    explicit_mention: bool = False
    alignments: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "explicit_objects", tuple(self.explicit_objects))
        object.__setattr__(self, "alignments", tuple(tuple(p) for p in self.alignments))

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "explicit_objects": [o.to_dict() for o in self.explicit_objects],
            "explicit_mention": self.explicit_mention,
            "alignments": [list(p) for p in self.alignments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnrichedRecord":
        return cls(
            base=StanceRecord.from_dict(d["base"]),
            explicit_objects=tuple(ExplicitObject.from_dict(o) for o in d["explicit_objects"]),
            explicit_mention=bool(d["explicit_mention"]),
            alignments=tuple((int(i), int(a)) for i, a in d["alignments"]),
        )


def validate_enriched(rec: EnrichedRecord) -> list[str]:
    """Check every EnrichedRecord invariant; violations are data, not failures.

    Returns an empty list iff the record is internally consistent. Each
    violation message names the field and the rule it breaks.
    """
    # imported here: enrich builds on core, not the other way around
    from .enrich import detect_explicit_mention

    violations: list[str] = []
    text = rec.base.text

    for obj in rec.explicit_objects:
        violations.extend(obj.check_against(text))

    seen_indices: dict[int, int] = {}
    for idx, value in rec.alignments:
        if not (0 <= idx < len(rec.explicit_objects)):
            violations.append(
                f"alignments: index {idx} out of range for {len(rec.explicit_objects)} explicit objects"
            )
            continue
        if value not in ALIGNMENT_VALUES:
            violations.append(f"alignments: value {value} for object {idx} not in {ALIGNMENT_VALUES}")
            continue
        if idx in seen_indices and seen_indices[idx] != value:
            violations.append(
                f"alignments: object {idx} carries conflicting values {seen_indices[idx]} and {value}"
            )
            continue
        seen_indices[idx] = value
        obj = rec.explicit_objects[idx]
        if value != 0:
            if obj.label is None or not obj.label.is_polar:
                violations.append(
                    f"alignments: object {idx} ({obj.surface!r}) has nonzero alignment "
                    f"but label {obj.label} is not polar"
                )
                continue
            composed = compose_label(obj.label, value)
            if composed is not rec.base.label:
                violations.append(
                    f"alignments: compose_label({obj.label.value}, {value}) = {composed.value} "
                    f"does not match base label {rec.base.label.value} for object {idx} ({obj.surface!r})"
                )

    mentioned = detect_explicit_mention(text, rec.base.target)
    if rec.explicit_mention != mentioned:
        violations.append(
            f"explicit_mention: flag is {rec.explicit_mention} but the mention-matching rule "
            f"says {mentioned} for target {rec.base.target!r}"
        )
    return violations


# --- canonical JSONL serialization ----------------------------------------

def write_records_jsonl(path, records: Iterable[StanceRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")


def read_records_jsonl(path) -> list[StanceRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(StanceRecord.from_dict(json.loads(line)))
    return out


def write_enriched_jsonl(path, records: Iterable[EnrichedRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")


def read_enriched_jsonl(path) -> list[EnrichedRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(EnrichedRecord.from_dict(json.loads(line)))
    return out
