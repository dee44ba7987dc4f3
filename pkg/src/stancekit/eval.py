"""Metrics, target-dependency analysis, and the enrichment-size ablation.

Macro metrics weigh every class equally. The 2-class mode keeps the None
label for training but discards gold-None rows at evaluation time; a
predicted None still counts as a miss for the polar gold class.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import StanceLabel
from .errors import EmptyAfterFiltering, LengthMismatch, SizeExceedsPool

LABEL_ORDER = (StanceLabel.FAVOR, StanceLabel.AGAINST, StanceLabel.NONE)
_IDX = {lab: i for i, lab in enumerate(LABEL_ORDER)}

CLASS_SETS = {
    "3-class": (StanceLabel.FAVOR, StanceLabel.AGAINST, StanceLabel.NONE),
    "2-class": (StanceLabel.FAVOR, StanceLabel.AGAINST),
}

KL_FLOOR = 1e-12


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; rows are gold labels, columns are predictions."""

    counts: tuple

    @classmethod
    def from_pairs(cls, preds, golds) -> "ConfusionMatrix":
        m = [[0, 0, 0] for _ in range(3)]
        for p, g in zip(preds, golds):
            m[_IDX[g]][_IDX[p]] += 1
        return cls(counts=tuple(tuple(row) for row in m))

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def tp(self, lab: StanceLabel) -> int:
        i = _IDX[lab]
        return self.counts[i][i]

    def fp(self, lab: StanceLabel) -> int:
        j = _IDX[lab]
        return sum(self.counts[i][j] for i in range(3)) - self.counts[j][j]

    def fn(self, lab: StanceLabel) -> int:
        i = _IDX[lab]
        return sum(self.counts[i]) - self.counts[i][i]


@dataclass(frozen=True)
class MetricsReport:
    class_set: str
    per_class: dict  # label value -> {"precision", "recall", "f1"}
    macro_precision: float
    macro_recall: float
    macro_f1: float
    evaluated: int
    confusion: ConfusionMatrix

    def to_dict(self) -> dict:
        return {
            "class_set": self.class_set,
            "per_class": {k: dict(v) for k, v in self.per_class.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "evaluated": self.evaluated,
        }

    def to_table(self, name: str = "") -> str:
        lines = [f"{'Test Set':<24}{'F1':>10}{'Precision':>12}{'Recall':>10}"]
        lines.append(
            f"{name or self.class_set:<24}{self.macro_f1:>10.4f}"
            f"{self.macro_precision:>12.4f}{self.macro_recall:>10.4f}"
        )
        return "\n".join(lines)


def macro_metrics(preds: Sequence[StanceLabel], golds: Sequence[StanceLabel],
                  class_set: str = "3-class") -> MetricsReport:
    """Unweighted macro P/R/F1 over the declared class set.

    Zero denominators yield 0 for the affected statistic, so reports stay
    total on degenerate inputs.
    """
    if len(preds) != len(golds):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(golds)} golds")
    if not preds:
        raise LengthMismatch("cannot evaluate zero records")
    if class_set not in CLASS_SETS:
        raise ValueError(f"class_set must be one of {sorted(CLASS_SETS)}")

    if class_set == "2-class":
        pairs = [(p, g) for p, g in zip(preds, golds) if g is not StanceLabel.NONE]
        if not pairs:
            raise EmptyAfterFiltering("2-class evaluation with all-None gold labels")
        preds = [p for p, _ in pairs]
        golds = [g for _, g in pairs]

    cm = ConfusionMatrix.from_pairs(preds, golds)
    per_class = {}
    for lab in CLASS_SETS[class_set]:
        tp, fp, fn = cm.tp(lab), cm.fp(lab), cm.fn(lab)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[lab.value] = {"precision": precision, "recall": recall, "f1": f1}
    macro = {
        k: sum(per_class[lab.value][k] for lab in CLASS_SETS[class_set]) / len(CLASS_SETS[class_set])
        for k in ("precision", "recall", "f1")
    }
    return MetricsReport(
        class_set=class_set,
        per_class=per_class,
        macro_precision=macro["precision"],
        macro_recall=macro["recall"],
        macro_f1=macro["f1"],
        evaluated=len(preds),
        confusion=cm,
    )


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) over the 3 classes, floored and renormalized."""
    p = np.maximum(np.asarray(p, dtype=np.float64), KL_FLOOR)
    q = np.maximum(np.asarray(q, dtype=np.float64), KL_FLOOR)
    p = p / p.sum()
    q = q / q.sum()
    return float(np.sum(p * np.log(p / q)))


def kl_target_dependency(model, test_records) -> float:
    """Mean per-record KL between target-conditioned and target-free predictions.

    P is the prediction with the specified target, Q the prediction with
    an empty target slot; larger values mean the model conditions more on
    the target. Invariant to record order.
    """
    test_records = list(test_records)
    if not test_records:
        raise ValueError("test set must be non-empty")
    total = 0.0
    for rec in test_records:
        p = model.predict_proba(rec, with_target=True)
        q = model.predict_proba(rec, with_target=False)
        total += kl_divergence(p, q)
    return total / len(test_records)


@dataclass(frozen=True)
class AblationPoint:
    enriched_size: int
    reports: dict  # test-set name -> MetricsReport


@dataclass(frozen=True)
class AblationCurve:
    points: tuple

    def __post_init__(self) -> None:
        sizes = [p.enriched_size for p in self.points]
        if sorted(set(sizes)) != sizes:
            raise ValueError("ablation sizes must be strictly increasing")

    def to_csv(self, path) -> None:
        names = sorted({n for p in self.points for n in p.reports})
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["size"] + [f"f1_{n}" for n in names])
            for p in self.points:
                writer.writerow(
                    [p.enriched_size] + [f"{p.reports[n].macro_f1:.6f}" if n in p.reports else "" for n in names]
                )


def run_ablation(base_train, valid_records, enriched_pool, sizes, config,
                 test_sets: dict, class_set: str = "3-class") -> AblationCurve:
    """Retrain at each enriched-pool prefix size and evaluate on every test set.

    The pool is shuffled once with the config seed and the shuffle is
    shared across sizes, so each curve point trains on a superset of the
    previous one.
    """
    from .model.training import train  # late import: eval stays model-free otherwise

    sizes = list(sizes)
    if sorted(set(sizes)) != sizes:
        raise ValueError("sizes must be strictly increasing without duplicates")
    pool = list(enriched_pool)
    if sizes and sizes[-1] > len(pool):
        raise SizeExceedsPool(f"size {sizes[-1]} exceeds pool of {len(pool)}")
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(pool))
    points = []
    for size in sizes:
        extra = [pool[i] for i in order[:size]]
        result = train(list(base_train) + extra, valid_records, config)
        reports = {}
        for name, records in test_sets.items():
            preds = [result.model.predict(r) for r in records]
            golds = [r.label for r in records]
            reports[name] = macro_metrics(preds, golds, class_set)
        points.append(AblationPoint(enriched_size=size, reports=reports))
    return AblationCurve(points=tuple(points))
