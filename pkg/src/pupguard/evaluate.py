"""Confusion matrices, the five headline metrics, and experiment runners.

The positive class is the legitimate attempt; a false positive is an attack
predicted normal, making FPR the security-critical rate. This inverts some
communities' convention, so it is stated here once and used everywhere.
Percentages print with two decimals, half-up.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .classify import Prediction, Verdict
from .config import PipelineConfig
from .dataset import Dataset, Label, split_dataset
from .errors import DatasetError
from .pipeline import PipelineModel, fit_pipeline, score_dataset

METRIC_NAMES = ("accuracy", "fpr", "recall", "precision", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int  # legitimate predicted normal
    fp: int  # attack predicted normal
    tn: int  # attack predicted anomalous
    fn: int  # legitimate predicted anomalous

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    cm: ConfusionMatrix
    accuracy: float
    fpr: float
    recall: float
    precision: float
    f1: float
    undefined: frozenset[str] = frozenset()

    def metric(self, name: str) -> float:
        return getattr(self, name)

    def format_text(self) -> str:
        cm = self.cm
        lines = [
            f"confusion: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}",
            f"accuracy  {self.format_metric('accuracy')}",
            f"fpr       {self.format_metric('fpr')}",
            f"recall    {self.format_metric('recall')}",
            f"precision {self.format_metric('precision')}",
            f"f1        {self.format_metric('f1')}",
        ]
        return "\n".join(lines)

    def format_metric(self, name: str) -> str:
        if name in self.undefined:
            return "undefined (0/0)"
        value = self.metric(name)
        if name == "f1":
            return str(_round_half_up(value, 2))
        return f"{_round_half_up(value * 100.0, 2)}%"

    def csv_rows(self) -> list[tuple[str, str]]:
        rows = []
        for name in METRIC_NAMES:
            value = "nan" if name in self.undefined else repr(self.metric(name))
            rows.append((name, value))
        return rows


def _round_half_up(value: float, places: int) -> Decimal:
    return Decimal(repr(value)).quantize(
        Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP
    )


def confusion(
    verdicts: Sequence[Verdict], labels: Mapping[str, Label]
) -> ConfusionMatrix:
    """Count outcomes against ground truth; every verdict must be labeled."""
    tp = fp = tn = fn = 0
    for v in verdicts:
        label = labels.get(v.pair_id)
        if label is None or label is Label.UNLABELED:
            raise DatasetError(f"pair {v.pair_id} has no ground-truth label")
        normal = v.prediction is Prediction.NORMAL
        if label is Label.LEGITIMATE:
            tp += normal
            fn += not normal
        else:
            fp += normal
            tn += not normal
    return ConfusionMatrix(tp, fp, tn, fn)


def metrics(cm: ConfusionMatrix) -> EvalReport:
    """Apply the five metric formulas; zero denominators are flagged, not 0."""
    undefined = set()

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            undefined.add(name)
            return math.nan
        return num / den

    accuracy = ratio(cm.tp + cm.tn, cm.total, "accuracy")
    fpr = ratio(cm.fp, cm.fp + cm.tn, "fpr")
    recall = ratio(cm.tp, cm.tp + cm.fn, "recall")
    precision = ratio(cm.tp, cm.tp + cm.fp, "precision")
    if "recall" in undefined or "precision" in undefined or precision + recall == 0:
        undefined.add("f1")
        f1 = math.nan
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return EvalReport(cm, accuracy, fpr, recall, precision, f1, frozenset(undefined))


@dataclass(frozen=True)
class PipelineOutcome:
    """Report plus raw verdicts (and per-channel reports for decision fusion)."""

    report: EvalReport
    verdicts: tuple[Verdict, ...]
    channel_reports: Mapping[str, EvalReport]
    model: PipelineModel


def run_pipeline(
    train: Dataset, test: Dataset, cfg: PipelineConfig
) -> PipelineOutcome:
    """Fit on train only, score test, report.

    Train must be one-class (legitimate only); test must be fully labeled.
    """
    pm = fit_pipeline(train, cfg)
    return evaluate_model(pm, test)


def evaluate_model(pm: PipelineModel, test: Dataset) -> PipelineOutcome:
    labels = test.labels()
    all_verdicts = score_dataset(pm, test)
    channel_reports = {
        name: metrics(confusion(vs, labels))
        for name, vs in all_verdicts.items()
        if name != "fused"
    }
    fused = all_verdicts["fused"]
    return PipelineOutcome(
        report=metrics(confusion(fused, labels)),
        verdicts=tuple(fused),
        channel_reports=channel_reports,
        model=pm,
    )


def sweep(
    train: Dataset,
    test: Dataset,
    fractions: Sequence[float],
    cfg: PipelineConfig,
    seed: int,
    by_subject: bool = False,
) -> list[tuple[float, EvalReport]]:
    """Re-run the pipeline on growing prefixes of a single shuffle of train.

    Because each fraction takes a prefix of the same seeded shuffle, smaller
    training sets are nested inside larger ones.
    """
    if not fractions:
        raise ValueError("need at least one fraction")
    if sorted(fractions) != list(fractions):
        raise ValueError("fractions must be sorted ascending")
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValueError("fractions must lie in (0, 1]")
    rows = []
    for fraction in fractions:
        subset, _ = split_dataset(train, fraction, seed, by_subject=by_subject)
        outcome = run_pipeline(subset, test, cfg)
        rows.append((fraction, outcome.report))
    return rows


def sweep_csv(rows: Sequence[tuple[float, EvalReport]]) -> str:
    buf = io.StringIO()
    buf.write("fraction,accuracy,fpr,recall,precision,f1\n")
    for fraction, report in rows:
        values = [
            "nan" if name in report.undefined else repr(report.metric(name))
            for name in METRIC_NAMES
        ]
        buf.write(f"{fraction}," + ",".join(values) + "\n")
    return buf.getvalue()
