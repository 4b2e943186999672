"""Ordinal accuracy metrics over point-pair benchmarks.

SRA(i) is the percent of samples whose predicted ordering matches the
layer-i ground-truth label; ties are always scored incorrect (labels are
strict). Layer preference alpha = SRA(2) - SRA(1): negative means the
model favors the first (usually nearer/reflected) layer. ML-SRA is the
percent of samples correct in both layers simultaneously, which needs
one prediction per layer.

Counts are carried as integers; percentages are derived at full float
precision and only rounded to one decimal when rendering tables.
Aggregation iterates samples in lexicographic id order so emitted
reports are byte-stable regardless of how loads were parallelized.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .benchmark import OrdinalLabel, Subset
from .depthio import Ordering, sample_ordering
from .errors import MissingPrediction, SubsetMismatch

SUBSET_ORDER = ("overall", "same", "reverse")


def matches(ordering: Ordering, label: OrdinalLabel) -> bool:
    """Tie never matches; otherwise compare the predicted side."""
    return ordering is not Ordering.TIE and ordering.value == label.value


def _report_missing(missing: list) -> None:
    shown = ", ".join(missing[:10])
    more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
    raise MissingPrediction(
        missing[0], f"{len(missing)} samples lack predictions: {shown}{more}"
    )


def predicted_orderings(manifest, store, window: int = 1) -> dict:
    """Ordering per sample id from one store; aborts listing missing ids.

    ``store`` may also be a precomputed {sample_id: Ordering} dict, in
    which case it is validated for completeness and passed through.
    """
    ids = manifest.ids
    if isinstance(store, dict):
        missing = [sid for sid in ids if sid not in store]
        if missing:
            _report_missing(missing)
        return {sid: store[sid] for sid in ids}
    missing = store.missing(ids)
    if missing:
        _report_missing(missing)
    out = {}
    for sample in sorted(manifest.samples, key=lambda s: s.id):
        pred = store.load(sample.id)
        out[sample.id] = sample_ordering(pred, sample.p1, sample.p2, window)
    return out


def _as_orderings(manifest, predictions, window: int) -> dict:
    return predicted_orderings(manifest, predictions, window)


@dataclass
class LayerOutcome:
    """Per-sample scoring record. Single-store mode repeats one ordering."""

    sample_id: str
    ordering_l1: Ordering
    ordering_l2: Ordering | None
    layer1_correct: bool
    layer2_correct: bool | None
    tie: bool


@dataclass
class MetricReport:
    """Aggregated counts for one subset; percentages are derived."""

    subset: str
    n: int
    correct1: int
    ties: int
    correct2: int | None = None
    both_correct: int | None = None

    def _pct(self, count) -> float | None:
        if count is None or self.n == 0:
            return None
        return 100.0 * count / self.n

    @property
    def sra1(self) -> float | None:
        return self._pct(self.correct1)

    @property
    def sra2(self) -> float | None:
        return self._pct(self.correct2)

    @property
    def alpha(self) -> float | None:
        # computed from the count difference, not sra2 - sra1: rounding is
        # symmetric under negation, so swapping every label negates alpha
        # bit-exactly for any count pair
        if self.correct2 is None or self.n == 0:
            return None
        return 100.0 * (self.correct2 - self.correct1) / self.n

    @property
    def ml_sra(self) -> float | None:
        return self._pct(self.both_correct)

    @property
    def tie_rate(self) -> float | None:
        return self._pct(self.ties)

    def sra_layer(self, layer: int) -> float | None:
        if layer == 1:
            return self.sra1
        if layer == 2:
            return self.sra2
        raise ValueError(f"layer must be 1 or 2, got {layer}")


def outcomes_single(manifest, predictions, window: int = 1) -> list:
    """Score one store against both layer labels."""
    orderings = _as_orderings(manifest, predictions, window)
    out = []
    for sample in sorted(manifest.samples, key=lambda s: s.id):
        ordering = orderings[sample.id]
        c1 = matches(ordering, sample.layer1)
        c2 = matches(ordering, sample.layer2) if sample.layer2 is not None else None
        out.append(
            LayerOutcome(sample.id, ordering, None, c1, c2, ordering is Ordering.TIE)
        )
    return out


def outcomes_paired(manifest, layer1_predictions, layer2_predictions, window: int = 1) -> list:
    """Score an ordered hypothesis pair: store 1 on layer 1, store 2 on layer 2."""
    ord1 = _as_orderings(manifest, layer1_predictions, window)
    ord2 = _as_orderings(manifest, layer2_predictions, window)
    out = []
    for sample in sorted(manifest.samples, key=lambda s: s.id):
        if sample.layer2 is None:
            raise SubsetMismatch("paired scoring needs a two-layer manifest")
        o1, o2 = ord1[sample.id], ord2[sample.id]
        c1 = matches(o1, sample.layer1)
        c2 = matches(o2, sample.layer2)
        tie = o1 is Ordering.TIE or o2 is Ordering.TIE
        out.append(LayerOutcome(sample.id, o1, o2, c1, c2, tie))
    return out


def tally(outcomes, subset: str) -> MetricReport:
    """Reduce a list of LayerOutcome into one report row."""
    n = len(outcomes)
    correct1 = sum(1 for o in outcomes if o.layer1_correct)
    ties = sum(1 for o in outcomes if o.tie)
    has_l2 = all(o.layer2_correct is not None for o in outcomes) and n > 0
    correct2 = sum(1 for o in outcomes if o.layer2_correct) if has_l2 else None
    paired = all(o.ordering_l2 is not None for o in outcomes) and n > 0
    both = (
        sum(1 for o in outcomes if o.layer1_correct and o.layer2_correct) if paired else None
    )
    return MetricReport(subset, n, correct1, ties, correct2, both)


def _split_by_subset(manifest, outcomes) -> dict:
    subsets = {s.id: s.subset for s in manifest.samples}
    groups = {"overall": list(outcomes), "same": [], "reverse": []}
    for outcome in outcomes:
        key = "same" if subsets[outcome.sample_id] is Subset.SAME else "reverse"
        groups[key].append(outcome)
    return groups


def evaluate_single_store(manifest, store, window: int = 1) -> dict:
    """Per-subset reports for one store. Single-layer manifests get 'overall' only."""
    outcomes = outcomes_single(manifest, store, window)
    if outcomes and outcomes[0].layer2_correct is None:
        return {"overall": tally(outcomes, "overall")}
    groups = _split_by_subset(manifest, outcomes)
    return {name: tally(groups[name], name) for name in SUBSET_ORDER}


def evaluate_two_stores(manifest, layer1_store, layer2_store, window: int = 1) -> dict:
    """Per-subset reports for an ordered hypothesis pair (ML-SRA mode)."""
    outcomes = outcomes_paired(manifest, layer1_store, layer2_store, window)
    groups = _split_by_subset(manifest, outcomes)
    return {name: tally(groups[name], name) for name in SUBSET_ORDER}


def sra(manifest, predictions, layer: int) -> float:
    """Percent of samples whose predicted ordering matches the layer-i label."""
    if layer not in (1, 2):
        raise ValueError(f"layer must be 1 or 2, got {layer}")
    orderings = _as_orderings(manifest, predictions, window=1)
    total = 0
    correct = 0
    for sample in manifest.samples:
        label = sample.layer1 if layer == 1 else sample.layer2
        if label is None:
            raise SubsetMismatch("manifest has no layer-2 labels")
        total += 1
        correct += matches(orderings[sample.id], label)
    if total == 0:
        raise SubsetMismatch("cannot score an empty manifest")
    return 100.0 * correct / total


def layer_preference(sra1: float, sra2: float) -> float:
    """alpha = SRA(2) - SRA(1); positive means second-layer preference."""
    for value in (sra1, sra2):
        if not 0.0 <= value <= 100.0:
            raise ValueError(f"SRA values must be in [0, 100], got {value}")
    return sra2 - sra1


def ml_sra(manifest, layer1_predictions, layer2_predictions, window: int = 1) -> float:
    """Percent of samples correct in both layers simultaneously."""
    outcomes = outcomes_paired(manifest, layer1_predictions, layer2_predictions, window)
    if not outcomes:
        raise SubsetMismatch("cannot score an empty manifest")
    both = sum(1 for o in outcomes if o.layer1_correct and o.layer2_correct)
    return 100.0 * both / len(outcomes)


def sra_gap(report_a: MetricReport, report_b: MetricReport, layer: int = 1) -> float:
    """SRA difference between two reports on the designated layer (a - b)."""
    if report_a.subset != report_b.subset or report_a.n != report_b.n:
        raise SubsetMismatch(
            f"reports disagree: {report_a.subset!r} n={report_a.n} vs "
            f"{report_b.subset!r} n={report_b.n}"
        )
    a = report_a.sra_layer(layer)
    b = report_b.sra_layer(layer)
    if a is None or b is None:
        raise SubsetMismatch(f"layer {layer} SRA undefined on subset {report_a.subset!r}")
    return a - b


def format_percent(value: float | None) -> str:
    return "" if value is None else f"{value:.1f}"


_COLUMNS = ("subset", "n", "sra1", "sra2", "alpha", "ml_sra", "tie_rate")


def _report_row(report: MetricReport) -> list:
    return [
        report.subset,
        str(report.n),
        format_percent(report.sra1),
        format_percent(report.sra2),
        format_percent(report.alpha),
        format_percent(report.ml_sra),
        format_percent(report.tie_rate),
    ]


def reports_to_csv(reports: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for report in reports.values():
        writer.writerow(_report_row(report))
    return buf.getvalue()


def reports_to_markdown(reports: dict) -> str:
    lines = [
        "| " + " | ".join(_COLUMNS) + " |",
        "|" + "|".join(["---"] * len(_COLUMNS)) + "|",
    ]
    for report in reports.values():
        lines.append("| " + " | ".join(_report_row(report)) + " |")
    return "\n".join(lines) + "\n"


def report_to_dict(report: MetricReport) -> dict:
    """Full-precision JSON form: integer counts plus derived percents."""
    return {
        "subset": report.subset,
        "n": report.n,
        "counts": {
            "correct1": report.correct1,
            "correct2": report.correct2,
            "both_correct": report.both_correct,
            "ties": report.ties,
        },
        "sra1": report.sra1,
        "sra2": report.sra2,
        "alpha": report.alpha,
        "ml_sra": report.ml_sra,
        "tie_rate": report.tie_rate,
    }
