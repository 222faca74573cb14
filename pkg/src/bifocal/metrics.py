"""Classification metrics, alignment recall, and download-decile curves."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyGold

DECILE_PERCENTS = tuple(range(0, 101, 10))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix, rows = gold label, columns = predicted label."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.counts) != n or any(len(row) != n for row in self.counts):
            raise ValueError("confusion matrix must be square over labels")
        if any(cell < 0 for row in self.counts for cell in row):
            raise ValueError("confusion matrix counts must be non-negative")

    def index(self, label: str) -> int:
        return self.labels.index(label)


def confusion_matrix(gold, predicted, labels=None) -> ConfusionMatrix:
    """Tally gold/predicted label sequences into a matrix."""
    gold = list(gold)
    predicted = list(predicted)
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted must have equal length")
    if labels is None:
        labels = tuple(sorted(set(gold) | set(predicted)))
    else:
        labels = tuple(labels)
    pos = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for g, p in zip(gold, predicted):
        counts[pos[g]][pos[p]] += 1
    return ConfusionMatrix(labels=labels, counts=tuple(tuple(row) for row in counts))


def prf(cm: ConfusionMatrix, label: str) -> tuple[float, float, float]:
    """Precision, recall, F1 for one label; zero denominators yield 0."""
    i = cm.index(label)
    tp = cm.counts[i][i]
    predicted = sum(row[i] for row in cm.counts)
    gold = sum(cm.counts[i])
    precision = tp / predicted if predicted else 0.0
    recall = tp / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def macro_prf(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """Unweighted means of per-label precision, recall, and F1."""
    if not cm.labels:
        raise ValueError("confusion matrix has no labels")
    rows = [prf(cm, label) for label in cm.labels]
    n = len(rows)
    return (
        sum(r[0] for r in rows) / n,
        sum(r[1] for r in rows) / n,
        sum(r[2] for r in rows) / n,
    )


def alignment_recall(predicted, gold) -> float:
    """|predicted ∩ gold| / |gold| over pair sets.

    Raises:
        EmptyGold: the gold set is empty.
    """
    gold = set(gold)
    if not gold:
        raise EmptyGold("recall is undefined for an empty gold set")
    return len(set(predicted) & gold) / len(gold)


def soft_alignment_recall(predicted, gold, equiv=None) -> float:
    """Recall where a gold pair is hit by any prediction in the same
    equivalence classes componentwise.  With the identity mapping (the
    default) this equals plain recall."""
    gold = set(gold)
    if not gold:
        raise EmptyGold("recall is undefined for an empty gold set")
    if equiv is None:
        equiv = lambda url: url
    predicted_classes = {(equiv(a), equiv(b)) for a, b in predicted}
    hits = sum(1 for a, b in gold if (equiv(a), equiv(b)) in predicted_classes)
    return hits / len(gold)


@dataclass(frozen=True)
class DecileCurve:
    """Cumulative hit counts at 0%,10%,...,100% of downloads."""

    points: tuple[tuple[int, int], ...]

    def __post_init__(self):
        percents = tuple(p for p, _ in self.points)
        if percents != DECILE_PERCENTS:
            raise ValueError("curve must have the 11 decile points")
        counts = [c for _, c in self.points]
        if counts[0] != 0 or any(a > b for a, b in zip(counts, counts[1:])):
            raise ValueError("curve must start at 0 and be non-decreasing")

    def counts(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.points)


def _site_curve_counts(hits: "list[bool]") -> list[int]:
    total = len(hits)
    out = []
    for percent in DECILE_PERCENTS:
        prefix = (percent * total) // 100
        out.append(sum(1 for h in hits[:prefix] if h))
    return out


def decile_curve(events) -> DecileCurve:
    """Aggregate curve over ``(site, is_hit)`` download events in crawl order.

    Deciles are taken per site against that site's own download total, then
    summed across sites.  An empty log yields the all-zero curve.
    """
    per_site: dict[str, list[bool]] = {}
    for site, hit in events:
        per_site.setdefault(site, []).append(bool(hit))
    totals = [0] * len(DECILE_PERCENTS)
    for hits in per_site.values():
        for i, count in enumerate(_site_curve_counts(hits)):
            totals[i] += count
    return DecileCurve(points=tuple(zip(DECILE_PERCENTS, totals)))


def write_curve_tsv(curve: DecileCurve, path, header: bool = True) -> None:
    """Write ``percent<TAB>count`` rows; the '#' header keeps the file
    directly consumable by gnuplot."""
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write("# percent\tparallel_documents\n")
        for percent, count in curve.points:
            handle.write(f"{percent}\t{count}\n")
