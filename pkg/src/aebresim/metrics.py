"""Inter-rater agreement and classifier-vs-rater deviation metrics.

Implements Krippendorff's alpha (nominal/ordinal/interval) on a ratings
matrix with missing values, the full-agreement rate, deviation tables
against the rule-set references, and aggregated agreement-level
distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .classifier import Classification, Verdict
from .errors import InsufficientData, MissingRating, UnclassifiedEvent
from .store import Annotation

AGREEMENT_LEVELS = {
    1: "Strongly Disagree",
    2: "Somewhat Disagree",
    3: "Neutral",
    4: "Somewhat Agree",
    5: "Strongly Agree",
}

#: rule-set verdicts mapped onto the extreme Likert answers for the
#: unbiased Q4 reference column
VERDICT_REFERENCE = {Verdict.TCPR: 5, Verdict.FCPR: 1}


@dataclass
class RatingsMatrix:
    """Items x raters matrix of optional Likert values (1..5)."""

    items: list[str]
    raters: list[str]
    values: list[list[int | None]]

    def __post_init__(self):
        if len(self.raters) < 2:
            raise ValueError("need at least 2 raters")
        if not self.items:
            raise ValueError("need at least 1 item")
        if len(self.values) != len(self.items):
            raise ValueError("one value row per item required")
        for row in self.values:
            if len(row) != len(self.raters):
                raise ValueError("one value per rater required")
            for v in row:
                if v is not None and (not isinstance(v, int) or not 1 <= v <= 5):
                    raise ValueError(f"ratings must be integers in 1..5, got {v!r}")

    @classmethod
    def from_annotations(cls, annotations: Iterable[Annotation], question: str) -> "RatingsMatrix":
        """Build the matrix for one question (``q1`` .. ``q5``)."""
        by_key: dict[tuple[str, str], int | None] = {}
        items: list[str] = []
        raters: list[str] = []
        for a in annotations:
            if a.event_id not in items:
                items.append(a.event_id)
            if a.rater_id not in raters:
                raters.append(a.rater_id)
            by_key[(a.event_id, a.rater_id)] = getattr(a, question)
        items.sort()
        raters.sort()
        values = [[by_key.get((i, r)) for r in raters] for i in items]
        return cls(items=items, raters=raters, values=values)


@dataclass
class AlphaResult:
    value: float
    degenerate: bool = False  # all observed values identical; alpha undefined

    def __float__(self) -> float:
        return self.value


def _delta_sq(categories: list[int], marginals: np.ndarray, metric: str) -> np.ndarray:
    k = len(categories)
    d = np.zeros((k, k))
    for i, c in enumerate(categories):
        for j, g in enumerate(categories):
            if i == j:
                continue
            lo, hi = min(i, j), max(i, j)
            if metric == "nominal":
                d[i, j] = 1.0
            elif metric == "interval":
                d[i, j] = float(c - g) ** 2
            elif metric == "ordinal":
                span = marginals[lo:hi + 1].sum()
                d[i, j] = (span - (marginals[lo] + marginals[hi]) / 2.0) ** 2
            else:
                raise ValueError(f"unknown metric {metric!r}")
    return d


def krippendorff_alpha(m: RatingsMatrix, metric: str = "ordinal") -> AlphaResult:
    """Chance-corrected agreement from the coincidence matrix.

    Missing ratings are excluded from pairing and items with fewer than
    two ratings contribute nothing.  When every pairable value is
    identical the coefficient is undefined; by convention 1.0 is
    returned with the ``degenerate`` flag set.
    """
    units = [[v for v in row if v is not None] for row in m.values]
    units = [u for u in units if len(u) >= 2]
    if not units:
        raise InsufficientData("no item has two or more ratings")

    categories = sorted({v for u in units for v in u})
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)
    coincidence = np.zeros((k, k))
    for u in units:
        weight = 1.0 / (len(u) - 1)
        for a in u:
            for b in u:
                coincidence[index[a], index[b]] += weight
        for a in u:  # remove self-pairs counted above
            coincidence[index[a], index[a]] -= weight

    marginals = coincidence.sum(axis=1)
    n = marginals.sum()
    if k < 2:
        return AlphaResult(value=1.0, degenerate=True)
    delta = _delta_sq(categories, marginals, metric)
    d_o = float((coincidence * delta).sum() / n)
    d_e = float((np.outer(marginals, marginals) * delta).sum() / (n * (n - 1.0)))
    if d_e == 0.0:
        return AlphaResult(value=1.0, degenerate=True)
    return AlphaResult(value=1.0 - d_o / d_e)


def full_agreement_rate(m: RatingsMatrix) -> float:
    """Fraction of items on which every rater gave the identical value."""
    unanimous = 0
    for item, row in zip(m.items, m.values):
        if any(v is None for v in row):
            raise MissingRating(f"item {item} lacks a rating from every rater")
        unanimous += len(set(row)) == 1
    return unanimous / len(m.items)


@dataclass
class DeviationTable:
    """Mean absolute rating deviations (layout of the labeler table).

    ``pairwise[i][j]`` compares rater i against rater j on Q4;
    ``cpr_q4`` compares each rater's Q4 against the verdicts mapped to
    the extreme answers; ``cpr_q5`` is the mean (5 - q5) post-reveal
    disagreement.  ``averages`` holds per-column means.
    """

    raters: list[str]
    pairwise: list[list[float]]
    cpr_q4: dict[str, float]
    cpr_q5: dict[str, float] | None
    averages: dict[str, float] = field(default_factory=dict)


def _annotations_by_event(annotations: Iterable[Annotation]):
    by_event: dict[str, dict[str, Annotation]] = {}
    for a in annotations:
        by_event.setdefault(a.event_id, {})[a.rater_id] = a
    return by_event


def deviation_table(
    annotations: Iterable[Annotation],
    classifications: Mapping[str, Classification],
    include_q5: bool = True,
) -> DeviationTable:
    by_event = _annotations_by_event(annotations)
    if not by_event:
        raise MissingRating("no annotations")
    raters = sorted({r for slot in by_event.values() for r in slot})
    events = sorted(by_event)
    for eid in events:
        if eid not in classifications:
            raise UnclassifiedEvent(eid)
        for r in raters:
            a = by_event[eid].get(r)
            if a is None:
                raise MissingRating(f"event {eid} lacks rater {r}")
            if include_q5 and a.q5 is None:
                raise MissingRating(f"event {eid} rater {r} lacks q5")

    n = len(events)
    pairwise = [[0.0] * len(raters) for _ in raters]
    for i, ri in enumerate(raters):
        for j, rj in enumerate(raters):
            if i == j:
                continue
            pairwise[i][j] = sum(
                abs(by_event[e][ri].q4 - by_event[e][rj].q4) for e in events) / n

    cpr_q4 = {}
    cpr_q5: dict[str, float] | None = {} if include_q5 else None
    for r in raters:
        refs = [VERDICT_REFERENCE[classifications[e].verdict] for e in events]
        cpr_q4[r] = sum(abs(by_event[e][r].q4 - ref) for e, ref in zip(events, refs)) / n
        if include_q5:
            cpr_q5[r] = sum(5 - by_event[e][r].q5 for e in events) / n

    averages = {}
    if len(raters) > 1:
        for j, r in enumerate(raters):
            col = [pairwise[i][j] for i in range(len(raters)) if i != j]
            averages[r] = sum(col) / len(col)
    averages["CPr-Q4"] = sum(cpr_q4.values()) / len(raters)
    if include_q5:
        averages["CPr-Q5"] = sum(cpr_q5.values()) / len(raters)
    return DeviationTable(raters=raters, pairwise=pairwise, cpr_q4=cpr_q4,
                          cpr_q5=cpr_q5, averages=averages)


def _aggregate(values: list[int], how: str) -> int:
    ordered = sorted(values)
    if how == "min":
        return ordered[0]
    if how == "max":
        return ordered[-1]
    if how == "median":
        return ordered[(len(ordered) - 1) // 2]  # lower median on even counts
    raise ValueError(f"unknown aggregator {how!r}")


def aggregate_agreement(
    annotations: Iterable[Annotation],
    classifications: Mapping[str, Classification],
    aggregator: str,
) -> dict[str, dict[int, float]]:
    """Distribution of aggregated Q5 levels per verdict class, in percent."""
    by_event = _annotations_by_event(annotations)
    counts: dict[str, dict[int, int]] = {}
    totals: dict[str, int] = {}
    for eid in sorted(by_event):
        cls = classifications.get(eid)
        if cls is None:
            raise UnclassifiedEvent(eid)
        q5s = [a.q5 for a in by_event[eid].values() if a.q5 is not None]
        if not q5s:
            raise MissingRating(f"event {eid} has no q5 rating")
        level = _aggregate(q5s, aggregator)
        verdict = cls.verdict.value
        counts.setdefault(verdict, {i: 0 for i in range(1, 6)})[level] += 1
        totals[verdict] = totals.get(verdict, 0) + 1
    return {
        verdict: {lvl: 100.0 * c / totals[verdict] for lvl, c in levels.items()}
        for verdict, levels in counts.items()
    }


# --- report assembly --------------------------------------------------------

def build_agreement_report(
    annotations: list[Annotation],
    classifications: Mapping[str, Classification],
) -> dict:
    """Machine-readable report covering alpha, agreement and deviations.

    Sections that need complete data (deviation and aggregate tables)
    degrade to an error note instead of failing the whole report.
    """
    report: dict = {
        "n_annotations": len(annotations),
        "n_events_annotated": len({a.event_id for a in annotations}),
        "raters": sorted({a.rater_id for a in annotations}),
        "verdict_counts": {},
        "alpha": {},
        "full_agreement": {},
    }
    for cls in classifications.values():
        v = cls.verdict.value
        report["verdict_counts"][v] = report["verdict_counts"].get(v, 0) + 1

    if not annotations:
        report["note"] = "no annotations available"
        return report

    for q in ("q1", "q2", "q3", "q4", "q5"):
        try:
            matrix = RatingsMatrix.from_annotations(annotations, q)
            alpha = krippendorff_alpha(matrix, metric="ordinal")
            report["alpha"][q] = {"value": alpha.value, "degenerate": alpha.degenerate}
        except (InsufficientData, ValueError) as exc:
            # degenerate annotation sets (single rater, no pairable values)
            report["alpha"][q] = {"error": str(exc)}
            report["full_agreement"][q] = None
            continue
        try:
            report["full_agreement"][q] = full_agreement_rate(matrix)
        except MissingRating:
            report["full_agreement"][q] = None

    try:
        table = deviation_table(annotations, classifications)
        report["deviation"] = {
            "raters": table.raters,
            "pairwise": table.pairwise,
            "cpr_q4": table.cpr_q4,
            "cpr_q5": table.cpr_q5,
            "averages": table.averages,
        }
    except (MissingRating, UnclassifiedEvent) as exc:
        report["deviation"] = {"error": str(exc)}

    try:
        report["aggregate"] = {
            how: aggregate_agreement(annotations, classifications, how)
            for how in ("min", "median", "max")
        }
    except (MissingRating, UnclassifiedEvent) as exc:
        report["aggregate"] = {"error": str(exc)}
    return report


def render_report_text(report: dict) -> str:
    """Plain-text tables mirroring the evaluation layout."""
    lines: list[str] = []
    lines.append("Alpha and full agreement per question")
    lines.append(f"{'Question':<10}{'Alpha':>10}{'Full agreement':>18}")
    for q in ("q1", "q2", "q3", "q4", "q5"):
        a = report.get("alpha", {}).get(q, {})
        alpha_s = f"{a['value']:.3f}" if "value" in a else "n/a"
        fa = report.get("full_agreement", {}).get(q)
        fa_s = f"{100.0 * fa:.1f}%" if fa is not None else "n/a"
        lines.append(f"{q.upper():<10}{alpha_s:>10}{fa_s:>18}")
    lines.append("")

    dev = report.get("deviation")
    if dev and "error" not in dev:
        raters = dev["raters"]
        lines.append("Average deviation between labelers and rule set")
        header = f"{'':<12}" + "".join(f"{r:>12}" for r in raters) + f"{'CPr-Q4':>12}"
        if dev.get("cpr_q5") is not None:
            header += f"{'CPr-Q5':>12}"
        lines.append(header)
        for i, r in enumerate(raters):
            row = f"{r:<12}"
            for j in range(len(raters)):
                row += f"{'-':>12}" if i == j else f"{dev['pairwise'][i][j]:>12.3f}"
            row += f"{dev['cpr_q4'][r]:>12.3f}"
            if dev.get("cpr_q5") is not None:
                row += f"{dev['cpr_q5'][r]:>12.3f}"
            lines.append(row)
        row = f"{'Average':<12}"
        for r in raters:
            avg = dev["averages"].get(r)
            row += f"{'-':>12}" if avg is None else f"{avg:>12.3f}"
        row += f"{dev['averages']['CPr-Q4']:>12.3f}"
        if dev.get("cpr_q5") is not None:
            row += f"{dev['averages']['CPr-Q5']:>12.3f}"
        lines.append(row)
        lines.append("")

    agg = report.get("aggregate")
    if agg and "error" not in agg:
        verdicts = sorted({v for how in agg.values() for v in how})
        lines.append("Aggregated agreement levels (percent)")
        for how in ("min", "median", "max"):
            lines.append(f"[{how}]")
            lines.append(f"{'Agreement level':<20}" + "".join(f"{v:>10}" for v in verdicts))
            for lvl in range(1, 6):
                row = f"{AGREEMENT_LEVELS[lvl]:<20}"
                for v in verdicts:
                    pct = agg[how].get(v, {}).get(lvl, 0.0)
                    row += f"{pct:>9.1f}%"
                lines.append(row)
        lines.append("")
    return "\n".join(lines)
