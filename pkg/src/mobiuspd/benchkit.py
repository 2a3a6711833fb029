"""Robustness-table arithmetic over externally produced prediction files.

Top-1/Top-5 per subset, accuracy drops against a baseline, and the means of
the two four-subset groups (black background and integrated padding).  Scores
are kept as exact rationals internally; display rounds half-up to two
decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

from .mobius import MobiusPdError

__all__ = [
    "MalformedRecordError",
    "MissingSubsetError",
    "PredictionRecord",
    "PredictionSet",
    "Score",
    "Report",
    "score",
    "report",
    "load_predictions_jsonl",
    "render_text",
    "render_csv",
    "BLACK_GROUP",
    "PADDED_GROUP",
]

BLACK_GROUP = ("PD-L", "PD-R", "PD-T", "PD-B")
PADDED_GROUP = ("PD-LI", "PD-RI", "PD-TI", "PD-BI")

MIN_TOPK = 5


class MalformedRecordError(MobiusPdError, ValueError):
    pass


class MissingSubsetError(MobiusPdError, KeyError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    item_id: str
    label: int
    topk: tuple[int, ...]


@dataclass
class PredictionSet:
    records: list[PredictionRecord]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.item_id in seen:
                raise MalformedRecordError(f"duplicate prediction id {rec.item_id!r}")
            seen.add(rec.item_id)
            if len(rec.topk) < MIN_TOPK:
                raise MalformedRecordError(
                    f"record {rec.item_id!r} has {len(rec.topk)} predictions, need >= {MIN_TOPK}"
                )

    def __len__(self):
        return len(self.records)


def load_predictions_jsonl(path: str | Path) -> PredictionSet:
    """One JSON object per line: {"id": ..., "label": int, "topk": [int, ...]}."""
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(PredictionRecord(
                item_id=str(obj["id"]), label=int(obj["label"]),
                topk=tuple(int(v) for v in obj["topk"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecordError(f"{path}:{lineno}: {exc}") from exc
    return PredictionSet(records)


def _round2(value: Fraction) -> str:
    return str((Decimal(value.numerator) / Decimal(value.denominator)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Score:
    """Exact accuracy of one prediction set."""

    top1_correct: int
    top5_correct: int
    total: int

    @property
    def top1(self) -> Fraction:
        return Fraction(100 * self.top1_correct, self.total)

    @property
    def top5(self) -> Fraction:
        return Fraction(100 * self.top5_correct, self.total)

    @property
    def top1_display(self) -> str:
        return _round2(self.top1)

    @property
    def top5_display(self) -> str:
        return _round2(self.top5)


def score(preds: PredictionSet) -> Score:
    """Top-1 / Top-5 percentages (rank-1 match; match within the first five)."""
    if len(preds) == 0:
        raise MalformedRecordError("empty prediction set")
    top1 = sum(1 for r in preds.records if r.topk[0] == r.label)
    top5 = sum(1 for r in preds.records if r.label in r.topk[:5])
    return Score(top1_correct=top1, top5_correct=top5, total=len(preds))


@dataclass
class Report:
    baseline_name: str
    baseline: Score
    subsets: dict[str, Score]
    drops_top1: dict[str, Fraction] = field(default_factory=dict)
    drops_top5: dict[str, Fraction] = field(default_factory=dict)
    group_means_top1: dict[str, Fraction] = field(default_factory=dict)
    group_means_top5: dict[str, Fraction] = field(default_factory=dict)


def report(baseline: PredictionSet, subsets: dict[str, PredictionSet],
           baseline_name: str = "original") -> Report:
    """Score every subset, compute drops vs the baseline, and group means.

    A group mean is emitted when all four members of a group are present; a
    partially supplied group raises MissingSubsetError.
    """
    base = score(baseline)
    scored = {name: score(preds) for name, preds in subsets.items()}
    rep = Report(baseline_name=baseline_name, baseline=base, subsets=scored)
    for name, sc in scored.items():
        rep.drops_top1[name] = base.top1 - sc.top1
        rep.drops_top5[name] = base.top5 - sc.top5
    for group_name, members in (("black", BLACK_GROUP), ("integrated", PADDED_GROUP)):
        present = [m for m in members if m in scored]
        if not present:
            continue
        if len(present) < len(members):
            missing = sorted(set(members) - set(present))
            raise MissingSubsetError(f"group '{group_name}' is missing subsets: {missing}")
        rep.group_means_top1[group_name] = sum(scored[m].top1 for m in members) / len(members)
        rep.group_means_top5[group_name] = sum(scored[m].top5 for m in members) / len(members)
    return rep


def render_text(rep: Report) -> str:
    """Aligned text table, two-decimal half-up display."""
    rows = [("subset", "top1", "top5", "top1 drop", "top5 drop")]
    rows.append((rep.baseline_name, rep.baseline.top1_display, rep.baseline.top5_display, "-", "-"))
    for name in sorted(rep.subsets):
        sc = rep.subsets[name]
        rows.append((name, sc.top1_display, sc.top5_display,
                     _round2(rep.drops_top1[name]), _round2(rep.drops_top5[name])))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    for group, mean in rep.group_means_top1.items():
        lines.append(f"group mean top1 ({group}): {_round2(mean)}")
    for group, mean in rep.group_means_top5.items():
        lines.append(f"group mean top5 ({group}): {_round2(mean)}")
    return "\n".join(lines) + "\n"


def render_csv(rep: Report) -> str:
    lines = ["name,top1,top5,top1_drop,top5_drop"]
    lines.append(f"{rep.baseline_name},{rep.baseline.top1_display},{rep.baseline.top5_display},,")
    for name in sorted(rep.subsets):
        sc = rep.subsets[name]
        lines.append(
            f"{name},{sc.top1_display},{sc.top5_display},"
            f"{_round2(rep.drops_top1[name])},{_round2(rep.drops_top5[name])}"
        )
    for group, mean in rep.group_means_top1.items():
        lines.append(f"group_mean_top1_{group},{_round2(mean)},,,")
    for group, mean in rep.group_means_top5.items():
        lines.append(f"group_mean_top5_{group},,{_round2(mean)},,")
    return "\n".join(lines) + "\n"
