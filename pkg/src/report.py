# src/report.py

"""
Per-project summaries of classified labels and the JSON, CSV and Markdown
reports built from them.
"""

import csv
import io
import json
import logging
import math
import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .classify import CategoryLabel
from .config import ReportConfig
from .errors import DanglingReferenceError, DataError, OutputError, UnsupportedConfidenceError
from .identifier import IdentifierInventory, write_text
from .taxonomy import PARENT_DISPLAY_NAMES, Confidence, ParentCategory, TaxonomyCategory

logger = logging.getLogger(__name__)

# Two-sided z scores for the supported confidence levels.
Z_SCORES: Dict[float, str] = {0.90: "1.645", 0.95: "1.96", 0.99: "2.576"}


@dataclass(frozen=True)
class CategoryCount:
    count: int
    share: float


@dataclass
class ProjectSummary:
    """One row of the results table, plus the full per-category breakdown."""
    project: str
    total_identifiers: int
    analyzed_identifiers: int
    similar_identifier_count: int
    similar_pct: float
    category_counts: Dict[str, CategoryCount] = field(default_factory=dict)
    parent_counts: Dict[str, CategoryCount] = field(default_factory=dict)
    top_categories: List[str] = field(default_factory=list)
    needs_review_count: int = 0
    label_count: int = 0
    places: int = 2
    group_by: str = "category"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "project": self.project,
            "total_identifiers": self.total_identifiers,
            "analyzed_identifiers": self.analyzed_identifiers,
            "similar_identifier_count": self.similar_identifier_count,
            "similar_pct": self.similar_pct,
            "label_count": self.label_count,
            "needs_review_count": self.needs_review_count,
            "top_categories": list(self.top_categories),
            "group_by": self.group_by,
            "places": self.places,
            "category_counts": {name: {"count": c.count, "share": c.share}
                                for name, c in self.category_counts.items()},
            "parent_counts": {name: {"count": c.count, "share": c.share}
                              for name, c in self.parent_counts.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProjectSummary":
        def counts(section: Dict[str, Any]) -> Dict[str, CategoryCount]:
            return {name: CategoryCount(int(v["count"]), float(v["share"])) for name, v in section.items()}

        return cls(
            project=data["project"],
            total_identifiers=int(data["total_identifiers"]),
            analyzed_identifiers=int(data["analyzed_identifiers"]),
            similar_identifier_count=int(data["similar_identifier_count"]),
            similar_pct=float(data["similar_pct"]),
            category_counts=counts(data.get("category_counts", {})),
            parent_counts=counts(data.get("parent_counts", {})),
            top_categories=list(data.get("top_categories", [])),
            needs_review_count=int(data.get("needs_review_count", 0)),
            label_count=int(data.get("label_count", 0)),
            places=int(data.get("places", 2)),
            group_by=data.get("group_by", "category"),
        )

    def display_name(self, key: str) -> str:
        if self.group_by == "parent":
            return PARENT_DISPLAY_NAMES[ParentCategory(key)]
        return TaxonomyCategory(key).display_name

    def grouped_counts(self) -> Dict[str, CategoryCount]:
        return self.parent_counts if self.group_by == "parent" else self.category_counts


# --- Arithmetic ---

def similar_percentage(similar: int, analyzed: int, places: int = 2) -> float:
    """similar / analyzed as a percentage, rounded half-up to `places` decimals."""
    if analyzed <= 0:
        return 0.0
    exact = Decimal(similar) * 100 / Decimal(analyzed)
    return float(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def largest_remainder_shares(counts: Sequence[int], places: int = 2) -> List[float]:
    """Percent shares rounded so they add up to exactly 100 (or all zero)."""
    total = sum(counts)
    if total == 0:
        return [0.0 for _ in counts]
    scale = 10 ** places
    quotas = [Fraction(count * 100 * scale, total) for count in counts]
    units = [math.floor(quota) for quota in quotas]
    leftover = 100 * scale - sum(units)
    by_remainder = sorted(range(len(counts)), key=lambda i: (-(quotas[i] - units[i]), i))
    for index in by_remainder[:leftover]:
        units[index] += 1
    return [unit / scale for unit in units]


def _z_score(confidence: float) -> Fraction:
    for level, z in Z_SCORES.items():
        if abs(level - confidence) < 1e-9:
            return Fraction(z)
    raise UnsupportedConfidenceError(confidence, sorted(Z_SCORES))


def required_sample_size(population: int, confidence: float = 0.95, margin: float = 0.05) -> int:
    """
    Minimum sample size for estimating a proportion (p = 0.5) at the given
    confidence and margin of error, corrected for a finite population.
    """
    if population < 1:
        return 0
    z = _z_score(confidence)
    e = Fraction(str(margin))
    p = Fraction(1, 2)
    n0 = z * z * p * (1 - p) / (e * e)
    n = n0 / (1 + (n0 - 1) / population)
    return min(population, math.ceil(n))


def draw_sample(inventory: IdentifierInventory, size: int, seed: int = 0) -> FrozenSet[str]:
    """Uniform sample of record ids, reproducible for a given seed."""
    ids = [record.record_id for record in inventory.records]
    return frozenset(random.Random(seed).sample(ids, min(size, len(ids))))


# --- Summaries ---

def _ranked(counts: Dict[str, CategoryCount]) -> List[str]:
    order = list(counts)
    ranked = sorted((name for name, c in counts.items() if c.count > 0),
                    key=lambda name: (-counts[name].count, order.index(name)))
    return ranked[:3]


def summarize(inventory: IdentifierInventory,
              labels: Iterable[CategoryLabel],
              config: Optional[ReportConfig] = None,
              sample_ids: Optional[FrozenSet[str]] = None) -> ProjectSummary:
    """
    Folds a project's labels into a summary. Only primary labels count.

    Args:
        inventory: The project's full inventory.
        labels: Labels produced for that inventory.
        config: Rounding, grouping and confidence settings.
        sample_ids: When sampling, the analyzed record ids; labels count
                    only if they touch the sample.

    Raises:
        DanglingReferenceError if a label names a record not in the inventory.
    """
    config = config or ReportConfig()
    counted: List[CategoryLabel] = []
    for label in labels:
        for record_id in label.record_ids:
            if record_id not in inventory:
                raise DanglingReferenceError(record_id, label.category.value)
        if not label.primary:
            continue
        if sample_ids is not None and not (label.left_id in sample_ids or label.right_id in sample_ids):
            continue
        counted.append(label)

    analyzed = len(sample_ids) if sample_ids is not None else len(inventory)
    similar_ids = {record_id for label in counted for record_id in label.record_ids}
    if sample_ids is not None:
        similar_ids &= sample_ids

    categories = list(TaxonomyCategory)
    per_category = [sum(1 for label in counted if label.category == category) for category in categories]
    category_shares = largest_remainder_shares(per_category, config.places)
    parents = list(ParentCategory)
    per_parent = [sum(count for category, count in zip(categories, per_category) if category.parent == parent)
                  for parent in parents]
    parent_shares = largest_remainder_shares(per_parent, config.places)

    summary = ProjectSummary(
        project=inventory.project,
        total_identifiers=len(inventory),
        analyzed_identifiers=analyzed,
        similar_identifier_count=len(similar_ids),
        similar_pct=similar_percentage(len(similar_ids), analyzed, config.places),
        category_counts={category.value: CategoryCount(count, share)
                         for category, count, share in zip(categories, per_category, category_shares)},
        parent_counts={parent.value: CategoryCount(count, share)
                       for parent, count, share in zip(parents, per_parent, parent_shares)},
        needs_review_count=sum(1 for label in counted if label.confidence == Confidence.LOW),
        label_count=len(counted),
        places=config.places,
        group_by=config.group_by,
    )
    summary.top_categories = _ranked(summary.grouped_counts())
    return summary


# --- Rendering ---

SUMMARY_COLUMNS = ["project", "total_identifiers", "analyzed_identifiers", "similar_count", "similar_pct"]
LABEL_COLUMNS = ["left_id", "right_id", "category", "confidence", "needs_review", "primary", "rationale", "group_ids"]


def _pct(value: float, places: int) -> str:
    return f"{value:.{places}f}"


def render_json(summaries: Sequence[ProjectSummary], labels: Sequence[CategoryLabel]) -> str:
    document = {
        "summaries": [summary.to_dict() for summary in summaries],
        "labels": [label.to_dict() for label in labels],
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def render_summary_csv(summaries: Sequence[ProjectSummary]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS + [category.value for category in TaxonomyCategory])
    for s in summaries:
        counts = [s.category_counts.get(category.value, CategoryCount(0, 0.0)).count for category in TaxonomyCategory]
        writer.writerow([s.project, s.total_identifiers, s.analyzed_identifiers, s.similar_identifier_count,
                         _pct(s.similar_pct, s.places)] + counts)
    return buffer.getvalue()


def render_labels_csv(labels: Sequence[CategoryLabel]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(LABEL_COLUMNS)
    for label in labels:
        writer.writerow([label.left_id, label.right_id, label.category.value, label.confidence.value,
                         str(label.needs_review).lower(), str(label.primary).lower(), label.rationale,
                         " ".join(label.group_ids)])
    return buffer.getvalue()


def _cell(text: str) -> str:
    return text.replace("|", "\\|")


def render_markdown(summaries: Sequence[ProjectSummary]) -> str:
    lines = [
        "| Project | Similarities Count | Top Category | 2nd Category | 3rd Category |",
        "|---|---|---|---|---|",
    ]
    for s in summaries:
        grouped = s.grouped_counts()
        top = [f"{s.display_name(name)} ({_pct(grouped[name].share, s.places)}%)" for name in s.top_categories]
        top += ["-"] * (3 - len(top))
        count = f"{s.similar_identifier_count} ({_pct(s.similar_pct, s.places)}%)"
        lines.append(f"| {_cell(s.project)} | {count} | " + " | ".join(top) + " |")

    for s in summaries:
        lines += [
            "",
            f"### {s.project}",
            "",
            f"{s.total_identifiers} identifiers, {s.analyzed_identifiers} analyzed, "
            f"{s.label_count} labels, {s.needs_review_count} need review.",
            "",
            "| Category | Labels | Share |",
            "|---|---|---|",
        ]
        for name, c in s.grouped_counts().items():
            if c.count:
                lines.append(f"| {s.display_name(name)} | {c.count} | {_pct(c.share, s.places)}% |")
    return "\n".join(lines) + "\n"


def labels_csv_path(out_path: str) -> Path:
    path = Path(out_path)
    return path.with_name(f"{path.stem}.labels.csv")


def emit_report(summaries: Sequence[ProjectSummary],
                labels: Sequence[CategoryLabel],
                report_format: str = "json",
                out_path: str = "-"):
    """
    Writes the report. CSV output also writes <stem>.labels.csv next to
    out_path, except when writing to standard output.
    """
    if report_format == "json":
        write_text(out_path, render_json(summaries, labels))
    elif report_format == "csv":
        write_text(out_path, render_summary_csv(summaries))
        if out_path != "-":
            write_text(str(labels_csv_path(out_path)), render_labels_csv(labels))
    elif report_format == "markdown":
        write_text(out_path, render_markdown(summaries))
    else:
        raise ValueError(f"Unknown report format '{report_format}'")
    logger.debug("Wrote %s report for %d project(s) to %s", report_format, len(summaries), out_path)


def load_report_json(path: str) -> Tuple[List[ProjectSummary], List[CategoryLabel]]:
    """Reads back a report written with format 'json'."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
        return ([ProjectSummary.from_dict(s) for s in document["summaries"]],
                [CategoryLabel.from_dict(label) for label in document["labels"]])
    except OSError as e:
        raise OutputError(path, e) from e
    except (ValueError, KeyError, TypeError) as e:
        raise DataError(f"Malformed report '{path}': {e}") from e
