# tests/test_report.py

import csv
import io
import json
import random

import pytest

from src.classify import CategoryLabel
from src.config import ReportConfig
from src.errors import DanglingReferenceError, OutputError, UnsupportedConfidenceError
from src.identifier import IdentifierInventory, IdentifierKind
from src.report import (CategoryCount, ProjectSummary, draw_sample, emit_report, labels_csv_path,
                        largest_remainder_shares, load_report_json, render_labels_csv, render_markdown,
                        render_summary_csv, required_sample_size, similar_percentage, summarize)
from src.taxonomy import Confidence, ParentCategory, TaxonomyCategory
from tests.java_corpus import make_record


@pytest.fixture
def inventory():
    """Provides a project of ten fields, f0 through f9."""
    records = [make_record(f"f{n}", IdentifierKind.FIELD, "int", line=n + 1) for n in range(10)]
    return IdentifierInventory("demo", records, files_scanned=1)


@pytest.fixture
def labels(inventory):
    """Provides four primary labels and one secondary label over the fixture inventory."""
    ids = [record.record_id for record in inventory.records]
    return [
        CategoryLabel(ids[0], ids[1], TaxonomyCategory.STANDARDIZED_REPETITIVE, Confidence.HIGH, "reuse"),
        CategoryLabel(ids[0], ids[1], TaxonomyCategory.COLLIDING, Confidence.LOW, "context", primary=False),
        CategoryLabel(ids[2], ids[3], TaxonomyCategory.STANDARDIZED_REPETITIVE, Confidence.MEDIUM, "reuse"),
        CategoryLabel(ids[4], ids[5], TaxonomyCategory.COLLIDING, Confidence.LOW, "context"),
        CategoryLabel(ids[5], ids[6], TaxonomyCategory.CONCISE_ACRONYM, Confidence.MEDIUM, "initials"),
    ]


# --- Arithmetic ---

@pytest.mark.parametrize("similar, analyzed, places, expected", [
    (267, 295, 2, 90.51),
    (267, 295, 1, 90.5),
    (517, 837, 2, 61.77),
    (129, 1167, 2, 11.05),
    (291, 1206, 2, 24.13),
    (93, 724, 2, 12.85),
    (1, 8, 0, 13.0),
    (1, 16, 1, 6.3),
    (0, 0, 2, 0.0),
])
def test_similar_percentage(similar, analyzed, places, expected):
    """Test half-up rounding of the similar-identifier percentage."""
    assert similar_percentage(similar, analyzed, places) == expected


def test_largest_remainder_shares():
    """Test that rounded shares add up to exactly one hundred."""
    shares = largest_remainder_shares([1, 1, 1])
    assert shares == [33.34, 33.33, 33.33]
    assert largest_remainder_shares([0, 0]) == [0.0, 0.0]
    rng = random.Random(7)
    for _ in range(200):
        counts = [rng.randint(0, 50) for _ in range(13)]
        if sum(counts) == 0:
            continue
        assert sum(round(share * 100) for share in largest_remainder_shares(counts)) == 10000


@pytest.mark.parametrize("population, expected", [
    (0, 0),
    (1, 1),
    (100, 80),
    (494, 217),
    (15688, 376),
])
def test_required_sample_size(population, expected):
    """Test the finite-population sample size at 95% confidence and 5% margin."""
    assert required_sample_size(population) == expected


def test_sample_counts_are_sufficient():
    """Test that known analyzed counts meet the minimum for their project sizes."""
    assert 295 >= required_sample_size(494)
    assert 837 >= required_sample_size(15688)
    largest = max(required_sample_size(population) for population in (1697, 7590, 21876))
    assert all(analyzed >= largest for analyzed in (1167, 1206, 724))


def test_required_sample_size_bounds():
    """Test that sample sizes never exceed the population or the infinite-population size."""
    previous = 0
    for population in range(1, 3000, 37):
        size = required_sample_size(population)
        assert size <= population
        assert size <= 385
        assert size >= previous
        previous = size


def test_required_sample_size_other_levels():
    """Test the 90% and 99% levels and rejection of other levels."""
    assert required_sample_size(10000, 0.90) < required_sample_size(10000) < required_sample_size(10000, 0.99)
    with pytest.raises(UnsupportedConfidenceError):
        required_sample_size(100, 0.8)


def test_draw_sample(inventory):
    """Test that samples are reproducible and capped at the population."""
    assert draw_sample(inventory, 4, seed=3) == draw_sample(inventory, 4, seed=3)
    assert len(draw_sample(inventory, 4)) == 4
    assert len(draw_sample(inventory, 50)) == len(inventory)


# --- Summaries ---

def test_summarize_counts_primary_labels(inventory, labels):
    """Test counts, shares and top categories from primary labels only."""
    summary = summarize(inventory, labels)
    assert summary.total_identifiers == 10
    assert summary.analyzed_identifiers == 10
    assert summary.label_count == 4
    assert summary.similar_identifier_count == 7
    assert summary.similar_pct == 70.0
    assert summary.needs_review_count == 1
    assert summary.category_counts["standardized_repetitive"] == CategoryCount(2, 50.0)
    assert summary.category_counts["colliding"] == CategoryCount(1, 25.0)
    assert summary.top_categories == ["standardized_repetitive", "colliding", "concise_acronym"]
    assert summary.parent_counts[ParentCategory.CONCISE.value].count == 1


def test_summarize_without_labels(inventory):
    """Test a project with no similar identifiers."""
    summary = summarize(inventory, [])
    assert summary.similar_identifier_count == 0
    assert summary.similar_pct == 0.0
    assert summary.top_categories == []
    assert all(count.share == 0.0 for count in summary.category_counts.values())


def test_summarize_is_order_independent(inventory, labels):
    """Test that shuffling the labels does not change the summary."""
    expected = summarize(inventory, labels)
    shuffled = list(labels)
    random.Random(11).shuffle(shuffled)
    assert summarize(inventory, shuffled) == expected


def test_summarize_by_parent(inventory, labels):
    """Test grouping the ranking by parent category."""
    summary = summarize(inventory, labels, ReportConfig(group_by="parent"))
    assert summary.top_categories == ["standardized", "colliding", "concise"]
    assert summary.display_name("concise") == "Concise Variants"


def test_summarize_rejects_dangling_labels(inventory):
    """Test that a label naming an unknown record is an error."""
    first = inventory.records[0].record_id
    with pytest.raises(DanglingReferenceError):
        summarize(inventory, [CategoryLabel(first, "missing", TaxonomyCategory.COLLIDING, Confidence.HIGH, "x")])


def test_summarize_with_sample(inventory, labels):
    """Test that only labels touching the sample count, against the sample size."""
    ids = [record.record_id for record in inventory.records]
    summary = summarize(inventory, labels, sample_ids=frozenset(ids[:3]))
    assert summary.analyzed_identifiers == 3
    assert summary.label_count == 2
    assert summary.similar_identifier_count == 3
    assert summary.similar_pct == 100.0


# --- Rendering ---

@pytest.fixture
def table_summary():
    """Provides a summary for a large project analyzed through a sample."""
    return ProjectSummary(
        project="jackrabbit",
        total_identifiers=15688,
        analyzed_identifiers=295,
        similar_identifier_count=267,
        similar_pct=90.51,
        category_counts={
            "standardized_repetitive": CategoryCount(120, 44.94),
            "colliding": CategoryCount(80, 29.96),
            "concise_abbreviated": CategoryCount(67, 25.1),
        },
        top_categories=["standardized_repetitive", "colliding", "concise_abbreviated"],
        label_count=267,
    )


def test_render_markdown_row(table_summary):
    """Test the results-table row format."""
    text = render_markdown([table_summary])
    lines = text.splitlines()
    assert lines[0] == "| Project | Similarities Count | Top Category | 2nd Category | 3rd Category |"
    assert lines[2] == ("| jackrabbit | 267 (90.51%) | Standardized Repetitive Names (44.94%) | "
                        "Colliding Names (29.96%) | Concise Variants - Abbreviated (25.10%) |")
    assert "### jackrabbit" in text


def test_render_markdown_pads_missing_categories(inventory):
    """Test that projects with fewer than three categories show dashes."""
    text = render_markdown([summarize(inventory, [])])
    assert "| demo | 0 (0.00%) | - | - | - |" in text


def test_render_summary_csv(table_summary):
    """Test the summary CSV header and row."""
    assert render_summary_csv([]).count("\n") == 1
    rows = list(csv.reader(io.StringIO(render_summary_csv([table_summary]))))
    assert rows[0][:5] == ["project", "total_identifiers", "analyzed_identifiers", "similar_count", "similar_pct"]
    assert rows[1][:5] == ["jackrabbit", "15688", "295", "267", "90.51"]
    assert len(rows[0]) == 5 + len(TaxonomyCategory)


def test_render_labels_csv(labels):
    """Test one CSV row per label with review flags."""
    rows = list(csv.reader(io.StringIO(render_labels_csv(labels))))
    assert len(rows) == len(labels) + 1
    assert rows[2][2:6] == ["colliding", "low", "true", "false"]


def test_emit_csv_writes_labels_file(tmp_path, inventory, labels):
    """Test that CSV reports write the labels file next to the summary."""
    out = tmp_path / "report.csv"
    emit_report([summarize(inventory, labels)], labels, "csv", str(out))
    assert out.exists()
    assert labels_csv_path(str(out)) == tmp_path / "report.labels.csv"
    assert (tmp_path / "report.labels.csv").exists()


def test_json_report_round_trip(tmp_path, inventory, labels):
    """Test that a JSON report reads back to the same summaries and labels."""
    summary = summarize(inventory, labels)
    out = tmp_path / "report.json"
    emit_report([summary], labels, "json", str(out))
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["summaries"][0]["similar_pct"] == 70.0
    summaries, loaded = load_report_json(str(out))
    assert summaries == [summary]
    assert loaded == labels


def test_emit_report_unwritable_path(tmp_path, inventory):
    """Test that an unwritable output path is an I/O error."""
    with pytest.raises(OutputError):
        emit_report([summarize(inventory, [])], [], "markdown", str(tmp_path / "missing" / "report.md"))
