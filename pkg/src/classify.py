# src/classify.py

"""
Maps candidate pairs to taxonomy labels.

Pairwise detectors run in precedence order (see taxonomy.PRECEDENCE);
the numeric detectors work on groups of records sharing a numeric stem
and run as a pre-pass over the whole inventory.
"""

import json
import logging
import re
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .config import ClassifyConfig
from .errors import DanglingReferenceError, MalformedLabelsError, OutputError
from .identifier import VARIABLE_KINDS, IdentifierInventory, IdentifierKind, IdentifierRecord, write_text
from .lexicon import (AbbreviationDictionary, default_dictionary, has_temporary_affix,
                      is_abbreviation_of, is_acronym_of, is_plural_of, normalize_name,
                      split_name, strip_numeric_suffix)
from .pairing import (CandidatePair, ScopeRelation, TypeRegistry, TypeRelation, build_pair,
                      default_registry, erase, normalize_type)
from .taxonomy import PRECEDENCE_RANK, Confidence, TaxonomyCategory

logger = logging.getLogger(__name__)

JAVA_KEYWORDS = frozenset({
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "var", "record", "yield", "true", "false", "null",
})
INTEGER_TYPES = frozenset({"int", "long", "short", "byte", "Integer", "Long", "Short", "Byte"})
ABBREVIATION_TYPE_GATE = frozenset({
    TypeRelation.IDENTICAL, TypeRelation.SUBTYPE, TypeRelation.SUPERTYPE, TypeRelation.UNKNOWN,
})
_WORD = re.compile(r"[A-Za-z_$][\w$]*")
_LITERAL = re.compile(r"\"(?:\\.|[^\"\\])*\"|'(?:\\.|[^'\\])*'")


@dataclass(frozen=True)
class CategoryLabel:
    """
    A category assigned to a pair of records. Numeric group labels also
    carry the ids of every group member.
    """
    left_id: str
    right_id: str
    category: TaxonomyCategory
    confidence: Confidence
    rationale: str
    primary: bool = True
    group_ids: Tuple[str, ...] = ()

    @property
    def needs_review(self) -> bool:
        return self.confidence == Confidence.LOW

    @property
    def key(self) -> Tuple[str, str]:
        return (self.left_id, self.right_id)

    @property
    def record_ids(self) -> Tuple[str, ...]:
        return (self.left_id, self.right_id)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "left_id": self.left_id,
            "right_id": self.right_id,
            "category": self.category.value,
            "confidence": self.confidence.value,
            "rationale": self.rationale,
            "needs_review": self.needs_review,
            "primary": self.primary,
        }
        if self.group_ids:
            data["group_ids"] = list(self.group_ids)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CategoryLabel":
        label = cls(
            left_id=str(data["left_id"]),
            right_id=str(data["right_id"]),
            category=TaxonomyCategory(data["category"]),
            confidence=Confidence(data["confidence"]),
            rationale=str(data.get("rationale", "")),
            primary=bool(data.get("primary", True)),
            group_ids=tuple(str(i) for i in data.get("group_ids", ())),
        )
        if "needs_review" in data and data["needs_review"] != label.needs_review:
            raise ValueError("needs_review disagrees with confidence")
        return label


def _label(pair: CandidatePair, category: TaxonomyCategory, confidence: Confidence,
           rationale: str) -> CategoryLabel:
    return CategoryLabel(pair.left, pair.right, category, confidence, rationale)


# --- Token helpers ---

def type_tokens(type_text: Optional[str]) -> FrozenSet[str]:
    """Soft words of every name in a type: "Map<String, DBConnection>" -> {map, string, db, connection}."""
    if not type_text:
        return frozenset()
    tokens: Set[str] = set()
    for word in _WORD.findall(type_text):
        if word in ("extends", "super"):
            continue
        tokens.update(split_name(word).tokens)
    return frozenset(tokens)


def _expression_tokens(text: Optional[str]) -> Set[str]:
    tokens: Set[str] = set()
    for word in _WORD.findall(_LITERAL.sub(" ", text or "")):
        if word in JAVA_KEYWORDS:
            continue
        tokens.update(token for token in split_name(word).tokens if not token.isdigit())
    return tokens


def context_tokens(left: IdentifierRecord, right: IdentifierRecord) -> Tuple[Set[str], Set[str]]:
    """
    Usage context of each record: the words of its initializer or iterable plus
    the soft words of its enclosing method that the other method does not share.
    A shared method contributes nothing; scanClasses and scanDirs contribute
    "classes" and "dirs".
    """
    shared_method = (left.enclosing_method is not None
                     and (left.file_path, left.enclosing_class, left.enclosing_method)
                     == (right.file_path, right.enclosing_class, right.enclosing_method))
    method_words = [set() if shared_method or not record.enclosing_method
                    else set(split_name(record.enclosing_method).tokens) for record in (left, right)]
    common = method_words[0] & method_words[1]
    contexts = []
    for record, words in zip((left, right), method_words):
        tokens = _expression_tokens(record.source_expression)
        tokens.update(words - common)
        contexts.append(tokens)
    return contexts[0], contexts[1]


def _extra_token(left: IdentifierRecord, right: IdentifierRecord) -> Optional[Tuple[IdentifierRecord, str]]:
    """(longer record, extra token) when one name is the other plus one leading or trailing soft word."""
    left_tokens, right_tokens = split_name(left.name).tokens, split_name(right.name).tokens
    if len(left_tokens) == len(right_tokens) + 1:
        longer, longer_tokens, shorter_tokens = left, left_tokens, right_tokens
    elif len(right_tokens) == len(left_tokens) + 1:
        longer, longer_tokens, shorter_tokens = right, right_tokens, left_tokens
    else:
        return None
    if longer_tokens[1:] == shorter_tokens:
        return longer, longer_tokens[0]
    if longer_tokens[:-1] == shorter_tokens:
        return longer, longer_tokens[-1]
    return None


def abbreviation_related(left: IdentifierRecord, right: IdentifierRecord,
                         dictionary: Optional[AbbreviationDictionary] = None,
                         config: Optional[ClassifyConfig] = None) -> bool:
    """Either name abbreviates the other, as whole names or on the final soft word."""
    config = config or ClassifyConfig()
    dictionary = dictionary if dictionary is not None else default_dictionary()

    def abbreviates(a: str, b: str) -> bool:
        return any(is_abbreviation_of(short, long, dictionary, config.abbreviation_prefix_ratio,
                                      config.abbreviation_subsequence_ratio)
                   for short, long in ((a, b), (b, a)))

    if abbreviates(normalize_name(left.name), normalize_name(right.name)):
        return True
    return abbreviates(split_name(left.name).tokens[-1], split_name(right.name).tokens[-1])


# --- Pairwise detectors ---

def detect_cardinality(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                       registry: Optional[TypeRegistry] = None) -> Optional[CategoryLabel]:
    if not (is_plural_of(left.name, right.name) or is_plural_of(right.name, left.name)):
        return None
    registry = registry or default_registry()
    by_type = (pair.type_relation in (TypeRelation.COLLECTION_OF, TypeRelation.ELEMENT_OF)
               or registry.is_container(left.declared_type) or registry.is_container(right.declared_type))
    if by_type:
        return _label(pair, TaxonomyCategory.TYPE_CARDINALITY, Confidence.HIGH,
                      f"plural name, {pair.type_relation.value} types")
    return _label(pair, TaxonomyCategory.TYPE_CARDINALITY, Confidence.MEDIUM, "plural name only")


def detect_polymorphic(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                       config: Optional[ClassifyConfig] = None) -> Optional[CategoryLabel]:
    config = config or ClassifyConfig()
    if pair.lexical_similarity < config.polymorphic_threshold:
        return None
    if pair.type_relation not in (TypeRelation.SUBTYPE, TypeRelation.SUPERTYPE):
        return None
    if pair.scope_relation == ScopeRelation.CROSS_FILE:
        return None
    return _label(pair, TaxonomyCategory.TYPE_POLYMORPHIC, Confidence.HIGH,
                  f"{left.declared_type} is a {pair.type_relation.value} of {right.declared_type}")


def detect_temporary(pair: CandidatePair, left: IdentifierRecord,
                     right: IdentifierRecord) -> Optional[CategoryLabel]:
    left_temp, left_rest = has_temporary_affix(left.name)
    right_temp, right_rest = has_temporary_affix(right.name)
    if left_temp == right_temp:
        return None
    stripped, other = (left_rest, right.name) if left_temp else (right_rest, left.name)
    if normalize_name(stripped) != normalize_name(other):
        return None
    return _label(pair, TaxonomyCategory.DERIV_TEMPORARY, Confidence.HIGH, f"temporary form of '{other}'")


def detect_type_descriptive(pair: CandidatePair, left: IdentifierRecord,
                            right: IdentifierRecord) -> Optional[CategoryLabel]:
    extra = _extra_token(left, right)
    if extra is None:
        return None
    longer, token = extra
    if token not in type_tokens(longer.declared_type):
        return None
    return _label(pair, TaxonomyCategory.DERIV_TYPE_DESCRIPTIVE, Confidence.HIGH,
                  f"extra word '{token}' names the type {longer.declared_type}")


def detect_transformation(pair: CandidatePair, left: IdentifierRecord,
                          right: IdentifierRecord) -> Optional[CategoryLabel]:
    if pair.scope_relation != ScopeRelation.SAME_METHOD:
        return None
    extra = _extra_token(left, right)
    if extra is None or extra[1].isdigit():
        return None
    if detect_temporary(pair, left, right) or detect_type_descriptive(pair, left, right):
        return None
    return _label(pair, TaxonomyCategory.DERIV_TRANSFORMATION, Confidence.MEDIUM,
                  f"affix '{extra[1]}' marks a transformation")


def detect_acronym(pair: CandidatePair, left: IdentifierRecord,
                   right: IdentifierRecord) -> Optional[CategoryLabel]:
    if normalize_name(left.name) == normalize_name(right.name):
        return None
    for short, other in ((left, right), (right, left)):
        if is_acronym_of(short.name, split_name(other.name).tokens):
            return _label(pair, TaxonomyCategory.CONCISE_ACRONYM, Confidence.MEDIUM,
                          f"'{short.name}' is the initials of '{other.name}'")
        for owner in (short, other):
            if not owner.declared_type:
                continue
            type_name = erase(owner.declared_type).rstrip("[]")
            if (is_acronym_of(short.name, split_name(type_name).tokens)
                    and normalize_name(other.name) == normalize_name(type_name)):
                return _label(pair, TaxonomyCategory.CONCISE_ACRONYM, Confidence.MEDIUM,
                              f"'{short.name}' is the initials of type {type_name}")
    return None


def detect_abbreviated(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                       dictionary: Optional[AbbreviationDictionary] = None,
                       config: Optional[ClassifyConfig] = None) -> Optional[CategoryLabel]:
    if pair.type_relation not in ABBREVIATION_TYPE_GATE:
        return None
    if normalize_name(left.name) == normalize_name(right.name):
        return None
    if not abbreviation_related(left, right, dictionary, config):
        return None
    confidence = Confidence.HIGH if pair.type_relation == TypeRelation.IDENTICAL else Confidence.MEDIUM
    return _label(pair, TaxonomyCategory.CONCISE_ABBREVIATED, confidence,
                  f"'{left.name}' and '{right.name}' abbreviate one another")


def detect_single_char(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                       config: Optional[ClassifyConfig] = None) -> Optional[CategoryLabel]:
    config = config or ClassifyConfig()
    if len(left.name) != 1 or left.name != right.name:
        return None
    if pair.type_relation not in (TypeRelation.UNRELATED, TypeRelation.UNKNOWN):
        return None
    if (left.name in config.loop_index_names
            and left.kind == right.kind == IdentifierKind.LOCAL_VARIABLE
            and normalize_type(left.declared_type or "") in INTEGER_TYPES
            and normalize_type(right.declared_type or "") in INTEGER_TYPES):
        return None
    return _label(pair, TaxonomyCategory.CONCISE_SINGLE_CHAR, Confidence.MEDIUM,
                  f"'{left.name}' names {left.declared_type or '?'} and {right.declared_type or '?'}")


def detect_standardized_repetitive(pair: CandidatePair, left: IdentifierRecord,
                                   right: IdentifierRecord) -> Optional[CategoryLabel]:
    if normalize_name(left.name) != normalize_name(right.name):
        return None
    if pair.scope_relation == ScopeRelation.SAME_METHOD:
        return None
    if pair.type_relation == TypeRelation.IDENTICAL:
        confidence = Confidence.HIGH
    elif pair.type_relation in (TypeRelation.SUBTYPE, TypeRelation.SUPERTYPE):
        confidence = Confidence.MEDIUM
    else:
        return None
    left_context, right_context = context_tokens(left, right)
    if left_context and right_context and left_context.isdisjoint(right_context):
        return None
    return _label(pair, TaxonomyCategory.STANDARDIZED_REPETITIVE, confidence,
                  f"same name reused across {pair.scope_relation.value} scopes")


def detect_colliding(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                     config: Optional[ClassifyConfig] = None) -> Optional[CategoryLabel]:
    config = config or ClassifyConfig()
    if pair.lexical_similarity < config.colliding_threshold:
        return None
    if pair.type_relation == TypeRelation.UNRELATED:
        return _label(pair, TaxonomyCategory.COLLIDING, Confidence.HIGH,
                      f"similar names for unrelated types {left.declared_type} and {right.declared_type}")
    left_context, right_context = context_tokens(left, right)
    if left_context and right_context and left_context.isdisjoint(right_context):
        return _label(pair, TaxonomyCategory.COLLIDING, Confidence.LOW,
                      "similar names used in disjoint contexts")
    return None


def detect_inconsistent_semantic(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                                 dictionary: Optional[AbbreviationDictionary] = None,
                                 config: Optional[ClassifyConfig] = None) -> Optional[CategoryLabel]:
    config = config or ClassifyConfig()
    if left.kind not in VARIABLE_KINDS or right.kind not in VARIABLE_KINDS:
        return None
    if not left.declared_type or pair.type_relation != TypeRelation.IDENTICAL:
        return None
    if pair.scope_relation not in (ScopeRelation.SAME_CLASS, ScopeRelation.SAME_FILE):
        return None
    if pair.lexical_similarity >= config.inconsistent_threshold:
        return None
    if abbreviation_related(left, right, dictionary, config):
        return None
    return _label(pair, TaxonomyCategory.INCONSISTENT_SEMANTIC, Confidence.LOW,
                  f"different names for the same {left.declared_type}")


# --- Numeric groups ---

def parse_integer_literal(literal: Optional[str]) -> Optional[int]:
    """Value of a Java integer literal ("2", "0x10", "1_000L"); None for anything else."""
    if not literal:
        return None
    text = literal.replace("_", "").rstrip("lL")
    try:
        if re.fullmatch(r"0[0-7]+", text):
            return int(text, 8)
        return int(text, 0)
    except ValueError:
        return None


def detect_value_encoded(record: IdentifierRecord) -> Optional[CategoryLabel]:
    """Fires when a name's numeric suffix equals its integer initializer. The label covers the record alone."""
    _, number = strip_numeric_suffix(record.name)
    if number is None or parse_integer_literal(record.initializer_literal) != number:
        return None
    return CategoryLabel(record.record_id, record.record_id, TaxonomyCategory.NUMERIC_VALUE_ENCODED,
                         Confidence.HIGH, f"suffix {number} equals its initializer", group_ids=(record.record_id,))


def detect_sequential_numeric(group: List[IdentifierRecord]) -> Optional[CategoryLabel]:
    """
    Fires for records in one scope sharing a numeric stem with at least two
    distinct numbers, one declared type (or none at all), and no member
    whose initializer equals its suffix.
    """
    numbers = {strip_numeric_suffix(record.name)[1] for record in group}
    numbers.discard(None)
    if len(group) < 2 or len(numbers) < 2:
        return None
    types = {normalize_type(record.declared_type) if record.declared_type else None for record in group}
    if len(types) != 1:
        return None
    if any(detect_value_encoded(record) for record in group):
        return None
    declared = next(iter(types))
    ids = tuple(record.record_id for record in group)
    stem = strip_numeric_suffix(group[0].name)[0]
    numbered = ", ".join(str(n) for n in sorted(numbers))
    return CategoryLabel(ids[0], ids[1], TaxonomyCategory.NUMERIC_SEQUENTIAL,
                         Confidence.HIGH if declared else Confidence.MEDIUM,
                         f"'{stem}' numbered {numbered}", group_ids=tuple(sorted(ids)))


def numeric_groups(inventory: IdentifierInventory) -> List[List[IdentifierRecord]]:
    """Records of one scope sharing a numeric-suffix stem, in canonical order."""
    groups: Dict[Tuple, List[IdentifierRecord]] = defaultdict(list)
    for record in inventory.records:
        stem, number = strip_numeric_suffix(record.name)
        if number is None:
            continue
        key = (record.file_path, record.enclosing_class, record.enclosing_method, normalize_name(stem))
        groups[key].append(record)
    return [members for members in groups.values() if len(members) > 1]


def numeric_group_labels(inventory: IdentifierInventory) -> Dict[Tuple[str, str], CategoryLabel]:
    """Pairwise labels for every sequential group and every set of value-encoded siblings."""
    labels: Dict[Tuple[str, str], CategoryLabel] = {}
    for group in numeric_groups(inventory):
        sequential = detect_sequential_numeric(group)
        if sequential is not None:
            members, template = group, sequential
        else:
            members = [record for record in group if detect_value_encoded(record)]
            if len(members) < 2:
                continue
            ids = tuple(record.record_id for record in members)
            template = CategoryLabel(ids[0], ids[1], TaxonomyCategory.NUMERIC_VALUE_ENCODED, Confidence.HIGH,
                                     "numeric suffixes equal their initializers", group_ids=tuple(sorted(ids)))
        for left, right in combinations(members, 2):
            labels[(left.record_id, right.record_id)] = replace(template, left_id=left.record_id,
                                                                right_id=right.record_id)
    return labels


# --- Dispatch ---

def classify_pair(pair: CandidatePair, left: IdentifierRecord, right: IdentifierRecord,
                  config: Optional[ClassifyConfig] = None,
                  dictionary: Optional[AbbreviationDictionary] = None,
                  registry: Optional[TypeRegistry] = None,
                  group_label: Optional[CategoryLabel] = None) -> List[CategoryLabel]:
    """
    Runs every detector on one pair.

    Args:
        pair: Features of (left, right).
        group_label: The numeric group label covering this pair, if any.

    Returns:
        All matching labels in precedence order; the first is marked primary.
        An empty list means the pair is not similar.
    """
    config = config or ClassifyConfig()
    found: List[Optional[CategoryLabel]] = [
        group_label,
        detect_cardinality(pair, left, right, registry),
        detect_polymorphic(pair, left, right, config),
        detect_temporary(pair, left, right),
        detect_type_descriptive(pair, left, right),
        detect_transformation(pair, left, right),
        detect_acronym(pair, left, right),
        detect_abbreviated(pair, left, right, dictionary, config),
        detect_single_char(pair, left, right, config),
        detect_standardized_repetitive(pair, left, right),
        detect_colliding(pair, left, right, config),
        detect_inconsistent_semantic(pair, left, right, dictionary, config),
    ]
    labels = sorted((label for label in found if label is not None), key=lambda label: PRECEDENCE_RANK[label.category])
    return [replace(label, primary=(index == 0)) for index, label in enumerate(labels)]


def classify_inventory(inventory: IdentifierInventory,
                       pairs: Iterable[CandidatePair],
                       config: Optional[ClassifyConfig] = None,
                       dictionary: Optional[AbbreviationDictionary] = None,
                       registry: Optional[TypeRegistry] = None,
                       workers: int = 1) -> List[CategoryLabel]:
    """
    Classifies a project's candidate pairs plus any numeric group pairs
    blocking did not produce. Returns primary labels only unless
    config.all_labels is set, in canonical pair order.
    """
    config = config or ClassifyConfig()
    dictionary = dictionary if dictionary is not None else default_dictionary()
    if registry is None:
        registry = default_registry().with_project_types(inventory.records)

    group_labels = numeric_group_labels(inventory)
    jobs: List[CandidatePair] = list(pairs)
    emitted = {pair.key for pair in jobs}
    for left_id, right_id in sorted(group_labels):
        if (left_id, right_id) not in emitted:
            jobs.append(build_pair(inventory.get(left_id), inventory.get(right_id), registry))

    def run(pair: CandidatePair) -> List[CategoryLabel]:
        left, right = inventory.get(pair.left), inventory.get(pair.right)
        if left is None or right is None:
            raise DanglingReferenceError(pair.left if left is None else pair.right)
        return classify_pair(pair, left, right, config, dictionary, registry, group_labels.get(pair.key))

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, jobs, chunksize=256))
    else:
        results = [run(pair) for pair in jobs]

    labels: List[CategoryLabel] = []
    for pair_labels in results:
        labels.extend(pair_labels if config.all_labels else pair_labels[:1])
    labels.sort(key=lambda label: (inventory.position(label.left_id), inventory.position(label.right_id),
                                   PRECEDENCE_RANK[label.category]))
    review = sum(1 for label in labels if label.primary and label.needs_review)
    logger.info("%s: %d labels (%d need review) from %d pairs",
                inventory.project, sum(1 for label in labels if label.primary), review, len(jobs))
    return labels


# --- JSON Lines ---

def write_labels(labels: Iterable[CategoryLabel], out_path: str):
    lines = [json.dumps(label.to_dict(), ensure_ascii=False) for label in labels]
    write_text(out_path, "".join(line + "\n" for line in lines))
    logger.debug("Wrote %d labels to %s", len(lines), out_path)


def read_labels(path: str) -> List[CategoryLabel]:
    """Reads a labels file, raising MalformedLabelsError naming the first bad line."""
    labels: List[CategoryLabel] = []
    try:
        with open(path, "rb") as handle:
            for line_number, raw in enumerate(handle, start=1):
                try:
                    line = raw.decode("utf-8")
                    if not line.strip():
                        continue
                    data = json.loads(line)
                    if not isinstance(data, dict):
                        raise ValueError("expected a JSON object")
                    labels.append(CategoryLabel.from_dict(data))
                except (ValueError, KeyError, TypeError) as e:
                    raise MalformedLabelsError(path, line_number, str(e)) from e
    except OSError as e:
        raise OutputError(path, e) from e
    return labels
