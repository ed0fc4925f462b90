# tests/test_pairing.py

import json
import logging
import random

import pytest

from src.config import PairConfig
from src.errors import RegistryCycleError, RegistryError
from src.identifier import IdentifierInventory, IdentifierKind
from src.pairing import (ScopeRelation, TypeRegistry, TypeRelation, default_registry, erase,
                         generate_candidate_pairs, lexical_similarity, load_registry, mirror,
                         normalize_type, scope_relation, shared_stem, type_relation, type_arguments)
from tests.java_corpus import make_record


@pytest.fixture
def registry() -> TypeRegistry:
    """Provides the shipped type registry."""
    return default_registry()


@pytest.fixture
def listing10_inventory() -> IdentifierInventory:
    """Provides three numbered Customer locals in one method."""
    return IdentifierInventory("demo", [
        make_record(f"cust{n}", declared_type="Customer", line=n + 2, enclosing_method="createCustomers")
        for n in (1, 2, 3)
    ])


@pytest.fixture
def mixed_inventory() -> IdentifierInventory:
    """Provides a few dozen records spread over several files, classes and methods."""
    rng = random.Random(7)
    names = ["writer", "request", "agentName", "agentNames", "input", "scannedInput", "log", "logger",
             "cust1", "cust2", "sb", "stringBuilder", "b", "db", "conn", "roles", "rolesTmp"]
    types = ["String", "Logger", "HttpServletRequest", "ServletRequest", "List<String>", "DBConnection", None]
    records = []
    for index in range(60):
        file_index = rng.randint(0, 3)
        records.append(make_record(
            rng.choice(names),
            declared_type=rng.choice(types),
            file_path=f"demo/File{file_index}.java",
            enclosing_class=f"File{file_index}",
            enclosing_method=rng.choice(["load", "save", "run"]),
            line=index + 1,
        ))
    return IdentifierInventory("demo", records)


# --- Lexical similarity ---

@pytest.mark.parametrize("a, b, expected", [
    ("writer", "writer", 1.0),
    ("agentName", "agentNames", 0.9),
    ("db", "conn", 0.0),
    ("MAX_VALUE", "maxValue", 1.0),
])
def test_lexical_similarity_examples(a, b, expected):
    """Test normalized edit-distance similarity on known pairs."""
    assert lexical_similarity(a, b) == pytest.approx(expected)


def test_lexical_similarity_symmetry_and_identity():
    """Test symmetry and that 1.0 holds exactly for normalized-equal names."""
    rng = random.Random(11)
    alphabet = "abcAB_$1"
    for _ in range(2000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))
        similarity = lexical_similarity(a, b)
        assert similarity == lexical_similarity(b, a)
        assert 0.0 <= similarity <= 1.0
        assert (similarity == 1.0) == (a.replace("_", "").replace("$", "").lower()
                                       == b.replace("_", "").replace("$", "").lower())


# --- Type text ---

def test_normalize_type_drops_annotations_and_spacing():
    """Test annotation removal, whitespace collapsing and varargs."""
    assert normalize_type("@NonNull Map<String,  List<Integer>>") == "Map<String,List<Integer>>"
    assert normalize_type("String...") == "String[]"
    assert normalize_type("Class<? extends View>") == "Class<? extends View>"


def test_erase_and_type_arguments():
    """Test erasure of generics and qualifiers and top-level argument splitting."""
    assert erase("java.util.Map.Entry<K, V>[]") == "Entry[]"
    assert erase("List<String>") == "List"
    assert type_arguments("Map<K, List<V>>") == ["K", "List<V>"]
    assert type_arguments("String") == []


# --- Type relation ---

@pytest.mark.parametrize("a, b, expected", [
    ("HttpServletRequest", "ServletRequest", TypeRelation.SUBTYPE),
    ("ServletRequest", "HttpServletRequest", TypeRelation.SUPERTYPE),
    ("String", "String", TypeRelation.IDENTICAL),
    ("LinkedHashSet<String>", "String", TypeRelation.COLLECTION_OF),
    ("String", "LinkedHashSet<String>", TypeRelation.ELEMENT_OF),
    ("byte[]", "byte", TypeRelation.COLLECTION_OF),
    ("int...", "int[]", TypeRelation.IDENTICAL),
    ("String", "Integer", TypeRelation.UNRELATED),
    ("byte[]", "StringBuffer", TypeRelation.UNRELATED),
    ("FastString", "OutputStreamWriter", TypeRelation.UNKNOWN),
    (None, "String", TypeRelation.UNKNOWN),
    ("List<HttpServletRequest>", "List<ServletRequest>", TypeRelation.SUBTYPE),
    ("List<? extends HttpServletRequest>", "HttpServletRequest", TypeRelation.COLLECTION_OF),
    ("java.io.Writer", "Writer", TypeRelation.IDENTICAL),
])
def test_type_relation_examples(registry, a, b, expected):
    """Test identical, subtype, container and unknown relations on the shipped registry."""
    assert type_relation(a, b, registry) == expected


def test_type_relation_duality(registry):
    """Test that swapping arguments mirrors the relation on registry types."""
    names = sorted(registry.direct)[:40] + ["List<String>", "String[]", "Set<Integer>", "Unseen", "int"]
    for a in names:
        for b in names:
            assert registry.relation(a, b) == mirror(registry.relation(b, a)), (a, b)


def test_registry_rejects_cycles():
    """Test that a supertype cycle is reported with its path."""
    with pytest.raises(RegistryCycleError) as excinfo:
        TypeRegistry({"A": ["B"], "B": ["C"], "C": ["A"]})
    assert set(excinfo.value.cycle) == {"A", "B", "C"}
    assert "->" in str(excinfo.value)


def test_load_registry_merges_user_file(tmp_path):
    """Test that a user registry adds types to the shipped one."""
    path = tmp_path / "types.json"
    path.write_text(json.dumps({"supertypes": {"DBConnection": ["AutoCloseable"]},
                                "collections": ["ResultList"]}), encoding="utf-8")
    merged = load_registry(str(path))
    assert merged.relation("DBConnection", "AutoCloseable") == TypeRelation.SUBTYPE
    assert merged.relation("ResultList<Row>", "Row") == TypeRelation.COLLECTION_OF
    assert merged.relation("HttpServletRequest", "ServletRequest") == TypeRelation.SUBTYPE


def test_load_registry_cycle_in_file(tmp_path):
    """Test that a cyclic registry file is a load-time error."""
    path = tmp_path / "types.json"
    path.write_text(json.dumps({"supertypes": {"A": ["B"], "B": ["A"]}}), encoding="utf-8")
    with pytest.raises(RegistryCycleError):
        TypeRegistry.load(path)


def test_load_registry_rejects_bad_shape(tmp_path):
    """Test that a registry with the wrong structure raises RegistryError."""
    path = tmp_path / "types.json"
    path.write_text(json.dumps({"supertypes": {"A": "B"}}), encoding="utf-8")
    with pytest.raises(RegistryError):
        TypeRegistry.load(path)


def test_with_project_types_adds_declared_hierarchy(registry):
    """Test that scanned classes contribute their supertypes."""
    records = [
        make_record("FastString", kind=IdentifierKind.CLASS, enclosing_class=None),
        make_record("FastStringWriter", kind=IdentifierKind.CLASS, enclosing_class=None,
                    supertypes=("FastString",), line=5),
    ]
    extended = registry.with_project_types(records)
    assert extended.relation("FastStringWriter", "FastString") == TypeRelation.SUBTYPE
    assert extended.relation("FastString", "OutputStreamWriter") == TypeRelation.UNRELATED
    assert registry.relation("FastString", "OutputStreamWriter") == TypeRelation.UNKNOWN


def test_with_project_types_skips_cycle_edges(registry):
    """Test that same-named classes in different packages cannot create a cycle."""
    records = [
        make_record("Node", kind=IdentifierKind.CLASS, file_path="a/Node.java", supertypes=("Base",)),
        make_record("Base", kind=IdentifierKind.CLASS, file_path="b/Base.java", supertypes=("Node",)),
    ]
    extended = registry.with_project_types(records)
    assert extended.relation("Node", "Base") == TypeRelation.SUBTYPE


# --- Scope and stems ---

def test_scope_relation_levels():
    """Test same_method, same_class, same_file and cross_file scopes."""
    a = make_record("x", enclosing_method="load")
    assert scope_relation(a, make_record("y", enclosing_method="load", line=2)) == ScopeRelation.SAME_METHOD
    assert scope_relation(a, make_record("y", enclosing_method="save", line=2)) == ScopeRelation.SAME_CLASS
    assert scope_relation(a, make_record("y", enclosing_class="Inner", line=2)) == ScopeRelation.SAME_FILE
    assert scope_relation(a, make_record("y", file_path="demo/Other.java")) == ScopeRelation.CROSS_FILE


def test_shared_stem():
    """Test stems for numbered names and for names extending one another."""
    assert shared_stem(make_record("cust1"), make_record("cust2", line=2)) == "cust"
    assert shared_stem(make_record("input"), make_record("scannedInput", line=2)) == "input"
    assert shared_stem(make_record("db"), make_record("conn", line=2)) is None


# --- Candidate pairs ---

def test_single_identifier_has_no_pairs():
    """Test that one record yields no pairs."""
    assert generate_candidate_pairs(IdentifierInventory("demo", [make_record("only")])) == []


def test_numbered_locals_pair_up(listing10_inventory):
    """Test that numbered siblings form all three pairs."""
    pairs = generate_candidate_pairs(listing10_inventory)
    names = {(listing10_inventory.get(p.left).name, listing10_inventory.get(p.right).name) for p in pairs}
    assert names == {("cust1", "cust2"), ("cust1", "cust3"), ("cust2", "cust3")}


def test_plural_pair_from_token_block():
    """Test that agentName/agentNames pair through the shared first soft word."""
    inventory = IdentifierInventory("demo", [
        make_record("agentName", declared_type="String", enclosing_method="load"),
        make_record("agentNames", declared_type="LinkedHashSet<String>", enclosing_method="save", line=9),
    ])
    (pair,) = generate_candidate_pairs(inventory)
    assert pair.scope_relation == ScopeRelation.SAME_CLASS
    assert pair.type_relation == TypeRelation.ELEMENT_OF
    assert pair.lexical_similarity == pytest.approx(0.9)


def test_proximity_block_pairs_same_typed_variables():
    """Test that differently named variables of one non-ubiquitous type in a class pair up."""
    inventory = IdentifierInventory("demo", [
        make_record("db", declared_type="DBConnection", enclosing_method="open"),
        make_record("conn", declared_type="DBConnection", enclosing_method="release", line=8),
        make_record("name", declared_type="String", enclosing_method="open", line=3),
        make_record("label", declared_type="String", enclosing_method="release", line=9),
    ])
    pairs = generate_candidate_pairs(inventory)
    names = {(inventory.get(p.left).name, inventory.get(p.right).name) for p in pairs}
    assert ("db", "conn") in names
    assert ("name", "label") not in names


def test_pairs_are_canonical_and_unique(mixed_inventory):
    """Test left-before-right ordering, no self pairs, no duplicates, name-block similarity."""
    pairs = generate_candidate_pairs(mixed_inventory)
    keys = [p.key for p in pairs]
    assert len(keys) == len(set(keys))
    assert keys == sorted(keys, key=lambda k: (mixed_inventory.position(k[0]), mixed_inventory.position(k[1])))
    for p in pairs:
        assert mixed_inventory.position(p.left) < mixed_inventory.position(p.right)
        left, right = mixed_inventory.get(p.left), mixed_inventory.get(p.right)
        if left.name.lower() == right.name.lower():
            assert p.lexical_similarity == 1.0


def test_pairs_independent_of_worker_count(mixed_inventory):
    """Test that threaded feature computation gives identical output."""
    single = generate_candidate_pairs(mixed_inventory, PairConfig(workers=1))
    threaded = generate_candidate_pairs(mixed_inventory, PairConfig(workers=4))
    assert single == threaded


def test_method_cap_truncates_with_warning(caplog):
    """Test that an oversized method window is truncated and logged."""
    names = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"]
    records = [make_record(name, declared_type="int", enclosing_method="huge", line=n + 1)
               for n, name in enumerate(names)]
    inventory = IdentifierInventory("demo", records)
    with caplog.at_level(logging.WARNING):
        pairs = generate_candidate_pairs(inventory, PairConfig(max_method_identifiers=3))
    assert "huge" in caplog.text
    assert len(pairs) == 3


def test_oversized_block_falls_back_to_files(caplog):
    """Test that a soft-word block over max_block_size only pairs within files."""
    names = ["idAlpha", "idBeta", "idGamma", "idDelta", "idOmega", "idSigma"]
    records = [make_record(name, declared_type="long", file_path=f"demo/F{n % 2}.java", line=n + 1,
                           enclosing_class=f"F{n % 2}", kind=IdentifierKind.FIELD) for n, name in enumerate(names)]
    inventory = IdentifierInventory("demo", records)
    with caplog.at_level(logging.WARNING):
        pairs = generate_candidate_pairs(inventory, PairConfig(max_block_size=4))
    assert "cap 4" in caplog.text
    assert all(p.scope_relation != ScopeRelation.CROSS_FILE for p in pairs)
    assert len(pairs) == 6


def test_oversized_name_block_keeps_cross_file_pairs():
    """Test that every pair sharing a name is emitted however large the name block."""
    records = [make_record("log", declared_type="Logger", file_path=f"demo/F{n}.java", line=1,
                           enclosing_class=f"F{n}", kind=IdentifierKind.FIELD) for n in range(6)]
    inventory = IdentifierInventory("demo", records)
    pairs = generate_candidate_pairs(inventory, PairConfig(max_block_size=4))
    assert len(pairs) == 15
    assert all(p.scope_relation == ScopeRelation.CROSS_FILE for p in pairs)
