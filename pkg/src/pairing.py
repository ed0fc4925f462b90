# src/pairing.py

"""
Candidate pair generation with blocking, and the per-pair features
(scope, lexical similarity, type relation) the classifier consumes.
"""

import json
import logging
import re
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from Levenshtein import distance as levenshtein_distance

from .config import PairConfig
from .errors import OutputError, RegistryCycleError, RegistryError
from .identifier import TYPE_KINDS, VARIABLE_KINDS, IdentifierInventory, IdentifierRecord
from .lexicon import normalize_name, split_name, strip_numeric_suffix

logger = logging.getLogger(__name__)

DEFAULT_REGISTRY_PATH = Path(__file__).parent / "data" / "type_registry.json"
PRIMITIVE_TYPES = frozenset({"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"})


class ScopeRelation(str, Enum):
    SAME_METHOD = "same_method"
    SAME_CLASS = "same_class"
    SAME_FILE = "same_file"
    CROSS_FILE = "cross_file"


class TypeRelation(str, Enum):
    IDENTICAL = "identical"
    SUBTYPE = "subtype"
    SUPERTYPE = "supertype"
    COLLECTION_OF = "collection_of"
    ELEMENT_OF = "element_of"
    UNRELATED = "unrelated"
    UNKNOWN = "unknown"


_MIRROR = {
    TypeRelation.SUBTYPE: TypeRelation.SUPERTYPE,
    TypeRelation.SUPERTYPE: TypeRelation.SUBTYPE,
    TypeRelation.COLLECTION_OF: TypeRelation.ELEMENT_OF,
    TypeRelation.ELEMENT_OF: TypeRelation.COLLECTION_OF,
}


def mirror(relation: TypeRelation) -> TypeRelation:
    return _MIRROR.get(relation, relation)


# --- Type text helpers ---

_ANNOTATION = re.compile(r"@[\w.]+(\([^)]*\))?\s*")
_SPACE_AROUND_PUNCT = re.compile(r"\s*([<>,\[\].&])\s*")


def normalize_type(type_text: str) -> str:
    """Drops annotations and insignificant whitespace; varargs become arrays."""
    text = _ANNOTATION.sub("", type_text)
    text = re.sub(r"\s+", " ", text).strip()
    text = _SPACE_AROUND_PUNCT.sub(r"\1", text)
    if text.endswith("..."):
        text = text[:-3] + "[]"
    return text


def _matching_open(text: str, close_index: int) -> int:
    depth = 0
    for index in range(close_index, -1, -1):
        if text[index] == ">":
            depth += 1
        elif text[index] == "<":
            depth -= 1
            if depth == 0:
                return index
    return -1


def _split_top_level(text: str) -> List[str]:
    parts, depth, start = [], 0, 0
    for index, ch in enumerate(text):
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:index])
            start = index + 1
    parts.append(text[start:])
    return [part for part in parts if part]


def type_arguments(type_text: str) -> List[str]:
    """Top-level type arguments of the last generic segment: "Map<K,List<V>>" -> ["K", "List<V>"]."""
    text = normalize_type(type_text)
    if not text.endswith(">"):
        return []
    open_index = _matching_open(text, len(text) - 1)
    if open_index < 0:
        return []
    return _split_top_level(text[open_index + 1:-1])


def strip_wildcard(argument: str) -> Optional[str]:
    if argument.startswith("? extends "):
        return argument[len("? extends "):]
    if argument.startswith("? super "):
        return argument[len("? super "):]
    if argument.startswith("?"):
        return None
    return argument


def erase(type_text: str) -> str:
    """Generic arguments and package qualifiers removed; array suffixes kept."""
    text = normalize_type(type_text)
    erased, depth = [], 0
    for ch in text:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        elif depth == 0:
            erased.append(ch)
    erased_text = "".join(erased)
    dims = ""
    while erased_text.endswith("[]"):
        dims += "[]"
        erased_text = erased_text[:-2]
    return erased_text.rsplit(".", 1)[-1] + dims


def is_array(type_text: str) -> bool:
    return normalize_type(type_text).endswith("[]")


class TypeRegistry:
    """
    Known type hierarchy: transitive supertypes per simple type name and
    the container types whose first type argument is the element type.
    """

    def __init__(self,
                 supertypes: Optional[Mapping[str, Iterable[str]]] = None,
                 collection_types: Iterable[str] = ()):
        self.direct: Dict[str, FrozenSet[str]] = {
            name: frozenset(parents) for name, parents in (supertypes or {}).items()
        }
        self.collection_types: FrozenSet[str] = frozenset(collection_types)
        self.supertypes: Dict[str, FrozenSet[str]] = self._closure(self.direct)
        self._known: Set[str] = set(self.direct) | set(PRIMITIVE_TYPES) | set(self.collection_types)
        for parents in self.direct.values():
            self._known.update(parents)
        self._relation_cache: Dict[Tuple[Optional[str], Optional[str]], TypeRelation] = {}

    @staticmethod
    def _closure(direct: Mapping[str, FrozenSet[str]]) -> Dict[str, FrozenSet[str]]:
        closure: Dict[str, FrozenSet[str]] = {}
        visiting: List[str] = []

        def visit(name: str) -> FrozenSet[str]:
            if name in closure:
                return closure[name]
            if name in visiting:
                raise RegistryCycleError(visiting[visiting.index(name):] + [name])
            visiting.append(name)
            result: Set[str] = set()
            for parent in direct.get(name, ()):
                result.add(parent)
                result |= visit(parent)
            visiting.pop()
            closure[name] = frozenset(result)
            return closure[name]

        for name in sorted(direct):
            visit(name)
        return closure

    def is_known(self, type_name: str) -> bool:
        name = erase(type_name)
        while name.endswith("[]"):
            name = name[:-2]
        return name in self._known

    def is_container(self, type_text: Optional[str]) -> bool:
        if not type_text:
            return False
        return is_array(type_text) or erase(type_text) in self.collection_types

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supertypes.get(sub, ())

    def element_type(self, type_text: str) -> Optional[str]:
        text = normalize_type(type_text)
        if text.endswith("[]"):
            return text[:-2]
        if erase(text) in self.collection_types:
            arguments = type_arguments(text)
            if arguments:
                return strip_wildcard(arguments[0])
        return None

    def relation(self, type_a: Optional[str], type_b: Optional[str]) -> TypeRelation:
        key = (type_a, type_b)
        if key not in self._relation_cache:
            self._relation_cache[key] = self._relation(type_a, type_b)
        return self._relation_cache[key]

    def _relation(self, type_a: Optional[str], type_b: Optional[str]) -> TypeRelation:
        if not type_a or not type_b:
            return TypeRelation.UNKNOWN
        norm_a, norm_b = normalize_type(type_a), normalize_type(type_b)
        if norm_a == norm_b:
            return TypeRelation.IDENTICAL

        element_a, element_b = self.element_type(norm_a), self.element_type(norm_b)
        if element_a and _same_type(element_a, norm_b):
            return TypeRelation.COLLECTION_OF
        if element_b and _same_type(element_b, norm_a):
            return TypeRelation.ELEMENT_OF

        if norm_a.endswith("[]") and norm_b.endswith("[]"):
            return self._relation(norm_a[:-2], norm_b[:-2])

        erased_a, erased_b = erase(norm_a), erase(norm_b)
        if erased_a == erased_b:
            # Same container, different arguments: relate through the first argument.
            args_a, args_b = type_arguments(norm_a), type_arguments(norm_b)
            if not args_a or not args_b:
                return TypeRelation.IDENTICAL if args_a == args_b else TypeRelation.UNKNOWN
            inner_a, inner_b = strip_wildcard(args_a[0]), strip_wildcard(args_b[0])
            inner = self._relation(inner_a, inner_b)
            if inner in (TypeRelation.COLLECTION_OF, TypeRelation.ELEMENT_OF):
                return TypeRelation.UNRELATED
            return inner

        if not self.is_known(erased_a) or not self.is_known(erased_b):
            return TypeRelation.UNKNOWN
        if self.is_subtype(erased_a, erased_b):
            return TypeRelation.SUBTYPE
        if self.is_subtype(erased_b, erased_a):
            return TypeRelation.SUPERTYPE
        return TypeRelation.UNRELATED

    def merged_with(self, other: "TypeRegistry") -> "TypeRegistry":
        merged: Dict[str, Set[str]] = {name: set(parents) for name, parents in self.direct.items()}
        for name, parents in other.direct.items():
            merged.setdefault(name, set()).update(parents)
        return TypeRegistry(merged, self.collection_types | other.collection_types)

    def with_project_types(self, records: Iterable[IdentifierRecord]) -> "TypeRegistry":
        """
        Adds the hierarchy declared by the scanned classes and enums. Edges
        that would close a cycle (two packages reusing a simple name) are dropped.
        """
        direct: Dict[str, Set[str]] = {name: set(parents) for name, parents in self.direct.items()}
        for record in records:
            if record.kind not in TYPE_KINDS:
                continue
            parents = [erase(text) for text in record.supertypes] or ["Object"]
            node = direct.setdefault(record.name, set())
            for parent in parents:
                if parent in node:
                    continue
                if parent == record.name or _reaches(direct, parent, record.name):
                    logger.debug("Dropping supertype edge %s -> %s (cycle)", record.name, parent)
                    continue
                node.add(parent)
        return TypeRegistry(direct, self.collection_types)

    @classmethod
    def load(cls, path) -> "TypeRegistry":
        """
        Loads a registry file: {"supertypes": {type: [direct supertypes]},
        "collections": [type, ...]}. A cycle raises RegistryCycleError.
        """
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except json.JSONDecodeError as e:
            raise RegistryError(f"Type registry '{path}' is not valid JSON: {e}") from e
        except FileNotFoundError as e:
            raise RegistryError(f"Type registry '{path}' not found") from e
        except OSError as e:
            raise OutputError(str(path), e) from e

        if not isinstance(data, dict):
            raise RegistryError(f"Type registry '{path}' must be a JSON object")
        supertypes = data.get("supertypes", {})
        collections = data.get("collections", [])
        if not isinstance(supertypes, dict) or not all(
                isinstance(parents, list) and all(isinstance(p, str) for p in parents)
                for parents in supertypes.values()):
            raise RegistryError(f"'supertypes' in '{path}' must map type names to lists of names")
        if not isinstance(collections, list) or not all(isinstance(c, str) for c in collections):
            raise RegistryError(f"'collections' in '{path}' must be a list of type names")
        return cls(supertypes, collections)


def _same_type(type_a: str, type_b: str) -> bool:
    return normalize_type(type_a) == normalize_type(type_b) or erase(type_a) == erase(type_b)


def _reaches(direct: Mapping[str, Set[str]], start: str, target: str) -> bool:
    stack, seen = [start], set()
    while stack:
        name = stack.pop()
        if name == target:
            return True
        if name in seen:
            continue
        seen.add(name)
        stack.extend(direct.get(name, ()))
    return False


@lru_cache(maxsize=1)
def default_registry() -> TypeRegistry:
    return TypeRegistry.load(DEFAULT_REGISTRY_PATH)


def load_registry(path: Optional[str] = None) -> TypeRegistry:
    """The shipped registry, extended with the user's file when one is given."""
    registry = default_registry()
    if path:
        registry = registry.merged_with(TypeRegistry.load(path))
    return registry


# --- Pair features ---

@dataclass(frozen=True)
class CandidatePair:
    left: str
    right: str
    scope_relation: ScopeRelation
    lexical_similarity: float
    type_relation: TypeRelation
    shared_stem: Optional[str] = None

    @property
    def key(self) -> Tuple[str, str]:
        return (self.left, self.right)


def lexical_similarity(name_a: str, name_b: str) -> float:
    """1 - edit distance / longer length, over normalized names."""
    norm_a, norm_b = normalize_name(name_a), normalize_name(name_b)
    if norm_a == norm_b:
        return 1.0
    longer = max(len(norm_a), len(norm_b))
    return 1.0 - levenshtein_distance(norm_a, norm_b) / longer


def type_relation(type_a: Optional[str], type_b: Optional[str],
                  registry: Optional[TypeRegistry] = None) -> TypeRelation:
    return (registry or default_registry()).relation(type_a, type_b)


def scope_relation(a: IdentifierRecord, b: IdentifierRecord) -> ScopeRelation:
    if a.file_path != b.file_path:
        return ScopeRelation.CROSS_FILE
    if a.enclosing_class != b.enclosing_class:
        return ScopeRelation.SAME_FILE
    if a.enclosing_method is not None and a.enclosing_method == b.enclosing_method:
        return ScopeRelation.SAME_METHOD
    return ScopeRelation.SAME_CLASS


def shared_stem(a: IdentifierRecord, b: IdentifierRecord) -> Optional[str]:
    """The common stem when the names differ by a number or one name extends the other."""
    stem_a, number_a = strip_numeric_suffix(a.name)
    stem_b, number_b = strip_numeric_suffix(b.name)
    if number_a is not None and number_b is not None and normalize_name(stem_a) == normalize_name(stem_b):
        return normalize_name(stem_a)
    tokens_a, tokens_b = split_name(a.name).tokens, split_name(b.name).tokens
    shorter, longer = sorted((tokens_a, tokens_b), key=len)
    if len(shorter) < len(longer) and (longer[:len(shorter)] == shorter or longer[-len(shorter):] == shorter):
        return "".join(shorter)
    return None


def build_pair(left: IdentifierRecord, right: IdentifierRecord,
               registry: Optional[TypeRegistry] = None) -> CandidatePair:
    """Computes the features of one pair. `left` must precede `right` canonically."""
    return CandidatePair(
        left=left.record_id,
        right=right.record_id,
        scope_relation=scope_relation(left, right),
        lexical_similarity=lexical_similarity(left.name, right.name),
        type_relation=type_relation(left.declared_type, right.declared_type, registry),
        shared_stem=shared_stem(left, right),
    )


# --- Blocking ---

def _block_keys(record: IdentifierRecord, ubiquitous: FrozenSet[str]) -> List[Tuple]:
    keys: List[Tuple] = [("name", normalize_name(record.name))]
    words = [token for token in split_name(record.name).tokens if not token.isdigit()]
    if words:
        keys.append(("first", words[0]))
        keys.append(("last", words[-1]))
    if record.kind in VARIABLE_KINDS and record.declared_type:
        if erase(record.declared_type) not in ubiquitous:
            keys.append(("near", record.file_path, record.enclosing_class, normalize_type(record.declared_type)))
    return keys


def _block_pairs(members: List[int], records: Tuple[IdentifierRecord, ...],
                 cap: int, description: str) -> Iterable[Tuple[int, int]]:
    if len(members) <= cap:
        return combinations(members, 2)
    logger.warning("Block %s has %d identifiers (cap %d); pairing within files only",
                   description, len(members), cap)
    by_file: Dict[str, List[int]] = defaultdict(list)
    for index in members:
        by_file[records[index].file_path].append(index)
    pairs: List[Tuple[int, int]] = []
    for file_members in by_file.values():
        pairs.extend(combinations(file_members[:cap], 2))
    return pairs


def generate_candidate_pairs(inventory: IdentifierInventory,
                             config: Optional[PairConfig] = None,
                             registry: Optional[TypeRegistry] = None) -> List[CandidatePair]:
    """
    Emits the deduplicated union of the name block, the first/last soft-word
    blocks, the same-method window and the same-class/same-type proximity
    block, each pair with its features, in canonical order.

    Args:
        inventory: Records of one project.
        config: Block caps and worker count.
        registry: Type registry; defaults to the shipped one extended with the
                  inventory's own class hierarchy.
    """
    config = config or PairConfig()
    if registry is None:
        registry = default_registry().with_project_types(inventory.records)
    records = inventory.records
    ubiquitous = frozenset(config.ubiquitous_types)

    blocks: Dict[Tuple, List[int]] = defaultdict(list)
    methods: Dict[Tuple, List[int]] = defaultdict(list)
    for index, record in enumerate(records):
        for key in _block_keys(record, ubiquitous):
            blocks[key].append(index)
        if record.enclosing_method is not None:
            methods[(record.file_path, record.enclosing_class, record.enclosing_method)].append(index)

    index_pairs: Set[Tuple[int, int]] = set()
    for key, members in blocks.items():
        if len(members) < 2:
            continue
        # Same-name pairs are never capped.
        if key[0] == "name":
            index_pairs.update(combinations(members, 2))
        else:
            index_pairs.update(_block_pairs(members, records, config.max_block_size, ":".join(map(str, key))))
    for (file_path, _, method), members in methods.items():
        if len(members) > config.max_method_identifiers:
            logger.warning("Method %s in %s declares %d identifiers; pairing the first %d",
                           method, file_path, len(members), config.max_method_identifiers)
            members = members[:config.max_method_identifiers]
        index_pairs.update(combinations(members, 2))

    ordered = sorted(index_pairs)

    def features(index_pair: Tuple[int, int]) -> CandidatePair:
        return build_pair(records[index_pair[0]], records[index_pair[1]], registry)

    if config.workers > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            pairs = list(executor.map(features, ordered, chunksize=256))
    else:
        pairs = [features(index_pair) for index_pair in ordered]
    logger.info("%s: %d candidate pairs from %d identifiers", inventory.project, len(pairs), len(records))
    return pairs
