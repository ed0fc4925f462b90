# src/extract.py

"""
Java identifier extraction. Walks tree-sitter syntax trees and records every
class, enum, enum constant, method, parameter, field and local variable
declaration together with its type and lexical enclosure.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from fnmatch import fnmatchcase
from pathlib import Path, PurePosixPath
from typing import List, Optional, Tuple

import tree_sitter_java
from tree_sitter import Language, Node, Parser

from .config import ScanConfig
from .errors import ParseFailureThresholdError, RootPathMissingError, SourceParseError
from .identifier import IdentifierInventory, IdentifierKind, IdentifierRecord

logger = logging.getLogger(__name__)

JAVA_LANGUAGE = Language(tree_sitter_java.language())
SOURCE_EXPRESSION_LIMIT = 120

TYPE_DECLARATIONS = {
    "class_declaration": IdentifierKind.CLASS,
    "interface_declaration": IdentifierKind.CLASS,
    "record_declaration": IdentifierKind.CLASS,
    "annotation_type_declaration": IdentifierKind.CLASS,
    "enum_declaration": IdentifierKind.ENUM,
}
LITERAL_TYPES = frozenset({
    "decimal_integer_literal", "hex_integer_literal", "octal_integer_literal", "binary_integer_literal",
    "decimal_floating_point_literal", "hex_floating_point_literal",
    "character_literal", "string_literal", "true", "false", "null_literal",
})
TEST_DIRECTORIES = frozenset({"test", "tests"})
TEST_STEM_SUFFIXES = ("Test", "Tests", "IT")

# Synthetic method names for code outside any method body.
STATIC_INITIALIZER = "<clinit>"
INSTANCE_INITIALIZER = "<init>"


def _collapse(text: str) -> str:
    return " ".join(text.split())


class JavaFrontEnd:
    """
    Turns one Java compilation unit into identifier records. Parsers are
    kept per thread; a front-end instance can be shared by scan workers.
    """

    extensions = (".java",)

    def __init__(self):
        self._local = threading.local()

    def _parser(self) -> Parser:
        parser = getattr(self._local, "parser", None)
        if parser is None:
            parser = Parser(JAVA_LANGUAGE)
            self._local.parser = parser
        return parser

    def parse(self, file_path: str, source_text: str, project: str) -> List[IdentifierRecord]:
        """Raises SourceParseError when the tree has syntax errors."""
        source = source_text.encode("utf-8")
        tree = self._parser().parse(source)
        if tree.root_node.has_error:
            line = _first_error_line(tree.root_node)
            raise SourceParseError(file_path, f"syntax error near line {line}")
        return _Walker(source, file_path, project).walk(tree.root_node)


def _first_error_line(root: Node) -> int:
    stack = [root]
    while stack:
        node = stack.pop()
        if node.type == "ERROR" or node.is_missing:
            return node.start_point[0] + 1
        if node.has_error:
            stack.extend(reversed(node.children))
    return root.start_point[0] + 1


class _Walker:
    """Iterative pre-order walk carrying (enclosing class, enclosing method)."""

    def __init__(self, source: bytes, file_path: str, project: str):
        self.source = source
        self.file_path = file_path
        self.project = project
        self.records: List[IdentifierRecord] = []

    def text(self, node: Optional[Node]) -> Optional[str]:
        if node is None:
            return None
        return self.source[node.start_byte:node.end_byte].decode("utf-8", errors="replace")

    def type_text(self, node: Optional[Node], dimensions: Optional[Node] = None) -> Optional[str]:
        text = self.text(node)
        if not text:
            return None
        text = _collapse(text)
        if text == "var":
            return None
        if dimensions is not None:
            text += _collapse(self.text(dimensions)).replace(" ", "")
        return text

    def add(self, name_node: Optional[Node], kind: IdentifierKind, enclosing_class: Optional[str],
            enclosing_method: Optional[str], declared_type: Optional[str] = None,
            value: Optional[Node] = None, supertypes: Tuple[str, ...] = ()):
        if name_node is None:
            return
        name = self.text(name_node)
        if not name or name == "_":
            return
        if kind in (IdentifierKind.PARAMETER, IdentifierKind.LOCAL_VARIABLE):
            enclosing_method = enclosing_method or INSTANCE_INITIALIZER
        literal = expression = None
        if value is not None:
            expression = _collapse(self.text(value))[:SOURCE_EXPRESSION_LIMIT] or None
            if value.type in LITERAL_TYPES:
                literal = self.text(value)
        row, col = name_node.start_point
        self.records.append(IdentifierRecord.create(
            project=self.project,
            file_path=self.file_path,
            name=name,
            kind=kind,
            line=row + 1,
            column=col + 1,
            declared_type=declared_type,
            enclosing_class=enclosing_class,
            enclosing_method=enclosing_method,
            initializer_literal=literal,
            source_expression=expression,
            supertypes=supertypes,
        ))

    def supertypes(self, node: Node) -> Tuple[str, ...]:
        names: List[str] = []
        for child in node.named_children:
            if child.type == "superclass":
                names.extend(_collapse(self.text(t)) for t in child.named_children)
            elif child.type in ("super_interfaces", "extends_interfaces"):
                for type_list in child.named_children:
                    names.extend(_collapse(self.text(t)) for t in type_list.named_children)
        return tuple(names)

    def declarators(self, node: Node, kind: IdentifierKind, cls: Optional[str], method: Optional[str]):
        base = node.child_by_field_name("type")
        for declarator in node.children_by_field_name("declarator"):
            self.add(declarator.child_by_field_name("name"), kind, cls, method,
                     declared_type=self.type_text(base, declarator.child_by_field_name("dimensions")),
                     value=declarator.child_by_field_name("value"))

    def parameter(self, node: Node, cls: Optional[str], method: Optional[str]):
        owner = node.parent.parent if node.parent is not None else None
        if owner is not None and owner.type == "record_declaration":
            kind, method = IdentifierKind.FIELD, None
        elif owner is not None and owner.type == "lambda_expression":
            kind = IdentifierKind.LOCAL_VARIABLE
        else:
            kind = IdentifierKind.PARAMETER
        if node.type == "spread_parameter":
            # (modifiers)? type "..." variable_declarator
            type_node = next((c for c in node.named_children if c.type not in ("modifiers", "variable_declarator")),
                             None)
            declarator = next((c for c in node.named_children if c.type == "variable_declarator"), None)
            declared = self.type_text(type_node)
            self.add(declarator.child_by_field_name("name") if declarator else None, kind, cls, method,
                     declared_type=f"{declared}..." if declared else None)
            return
        self.add(node.child_by_field_name("name"), kind, cls, method,
                 declared_type=self.type_text(node.child_by_field_name("type"),
                                              node.child_by_field_name("dimensions")))

    def walk(self, root: Node) -> List[IdentifierRecord]:
        stack: List[Tuple[Node, Optional[str], Optional[str]]] = [(root, None, None)]
        while stack:
            node, cls, method = stack.pop()
            kind = node.type
            inner_cls, inner_method = cls, method

            if kind in TYPE_DECLARATIONS:
                name_node = node.child_by_field_name("name")
                self.add(name_node, TYPE_DECLARATIONS[kind], cls, method, supertypes=self.supertypes(node))
                if name_node is not None:
                    inner_cls, inner_method = self.text(name_node), None
            elif kind == "method_declaration":
                name_node = node.child_by_field_name("name")
                self.add(name_node, IdentifierKind.METHOD, cls, None,
                         declared_type=self.type_text(node.child_by_field_name("type"),
                                                      node.child_by_field_name("dimensions")))
                inner_method = self.text(name_node)
            elif kind in ("constructor_declaration", "compact_constructor_declaration"):
                inner_method = self.text(node.child_by_field_name("name")) or cls
            elif kind == "static_initializer":
                inner_method = STATIC_INITIALIZER
            elif kind == "block" and node.parent is not None and node.parent.type == "class_body":
                inner_method = INSTANCE_INITIALIZER
            elif kind == "class_body" and node.parent is not None and node.parent.type in (
                    "object_creation_expression", "enum_constant"):
                inner_method = None
            elif kind == "enum_constant":
                self.add(node.child_by_field_name("name"), IdentifierKind.ENUM_CONSTANT, cls, None,
                         declared_type=cls)
            elif kind in ("field_declaration", "constant_declaration"):
                self.declarators(node, IdentifierKind.FIELD, cls, None)
            elif kind == "local_variable_declaration":
                self.declarators(node, IdentifierKind.LOCAL_VARIABLE, cls, method)
            elif kind in ("formal_parameter", "spread_parameter"):
                self.parameter(node, cls, method)
            elif kind == "catch_formal_parameter":
                catch_type = next((c for c in node.named_children if c.type == "catch_type"), None)
                self.add(node.child_by_field_name("name"), IdentifierKind.LOCAL_VARIABLE, cls, method,
                         declared_type=self.type_text(catch_type))
            elif kind == "resource" and node.child_by_field_name("name") is not None:
                self.add(node.child_by_field_name("name"), IdentifierKind.LOCAL_VARIABLE, cls, method,
                         declared_type=self.type_text(node.child_by_field_name("type")),
                         value=node.child_by_field_name("value"))
            elif kind == "enhanced_for_statement":
                self.add(node.child_by_field_name("name"), IdentifierKind.LOCAL_VARIABLE, cls, method,
                         declared_type=self.type_text(node.child_by_field_name("type"),
                                                      node.child_by_field_name("dimensions")),
                         value=node.child_by_field_name("value"))
            elif kind == "lambda_expression":
                parameters = node.child_by_field_name("parameters")
                if parameters is not None and parameters.type == "identifier":
                    self.add(parameters, IdentifierKind.LOCAL_VARIABLE, cls, method)
                elif parameters is not None and parameters.type == "inferred_parameters":
                    for identifier in parameters.named_children:
                        self.add(identifier, IdentifierKind.LOCAL_VARIABLE, cls, method)
            elif kind == "instanceof_expression" and node.child_by_field_name("name") is not None:
                self.add(node.child_by_field_name("name"), IdentifierKind.LOCAL_VARIABLE, cls, method,
                         declared_type=self.type_text(node.child_by_field_name("right")))
            elif kind == "type_pattern":
                named = node.named_children
                identifiers = [c for c in named if c.type == "identifier"]
                types = [c for c in named if c.type not in ("identifier", "modifiers")]
                if identifiers:
                    self.add(identifiers[-1], IdentifierKind.LOCAL_VARIABLE, cls, method,
                             declared_type=self.type_text(types[0]) if types else None)

            for child in reversed(node.children):
                stack.append((child, inner_cls, inner_method))
        return self.records


_FRONT_END = JavaFrontEnd()


def parse_file(file_path: str, source_text: str, project: str) -> List[IdentifierRecord]:
    """
    Extracts the declarations of one Java file.

    Args:
        file_path: Path relative to the scan root, forward slashes.
        source_text: File contents.
        project: Project label stamped on every record.

    Raises:
        SourceParseError if the file does not parse cleanly.
    """
    return _FRONT_END.parse(file_path, source_text, project)


def is_test_file(file_path: str, config: Optional[ScanConfig] = None) -> bool:
    """Test sources by directory name or class-name suffix, plus any configured exclusion glob."""
    path = PurePosixPath(file_path)
    if any(part.lower() in TEST_DIRECTORIES for part in path.parts[:-1]):
        return True
    if path.stem.endswith(TEST_STEM_SUFFIXES):
        return True
    return config is not None and is_excluded(file_path, config)


def is_excluded(file_path: str, config: ScanConfig) -> bool:
    return any(fnmatchcase(file_path, glob) or fnmatchcase(PurePosixPath(file_path).name, glob)
               for glob in config.exclude)


def read_source(path: Path) -> str:
    """UTF-8 with a latin-1 fallback, which accepts any byte sequence."""
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        logger.debug("%s is not UTF-8; decoding as latin-1", path)
        return data.decode("latin-1")


def _scan_one(root: Path, relative: str, project: str) -> Tuple[str, Optional[List[IdentifierRecord]]]:
    try:
        return relative, parse_file(relative, read_source(root / relative), project)
    except SourceParseError as e:
        logger.warning("Skipping %s", e)
    except OSError as e:
        logger.warning("Skipping %s: %s", relative, e.strerror or e)
    return relative, None


def scan_project(root_path: str, project_label: str, config: Optional[ScanConfig] = None) -> IdentifierInventory:
    """
    Scans every non-test .java file under root_path.

    Files that fail to parse are counted and skipped; if more than
    config.failure_threshold of the files fail, the scan raises
    ParseFailureThresholdError.
    """
    config = config or ScanConfig()
    root = Path(root_path)
    if not root.is_dir():
        raise RootPathMissingError(root_path)

    candidates: List[str] = []
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.suffix not in JavaFrontEnd.extensions:
            continue
        relative = path.relative_to(root).as_posix()
        if (not config.include_tests and is_test_file(relative)) or is_excluded(relative, config):
            logger.debug("Skipping test or excluded file %s", relative)
            continue
        candidates.append(relative)

    if not candidates:
        logger.warning("No Java source files found under %s", root_path)
        return IdentifierInventory(project_label)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(lambda rel: _scan_one(root, rel, project_label), candidates))
    else:
        results = [_scan_one(root, relative, project_label) for relative in candidates]

    records: List[IdentifierRecord] = []
    failed = 0
    for _, file_records in results:
        if file_records is None:
            failed += 1
        else:
            records.extend(file_records)
    scanned = len(results) - failed

    if failed and failed / len(results) > config.failure_threshold:
        raise ParseFailureThresholdError(failed, len(results), config.failure_threshold)

    inventory = IdentifierInventory(project_label, records, files_scanned=scanned, files_failed=failed)
    logger.info("%s", inventory)
    return inventory
