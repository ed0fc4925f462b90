# src/lexicon.py

"""
Soft-word splitting of identifier names and the lexical predicates the
similarity detectors are built from. Everything here is pure.
"""

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .errors import DictionaryError, OutputError

logger = logging.getLogger(__name__)

DEFAULT_DICTIONARY_PATH = Path(__file__).parent / "data" / "abbreviations.json"
SEPARATORS = "_$"
TEMPORARY_TOKENS = frozenset({"tmp", "temp", "temporary"})

# --- Character classes used by the splitter ---
_UPPER, _LOWER, _DIGIT, _SEP = "U", "L", "D", "S"


def _char_class(ch: str) -> str:
    if ch in SEPARATORS:
        return _SEP
    if ch.isdigit():
        return _DIGIT
    if ch.isupper():
        return _UPPER
    return _LOWER  # lowercase and caseless letters


@dataclass(frozen=True)
class NameTokenization:
    original: str
    tokens: Tuple[str, ...]
    had_separators: bool


def normalize_name(name: str) -> str:
    """Lowercases a name and drops '_' and '$'."""
    return "".join(ch for ch in name if ch not in SEPARATORS).lower()


@lru_cache(maxsize=65536)
def split_name(name: str) -> NameTokenization:
    """
    Splits an identifier into lowercase soft words.

    Boundaries: separators ('_', '$'), lower->upper ("agentName"),
    the end of an upper-case run followed by lower case ("HTTPServer" ->
    http, server), and letter<->digit ("COUNT_2" -> count, 2).
    A name made only of separators becomes a single token of itself.
    """
    tokens: List[str] = []
    current: List[str] = []
    previous = None

    for index, ch in enumerate(name):
        cls = _char_class(ch)
        if cls == _SEP:
            if current:
                tokens.append("".join(current))
                current = []
            previous = None
            continue
        if current and previous is not None:
            boundary = False
            if cls == _DIGIT or previous == _DIGIT:
                boundary = cls != previous
            elif previous == _LOWER and cls == _UPPER:
                boundary = True
            elif previous == _UPPER and cls == _UPPER:
                following = name[index + 1] if index + 1 < len(name) else ""
                boundary = following != "" and _char_class(following) == _LOWER
            if boundary:
                tokens.append("".join(current))
                current = []
        current.append(ch)
        previous = cls

    if current:
        tokens.append("".join(current))
    if not tokens:
        tokens = [name]
    return NameTokenization(
        original=name,
        tokens=tuple(token.lower() for token in tokens),
        had_separators=any(ch in SEPARATORS for ch in name),
    )


class AbbreviationDictionary:
    """Maps short forms to the long forms they abbreviate (all lowercase)."""

    def __init__(self, entries: Optional[Mapping[str, Iterable[str]]] = None):
        self.entries: Dict[str, FrozenSet[str]] = {}
        for short, longs in (entries or {}).items():
            self.add(short, longs)

    def add(self, short: str, longs: Iterable[str]):
        short = short.lower()
        longs = frozenset(long.lower() for long in longs)
        for long in longs:
            if len(short) >= len(long):
                raise DictionaryError(f"Abbreviation '{short}' is not shorter than '{long}'")
        self.entries[short] = self.entries.get(short, frozenset()) | longs

    def maps(self, short: str, long: str) -> bool:
        return long.lower() in self.entries.get(short.lower(), ())

    def merged_with(self, other: "AbbreviationDictionary") -> "AbbreviationDictionary":
        merged = AbbreviationDictionary(self.entries)
        for short, longs in other.entries.items():
            merged.add(short, longs)
        return merged

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def load(cls, path) -> "AbbreviationDictionary":
        """
        Loads a dictionary file: a JSON object {short: [long, ...]} with
        lowercase keys. Any structural problem raises DictionaryError.
        """
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except json.JSONDecodeError as e:
            raise DictionaryError(f"Abbreviation dictionary '{path}' is not valid JSON: {e}") from e
        except FileNotFoundError as e:
            raise DictionaryError(f"Abbreviation dictionary '{path}' not found") from e
        except OSError as e:
            raise OutputError(str(path), e) from e

        if not isinstance(data, dict):
            raise DictionaryError(f"Abbreviation dictionary '{path}' must be a JSON object")
        for short, longs in data.items():
            if short != short.lower() or not short:
                raise DictionaryError(f"Abbreviation key '{short}' must be non-empty lowercase")
            if not isinstance(longs, list) or not all(isinstance(long, str) and long for long in longs):
                raise DictionaryError(f"Expansions of '{short}' must be a list of strings")
        return cls(data)


@lru_cache(maxsize=1)
def default_dictionary() -> AbbreviationDictionary:
    return AbbreviationDictionary.load(DEFAULT_DICTIONARY_PATH)


def load_dictionary(path: Optional[str] = None) -> AbbreviationDictionary:
    """The shipped dictionary, extended with the user's file when one is given."""
    dictionary = default_dictionary()
    if path:
        dictionary = dictionary.merged_with(AbbreviationDictionary.load(path))
        logger.debug("Loaded abbreviation dictionary %s (%d short forms)", path, len(dictionary))
    return dictionary


# --- Predicates ---

def _is_subsequence(short: str, long: str) -> bool:
    remaining = iter(long)
    return all(ch in remaining for ch in short)


def is_abbreviation_of(short: str, long: str,
                       dictionary: Optional[AbbreviationDictionary] = None,
                       prefix_ratio: float = 0.75,
                       subsequence_ratio: float = 0.6) -> bool:
    """
    True when `short` abbreviates `long` (case-insensitive): a dictionary
    entry, a strict prefix at most prefix_ratio of the length, or a
    subsequence sharing the first letter at most subsequence_ratio of the length.
    """
    short, long = short.lower(), long.lower()
    if not short or not long or len(short) >= len(long):
        return False
    if dictionary is not None and dictionary.maps(short, long):
        return True
    ratio = len(short) / len(long)
    if long.startswith(short) and ratio <= prefix_ratio:
        return True
    return short[0] == long[0] and ratio <= subsequence_ratio and _is_subsequence(short, long)


def is_acronym_of(name: str, phrase_tokens: Iterable[str]) -> bool:
    tokens = [token for token in phrase_tokens if token]
    if len(tokens) < 2:
        return False
    return name.lower() == "".join(token[0] for token in tokens)


def strip_numeric_suffix(name: str) -> Tuple[str, Optional[int]]:
    """
    Splits a trailing run of decimal digits (optionally preceded by '_')
    off a name: "cust1" -> ("cust", 1), "COUNT_2" -> ("COUNT", 2).
    Returns (name, None) when there is no such run or the stem would be empty.
    """
    end = len(name)
    start = end
    while start > 0 and "0" <= name[start - 1] <= "9":
        start -= 1
    if start == end:
        return name, None
    stem = name[:start]
    if stem.endswith("_"):
        stem = stem[:-1]
    if not stem.strip("_$"):
        return name, None
    return stem, int(name[start:])


def _plural_forms(singular: str) -> Tuple[str, ...]:
    forms = [singular + "s", singular + "es"]
    if singular.endswith("y") and len(singular) > 1:
        forms.append(singular[:-1] + "ies")
    return tuple(forms)


def is_plural_of(singular: str, plural: str) -> bool:
    """True when the final soft words differ by "s", "es" or "y"->"ies" and the rest match."""
    single_tokens = split_name(singular).tokens
    plural_tokens = split_name(plural).tokens
    if len(single_tokens) != len(plural_tokens):
        return False
    if single_tokens[:-1] != plural_tokens[:-1]:
        return False
    return plural_tokens[-1] in _plural_forms(single_tokens[-1])


def join_camel(tokens: Iterable[str]) -> str:
    tokens = list(tokens)
    if not tokens:
        return ""
    return tokens[0] + "".join(token.capitalize() for token in tokens[1:])


def has_temporary_affix(name: str) -> Tuple[bool, str]:
    """
    Detects a tmp/temp/temporary soft word. Returns the flag and the name
    re-joined in camel case without that word ("rolesTmp" -> (True, "roles")).
    """
    tokens = split_name(name).tokens
    for index, token in enumerate(tokens):
        if token in TEMPORARY_TOKENS:
            rest = tokens[:index] + tokens[index + 1:]
            return True, (join_camel(rest) if rest else name)
    return False, name
