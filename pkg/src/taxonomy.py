# src/taxonomy.py

"""
The similarity taxonomy: seven parent categories, thirteen flattened
categories, and the confidence levels a label can carry.
"""

from enum import Enum
from typing import Dict, List


class ParentCategory(str, Enum):
    STANDARDIZED = "standardized"
    INCONSISTENT = "inconsistent"
    COLLIDING = "colliding"
    TYPE_BASED = "type_based"
    DERIVATIONAL = "derivational"
    NUMERIC = "numeric"
    CONCISE = "concise"


class TaxonomyCategory(str, Enum):
    # Declaration order is the report order (parents grouped).
    STANDARDIZED_REPETITIVE = "standardized_repetitive"
    INCONSISTENT_SEMANTIC = "inconsistent_semantic"
    COLLIDING = "colliding"
    TYPE_POLYMORPHIC = "type_polymorphic"
    TYPE_CARDINALITY = "type_cardinality"
    DERIV_TRANSFORMATION = "deriv_transformation"
    DERIV_TYPE_DESCRIPTIVE = "deriv_type_descriptive"
    DERIV_TEMPORARY = "deriv_temporary"
    NUMERIC_SEQUENTIAL = "numeric_sequential"
    NUMERIC_VALUE_ENCODED = "numeric_value_encoded"
    CONCISE_ABBREVIATED = "concise_abbreviated"
    CONCISE_ACRONYM = "concise_acronym"
    CONCISE_SINGLE_CHAR = "concise_single_char"

    @property
    def parent(self) -> ParentCategory:
        return _PARENTS[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]


class Confidence(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


_PARENTS: Dict[TaxonomyCategory, ParentCategory] = {
    TaxonomyCategory.STANDARDIZED_REPETITIVE: ParentCategory.STANDARDIZED,
    TaxonomyCategory.INCONSISTENT_SEMANTIC: ParentCategory.INCONSISTENT,
    TaxonomyCategory.COLLIDING: ParentCategory.COLLIDING,
    TaxonomyCategory.TYPE_POLYMORPHIC: ParentCategory.TYPE_BASED,
    TaxonomyCategory.TYPE_CARDINALITY: ParentCategory.TYPE_BASED,
    TaxonomyCategory.DERIV_TRANSFORMATION: ParentCategory.DERIVATIONAL,
    TaxonomyCategory.DERIV_TYPE_DESCRIPTIVE: ParentCategory.DERIVATIONAL,
    TaxonomyCategory.DERIV_TEMPORARY: ParentCategory.DERIVATIONAL,
    TaxonomyCategory.NUMERIC_SEQUENTIAL: ParentCategory.NUMERIC,
    TaxonomyCategory.NUMERIC_VALUE_ENCODED: ParentCategory.NUMERIC,
    TaxonomyCategory.CONCISE_ABBREVIATED: ParentCategory.CONCISE,
    TaxonomyCategory.CONCISE_ACRONYM: ParentCategory.CONCISE,
    TaxonomyCategory.CONCISE_SINGLE_CHAR: ParentCategory.CONCISE,
}

PARENT_DISPLAY_NAMES: Dict[ParentCategory, str] = {
    ParentCategory.STANDARDIZED: "Standardized Names",
    ParentCategory.INCONSISTENT: "Inconsistent Names",
    ParentCategory.COLLIDING: "Colliding Names",
    ParentCategory.TYPE_BASED: "Type-Based Variants",
    ParentCategory.DERIVATIONAL: "Derivational Variants",
    ParentCategory.NUMERIC: "Numeric Names",
    ParentCategory.CONCISE: "Concise Variants",
}

_DISPLAY_NAMES: Dict[TaxonomyCategory, str] = {
    TaxonomyCategory.STANDARDIZED_REPETITIVE: "Standardized Repetitive Names",
    TaxonomyCategory.INCONSISTENT_SEMANTIC: "Inconsistent Semantic Names",
    TaxonomyCategory.COLLIDING: "Colliding Names",
    TaxonomyCategory.TYPE_POLYMORPHIC: "Type-Based Variants - Polymorphic",
    TaxonomyCategory.TYPE_CARDINALITY: "Type-Based Variants - Cardinality",
    TaxonomyCategory.DERIV_TRANSFORMATION: "Derivational Variants - Transformation",
    TaxonomyCategory.DERIV_TYPE_DESCRIPTIVE: "Derivational Variants - Type-Descriptive",
    TaxonomyCategory.DERIV_TEMPORARY: "Derivational Variants - Temporary",
    TaxonomyCategory.NUMERIC_SEQUENTIAL: "Numeric Names - Sequential",
    TaxonomyCategory.NUMERIC_VALUE_ENCODED: "Numeric Names - Value-Encoded",
    TaxonomyCategory.CONCISE_ABBREVIATED: "Concise Variants - Abbreviated",
    TaxonomyCategory.CONCISE_ACRONYM: "Concise Variants - Acronym",
    TaxonomyCategory.CONCISE_SINGLE_CHAR: "Concise Variants - Single-Character",
}

# Detector precedence, most specific first. The first match is the primary label.
PRECEDENCE: List[TaxonomyCategory] = [
    TaxonomyCategory.NUMERIC_VALUE_ENCODED,
    TaxonomyCategory.NUMERIC_SEQUENTIAL,
    TaxonomyCategory.TYPE_CARDINALITY,
    TaxonomyCategory.TYPE_POLYMORPHIC,
    TaxonomyCategory.DERIV_TEMPORARY,
    TaxonomyCategory.DERIV_TYPE_DESCRIPTIVE,
    TaxonomyCategory.DERIV_TRANSFORMATION,
    TaxonomyCategory.CONCISE_ACRONYM,
    TaxonomyCategory.CONCISE_ABBREVIATED,
    TaxonomyCategory.CONCISE_SINGLE_CHAR,
    TaxonomyCategory.STANDARDIZED_REPETITIVE,
    TaxonomyCategory.COLLIDING,
    TaxonomyCategory.INCONSISTENT_SEMANTIC,
]
PRECEDENCE_RANK: Dict[TaxonomyCategory, int] = {category: rank for rank, category in enumerate(PRECEDENCE)}
