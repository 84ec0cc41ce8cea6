"""Partition- and weight-covering arrays: verification, construction, bounds, exact search."""

from covkit.arrays import (
    Array,
    DeficiencyReport,
    Kind,
    PartitionClass,
    Scheme,
    WeightClass,
    find_deficiencies,
    is_covering,
    parse_array,
    serialize_array,
)

__version__ = "0.1.0"

__all__ = [
    "Array",
    "DeficiencyReport",
    "Kind",
    "PartitionClass",
    "Scheme",
    "WeightClass",
    "find_deficiencies",
    "is_covering",
    "parse_array",
    "serialize_array",
]
