"""vquery: an in-memory graph pattern query engine with side-by-side
vectorized (batch) and row-at-a-time executors over sorted triple indexes.
"""

from .batch import BatchPool, ColumnBatch, pivot_from_rows, pivot_to_rows
from .errors import (ContractViolation, FrozenStore, NoSuitableIndex, NullId,
                     ParseError, QueryMemoryExceeded, UnknownId,
                     UnsortedInput, UnsupportedFeature, VQueryError)
from .parser import Query, parse_query
from .planner import ExecutablePlan, SessionConfig, plan_query
from .storage import TripleStore
from .terms import NULL_ID, Dictionary, Term, bnode, iri, literal

__version__ = "0.1.0"

__all__ = [
    "BatchPool", "ColumnBatch", "ContractViolation", "Dictionary",
    "ExecutablePlan", "FrozenStore", "NULL_ID", "NoSuitableIndex", "NullId",
    "ParseError", "Query", "QueryMemoryExceeded", "SessionConfig", "Term",
    "TripleStore", "UnknownId", "UnsortedInput", "UnsupportedFeature",
    "VQueryError", "bnode", "iri", "literal", "parse_query",
    "pivot_from_rows", "pivot_to_rows", "plan_query",
]
