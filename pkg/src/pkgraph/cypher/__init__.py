"""Parser and evaluator for the supported Cypher subset."""

from .parser import parse_query, QuerySyntaxError
from .eval import execute_query, format_result_table, ResultTable, UnboundVariable, TypeMismatch
from .ast import Query, query_text

__all__ = [
    "parse_query",
    "QuerySyntaxError",
    "execute_query",
    "format_result_table",
    "ResultTable",
    "UnboundVariable",
    "TypeMismatch",
    "Query",
    "query_text",
]
