"""pkgraph: program knowledge graph vulnerability scanner.

Merges CVE/CWE catalog data with call graphs extracted from C source
into one property graph, then finds weaknesses either with programmatic
detectors or with graph-pattern queries.
"""

__version__ = "0.1.0"

from .graph import PropertyGraph, Path, GraphSealed, InvalidLabel, UnknownNode
from .cparse import extract_translation_unit, build_call_graph, TranslationUnit, ParseError
from .vulndata import (
    CweRecord,
    CveRecord,
    CsvError,
    parse_cwe_csv,
    parse_cve_csv,
    build_knowledge_graph,
)
from .detectors import Finding, DetectorCapability, run_all, generate_detection_query
from .cypher.parser import parse_query, QuerySyntaxError
from .cypher.eval import execute_query, format_result_table

__all__ = [
    "PropertyGraph",
    "Path",
    "GraphSealed",
    "InvalidLabel",
    "UnknownNode",
    "extract_translation_unit",
    "build_call_graph",
    "TranslationUnit",
    "ParseError",
    "CweRecord",
    "CveRecord",
    "CsvError",
    "parse_cwe_csv",
    "parse_cve_csv",
    "build_knowledge_graph",
    "Finding",
    "DetectorCapability",
    "run_all",
    "generate_detection_query",
    "parse_query",
    "QuerySyntaxError",
    "execute_query",
    "format_result_table",
    "__version__",
]
