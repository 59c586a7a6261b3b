"""CVE/CWE catalog parsing and knowledge-graph construction.

CSV dialect: comma-separated, double-quote quoting with "" escape,
required header, UTF-8. Multi-valued fields (function events, affected
versions) use ';' inside a single cell.

The knowledge-graph shape per catalog row:

    CWE  -HAS_CVE->  CVE  -SCORED->   Score
                     CVE  -AFFECTS->  Product   (one node per product+version)
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

from .graph import PropertyGraph

CWE_COLUMNS = ["cwe_id", "name", "description", "function_events"]
CVE_COLUMNS = ["cve_id", "description", "cwe_id", "cvss2_score", "product", "affected_versions"]

_CWE_ID_RE = re.compile(r"^CWE-[1-9][0-9]*$")
_CVE_ID_RE = re.compile(r"^CVE-[0-9]{4}-[0-9]{4,}$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class CsvError(Exception):
    """A catalog CSV row failed validation."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass
class CweRecord:
    cwe_id: str
    name: str
    description: str
    function_events: list


@dataclass
class CveRecord:
    cve_id: str
    description: str
    cwe_id: str
    cvss2_score: float
    product: str
    affected_versions: list


@dataclass
class IngestStats:
    nodes_created: int = 0
    edges_created: int = 0
    orphan_cves: int = 0


def _split_list(cell: str) -> list:
    return [part.strip() for part in cell.split(";") if part.strip()]


def _read_rows(text: bytes, expected_header: list) -> list:
    reader = csv.reader(io.StringIO(text.decode("utf-8")))
    rows = list(reader)
    if not rows:
        raise CsvError(1, "missing header row")
    if rows[0] != expected_header:
        raise CsvError(1, f"expected header {','.join(expected_header)}")
    return rows[1:]


def parse_cwe_csv(text: bytes) -> list:
    """Parse a weakness catalog; one CweRecord per data row."""
    records = []
    for i, row in enumerate(_read_rows(text, CWE_COLUMNS), start=2):
        if len(row) != len(CWE_COLUMNS):
            raise CsvError(i, f"expected {len(CWE_COLUMNS)} columns, got {len(row)}")
        cwe_id, name, description, events_cell = row
        if not _CWE_ID_RE.match(cwe_id):
            raise CsvError(i, f"malformed cwe_id {cwe_id!r}")
        if not name:
            raise CsvError(i, "empty name")
        events = _split_list(events_cell)
        for event in events:
            if not _IDENT_RE.match(event):
                raise CsvError(i, f"function event {event!r} is not a valid identifier")
        records.append(CweRecord(cwe_id, name, description, events))
    return records


def parse_cve_csv(text: bytes) -> list:
    """Parse a vulnerability catalog; one CveRecord per data row."""
    records = []
    for i, row in enumerate(_read_rows(text, CVE_COLUMNS), start=2):
        if len(row) != len(CVE_COLUMNS):
            raise CsvError(i, f"expected {len(CVE_COLUMNS)} columns, got {len(row)}")
        cve_id, description, cwe_id, score_cell, product, versions_cell = row
        if not _CVE_ID_RE.match(cve_id):
            raise CsvError(i, f"malformed cve_id {cve_id!r}")
        try:
            score = float(score_cell)
        except ValueError:
            raise CsvError(i, f"non-numeric cvss2_score {score_cell!r}") from None
        if not 0.0 <= score <= 10.0:
            raise CsvError(i, f"cvss2_score {score} outside [0.0, 10.0]")
        records.append(
            CveRecord(cve_id, description, cwe_id, score, product, _split_list(versions_cell))
        )
    return records


def build_knowledge_graph(cwes: list, cves: list, graph: PropertyGraph) -> IngestStats:
    """Materialize catalog records as CWE/CVE/Score/Product nodes.

    Product nodes are deduplicated per (product, version) pair across
    CVEs; Score nodes are per-CVE. A CVE whose cwe_id is not in the CWE
    list is ingested without a HAS_CVE edge and counted as an orphan.
    """
    stats = IngestStats()
    cwe_nodes = {}
    for cwe in cwes:
        node_id = graph.add_node(
            "CWE",
            {
                "CWE-ID": cwe.cwe_id,
                "Name": cwe.name,
                "Description": cwe.description,
                "Function Events": list(cwe.function_events),
            },
        )
        cwe_nodes[cwe.cwe_id] = node_id
        stats.nodes_created += 1

    product_nodes = {}
    for cve in cves:
        cve_node = graph.add_node("CVE", {"CVE-ID": cve.cve_id, "Description": cve.description})
        score_node = graph.add_node("Score", {"CVSS2": cve.cvss2_score})
        stats.nodes_created += 2
        graph.add_edge(cve_node, score_node, "SCORED")
        stats.edges_created += 1
        if cve.cwe_id in cwe_nodes:
            graph.add_edge(cwe_nodes[cve.cwe_id], cve_node, "HAS_CVE")
            stats.edges_created += 1
        else:
            stats.orphan_cves += 1
        for version in cve.affected_versions:
            key = (cve.product, version)
            if key not in product_nodes:
                product_nodes[key] = graph.add_node(
                    "Product", {"Name": cve.product, "Version": version}
                )
                stats.nodes_created += 1
            graph.add_edge(cve_node, product_nodes[key], "AFFECTS")
            stats.edges_created += 1
    return stats
