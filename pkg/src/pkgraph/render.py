"""Canonical rendering and interchange export.

One renderer produces node/path strings for finding reports and query
results alike, so the two pipelines emit byte-identical text. Graph
export follows the bulk-import CSV header convention (id:ID, :LABEL,
:START_ID, :END_ID, :TYPE) plus a DOT emitter for visualization. All
output is locale-independent and byte-stable.
"""

from __future__ import annotations

import csv
import io
import json

from .graph import Node, Path, PropertyGraph

from .vulndata import CsvError


class ExportError(Exception):
    """Export requested on a graph that is not sealed."""


def render_scalar(value, quote_text: bool = True) -> str:
    if isinstance(value, str):
        if not quote_text:
            return value
        return '"' + value.replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(render_scalar(v) for v in value) + "]"
    raise TypeError(f"not a property value: {value!r}")


def render_node(node: Node) -> str:
    """`(:Label {k1: v1, ...})` with keys ascending; a node without
    properties renders without the braces."""
    if not node.properties:
        return f"(:{node.label})"
    body = ", ".join(
        f"{key}: {render_scalar(node.properties[key])}" for key in sorted(node.properties)
    )
    return f"(:{node.label} {{{body}}})"


def render_path(graph: PropertyGraph, path: Path) -> str:
    out = render_node(graph.node(path.nodes[0]))
    for k, edge_id in enumerate(path.edges):
        edge = graph.edge(edge_id)
        out += f"-[:{edge.type}]->" + render_node(graph.node(path.nodes[k + 1]))
    return out


def findings_to_json(findings: list, capabilities: list, graph: PropertyGraph) -> bytes:
    """Stable-key-order JSON report; byte-identical for identical inputs."""
    doc = {
        "version": 1,
        "findings": [
            {
                "cwe_id": f.cwe_id,
                "cwe_name": f.cwe_name,
                "message": f.message,
                "paths": [render_path(graph, p) for p in f.witness_paths],
                "terminals": [
                    {
                        "label": graph.node(t).label,
                        "properties": {
                            k: graph.node(t).properties[k]
                            for k in sorted(graph.node(t).properties)
                        },
                    }
                    for t in f.terminal_nodes
                ],
            }
            for f in findings
        ],
        "unsupported": [{"cwe_id": c.cwe_id, "reason": c.reason} for c in capabilities],
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# CSV bulk-import format
# ---------------------------------------------------------------------------

def _column_for(key: str, value) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        return f"{key}:int"
    if isinstance(value, float):
        return f"{key}:float"
    if isinstance(value, list):
        return f"{key}:string[]"
    return key


def _cell_for(value) -> str:
    if isinstance(value, list):
        return ";".join(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_import_csv(graph: PropertyGraph):
    """Serialize to (nodes.csv, relationships.csv) bytes.

    Node ids are renumbered 1..N in ascending-id order so that
    export -> import -> export is byte-stable. Property columns are the
    union of keys seen, typed from their values, sorted by name.
    """
    if not graph.sealed:
        raise ExportError("graph must be sealed before export")
    columns = {}
    for node in graph.nodes():
        for key, value in node.properties.items():
            columns[(key, _column_for(key, value))] = None
    prop_columns = sorted(columns, key=lambda kc: (kc[0], kc[1]))

    canonical = {node.id: i for i, node in enumerate(graph.nodes(), start=1)}
    nodes_out = io.StringIO()
    writer = csv.writer(nodes_out, lineterminator="\n")
    writer.writerow(["id:ID", ":LABEL"] + [c for _, c in prop_columns])
    for node in graph.nodes():
        row = [str(canonical[node.id]), node.label]
        for key, column in prop_columns:
            value = node.properties.get(key)
            if value is not None and _column_for(key, value) == column:
                row.append(_cell_for(value))
            else:
                row.append("")
        writer.writerow(row)

    rels_out = io.StringIO()
    writer = csv.writer(rels_out, lineterminator="\n")
    writer.writerow([":START_ID", ":END_ID", ":TYPE"])
    rows = sorted(
        (canonical[e.source], canonical[e.target], e.type, e.id) for e in graph.edges()
    )
    for source, target, edge_type, _ in rows:
        writer.writerow([str(source), str(target), edge_type])
    return nodes_out.getvalue().encode("utf-8"), rels_out.getvalue().encode("utf-8")


def _parse_cell(column: str, cell: str):
    if column.endswith(":int"):
        return int(cell)
    if column.endswith(":float"):
        return float(cell)
    if column.endswith(":string[]"):
        return [part for part in cell.split(";") if part]
    return cell


def import_csv(nodes: bytes, relationships: bytes) -> PropertyGraph:
    """Rebuild a graph (unsealed) from exported CSV bytes; the result is
    isomorphic to the exported graph with fresh ids."""
    graph = PropertyGraph()
    id_map = {}

    node_rows = list(csv.reader(io.StringIO(nodes.decode("utf-8"))))
    if not node_rows or node_rows[0][:2] != ["id:ID", ":LABEL"]:
        raise CsvError(1, "nodes.csv must start with id:ID,:LABEL columns")
    columns = node_rows[0][2:]
    for i, row in enumerate(node_rows[1:], start=2):
        if len(row) != len(columns) + 2:
            raise CsvError(i, f"expected {len(columns) + 2} columns, got {len(row)}")
        external_id, label = row[0], row[1]
        if external_id in id_map:
            raise CsvError(i, f"duplicate node id {external_id!r}")
        properties = {}
        for column, cell in zip(columns, row[2:]):
            if cell == "":
                continue
            key = column.split(":", 1)[0]
            try:
                properties[key] = _parse_cell(column, cell)
            except ValueError:
                raise CsvError(i, f"bad {column} value {cell!r}") from None
        id_map[external_id] = graph.add_node(label, properties)

    rel_rows = list(csv.reader(io.StringIO(relationships.decode("utf-8"))))
    if not rel_rows or rel_rows[0] != [":START_ID", ":END_ID", ":TYPE"]:
        raise CsvError(1, "relationships.csv must have :START_ID,:END_ID,:TYPE columns")
    for i, row in enumerate(rel_rows[1:], start=2):
        if len(row) != 3:
            raise CsvError(i, f"expected 3 columns, got {len(row)}")
        source, target, edge_type = row
        if source not in id_map or target not in id_map:
            raise CsvError(i, f"edge references unknown node id {source!r}/{target!r}")
        graph.add_edge(id_map[source], id_map[target], edge_type)
    return graph


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------

def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(graph: PropertyGraph) -> str:
    """DOT digraph; node label = Name property when present, else the
    node's graph label. Deterministic emission order."""
    if graph.node_count == 0 and graph.edge_count == 0:
        return "digraph G { }\n"
    lines = ["digraph G {"]
    for node in graph.nodes():
        label = node.properties.get("Name", node.label)
        lines.append(f'  n{node.id} [label="{_dot_escape(str(label))}"];')
    for edge in graph.edges():
        lines.append(f'  n{edge.source} -> n{edge.target} [label="{_dot_escape(edge.type)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
