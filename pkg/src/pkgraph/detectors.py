"""Weakness detectors over the merged program knowledge graph.

Each detector is a read-only rule over a sealed graph, producing
Findings with witness paths from program entry nodes to the offending
call nodes. A deterministic template generator emits equivalent
detection queries for the families that have a pure-query formulation
(banned calls and double release); the remaining families need
structural context a query cannot see, and the memory-leak family is a
declared capability gap because a call graph carries no data flow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .cparse import TranslationUnit
from .graph import PropertyGraph, values_equal
from .vulndata import CweRecord

log = logging.getLogger(__name__)

BANNED_CALL_CWES = {"CWE-242", "CWE-477"}
DOUBLE_RELEASE_CWES = {"CWE-415", "CWE-1341"}

_MISSING_RELEASE_REASON = (
    "call graph lacks data-flow; malloc's Argument1 is a size, not the released handle"
)


@dataclass
class Finding:
    cwe_id: str
    cwe_name: str
    witness_paths: list  # of Path, each ending at a terminal node
    terminal_nodes: list  # node ids
    message: str


@dataclass
class DetectorCapability:
    cwe_id: str
    supported: bool
    reason: str = ""


class UnsupportedTemplate(Exception):
    """No pure-query template exists for this weakness family."""


# ---------------------------------------------------------------------------
# Graph structure helpers
# ---------------------------------------------------------------------------

def _classify(graph: PropertyGraph):
    """Partition CallGraph nodes into (entry node ids, call-site node ids).

    Roots (no incoming CALLS edge) are function entries; an entry's
    CALLS targets are call sites; a call site's CALLS target is the
    entry of the function it invokes. Alternating from the roots
    classifies every node, including recursive cycles.
    """
    call_nodes = [n.id for n in graph.find_nodes("CallGraph")]
    roots = [
        n
        for n in call_nodes
        if not any(e.type == "CALLS" for e in graph.in_edges(n))
    ]
    entries, sites = set(roots), set()
    stack = [(n, True) for n in roots]
    while stack:
        node_id, is_entry = stack.pop()
        for edge in graph.out_edges(node_id):
            if edge.type != "CALLS":
                continue
            bucket = sites if is_entry else entries
            if edge.target not in bucket:
                bucket.add(edge.target)
                stack.append((edge.target, not is_entry))
    return entries, sites


def entry_nodes(graph: PropertyGraph) -> list:
    """CallGraph roots (no incoming CALLS edge), ascending id, with a
    node named `main` listed first when present."""
    call_nodes = graph.find_nodes("CallGraph")
    roots = [
        n.id
        for n in call_nodes
        if not any(e.type == "CALLS" for e in graph.in_edges(n.id))
    ]
    roots.sort(key=lambda n: (graph.node(n).properties.get("Name") != "main", n))
    return roots


def _call_sites_matching(graph: PropertyGraph, names: list) -> list:
    _, sites = _classify(graph)
    return [
        n
        for n in sorted(sites)
        if values_equal(graph.node(n).properties.get("Name", ""), list(names))
    ]


def _witness_paths(graph: PropertyGraph, starts: list, terminals: list) -> list:
    paths = []
    for start in starts:
        for terminal in sorted(terminals):
            paths.extend(graph.enumerate_paths(start, {terminal}, "CALLS"))
    return paths


# ---------------------------------------------------------------------------
# Detectors
# ---------------------------------------------------------------------------

def detect_banned_calls(graph: PropertyGraph, cwe: CweRecord) -> list:
    """One finding per call of a procedure in the weakness's function
    events (dangerous or obsolete APIs)."""
    findings = []
    entries = entry_nodes(graph)
    for node_id in _call_sites_matching(graph, cwe.function_events):
        name = graph.node(node_id).properties["Name"]
        findings.append(
            Finding(
                cwe_id=cwe.cwe_id,
                cwe_name=cwe.name,
                witness_paths=_witness_paths(graph, entries, [node_id]),
                terminal_nodes=[node_id],
                message=f"call to {name}",
            )
        )
    return findings


def detect_double_release(graph: PropertyGraph, cwe: CweRecord) -> list:
    """Group release-style calls by their first argument; any argument
    released more than once is one finding covering the whole group.
    Calls without a first argument cannot be correlated and are skipped."""
    groups = {}
    for node_id in _call_sites_matching(graph, cwe.function_events):
        argument = graph.node(node_id).properties.get("Argument1")
        if argument is None:
            continue
        groups.setdefault(argument, []).append(node_id)
    findings = []
    entries = entry_nodes(graph)
    for argument in sorted(groups):
        members = sorted(groups[argument])
        if len(members) < 2:
            continue
        findings.append(
            Finding(
                cwe_id=cwe.cwe_id,
                cwe_name=cwe.name,
                witness_paths=_witness_paths(graph, entries, members),
                terminal_nodes=members,
                message=f"released {argument!r} {len(members)} times",
            )
        )
    return findings


def detect_sizeof_on_pointer(
    graph: PropertyGraph, tu: Optional[TranslationUnit], cwe: CweRecord
) -> list:
    """sizeof applied to a pointer-typed local. The pointer-local sets
    come from the translation unit; without one we fall back to flagging
    sizeof over any bare identifier (weaker, documented heuristic)."""
    findings = []
    entries = entry_nodes(graph)
    for node_id in _call_sites_matching(graph, ["sizeof"]):
        node = graph.node(node_id)
        argument = node.properties.get("Argument1")
        if not isinstance(argument, str) or not argument.isidentifier():
            continue
        if tu is not None:
            fn = tu.enclosing_function(node.properties["ExecOrder"])
            if fn is None or argument not in fn.pointer_locals:
                continue
        findings.append(
            Finding(
                cwe_id=cwe.cwe_id,
                cwe_name=cwe.name,
                witness_paths=_witness_paths(graph, entries, [node_id]),
                terminal_nodes=[node_id],
                message=f"sizeof applied to pointer {argument!r}",
            )
        )
    return findings


def detect_signal_nonreentrant(graph: PropertyGraph, cwe: CweRecord) -> list:
    """A signal handler that reaches a non-reentrant procedure. The
    handler is resolved from the second argument of a signal() call;
    witness paths run from the handler's entry to the offending call."""
    entries_set, _ = _classify(graph)
    offending = _call_sites_matching(graph, cwe.function_events)
    findings = []
    for node_id in _call_sites_matching(graph, ["signal"]):
        handler_name = graph.node(node_id).properties.get("Argument2")
        handler_entries = [
            n
            for n in sorted(entries_set)
            if isinstance(handler_name, str)
            and graph.node(n).properties.get("Name") == handler_name
        ]
        if not handler_entries:
            log.warning("signal handler %r cannot be resolved to a function", handler_name)
            continue
        paths = _witness_paths(graph, handler_entries, offending)
        if not paths:
            continue
        terminals = sorted({p.end for p in paths})
        findings.append(
            Finding(
                cwe_id=cwe.cwe_id,
                cwe_name=cwe.name,
                witness_paths=paths,
                terminal_nodes=terminals,
                message=f"signal handler {handler_name!r} calls a non-reentrant function",
            )
        )
    return findings


def detect_getlogin_multithreaded(graph: PropertyGraph, cwe: CweRecord) -> list:
    """getlogin in a program that also creates threads: flag every
    getlogin call when any pthread_create call exists."""
    if not _call_sites_matching(graph, ["pthread_create"]):
        return []
    findings = []
    entries = entry_nodes(graph)
    for node_id in _call_sites_matching(graph, cwe.function_events):
        findings.append(
            Finding(
                cwe_id=cwe.cwe_id,
                cwe_name=cwe.name,
                witness_paths=_witness_paths(graph, entries, [node_id]),
                terminal_nodes=[node_id],
                message="getlogin used in a multithreaded program",
            )
        )
    return findings


def detect_missing_release(graph: PropertyGraph, cwe: CweRecord) -> DetectorCapability:
    """Memory-leak detection needs data flow the call graph does not
    carry; always reported as a capability miss, never a finding."""
    return DetectorCapability(cwe.cwe_id, supported=False, reason=_MISSING_RELEASE_REASON)


# ---------------------------------------------------------------------------
# Query templates
# ---------------------------------------------------------------------------

_DOUBLE_RELEASE_TEMPLATE = """\
MATCH (cwe:CWE {{`CWE-ID`: "{cwe_id}"}})
OPTIONAL MATCH (callgraph:CallGraph {{Name: cwe.`Function Events`}})
WITH callgraph.Argument1 AS argument1, COLLECT(callgraph) AS sameArgument1
WITH argument1, sameArgument1, SIZE(sameArgument1) AS nodeCount
WHERE nodeCount > 1
UNWIND sameArgument1 AS buggyNodes
OPTIONAL MATCH path=(startingNode:CallGraph {{Name: "{entry}"}})-[*]->(buggyNodes)
RETURN path
"""

_BANNED_CALL_TEMPLATE = """\
MATCH (cwe:CWE {{`CWE-ID`: "{cwe_id}"}})
MATCH (callgraph:CallGraph {{Name: cwe.`Function Events`}})
OPTIONAL MATCH path=(startingNode:CallGraph {{Name: "{entry}"}})-[*]->(callgraph)
RETURN callgraph, path
"""


def generate_detection_query(cwe: CweRecord, entry_name: str) -> str:
    """Deterministic query text for a weakness, selected by detection
    family. Raises UnsupportedTemplate for families whose rule needs
    non-graph context (sizeof typing, handler resolution, thread
    co-occurrence) or data flow."""
    if not cwe.function_events:
        raise UnsupportedTemplate(f"{cwe.cwe_id} has no function events")
    if cwe.cwe_id in DOUBLE_RELEASE_CWES:
        template = _DOUBLE_RELEASE_TEMPLATE
    elif cwe.cwe_id in BANNED_CALL_CWES or cwe.cwe_id not in _DISPATCH:
        template = _BANNED_CALL_TEMPLATE
    else:
        raise UnsupportedTemplate(f"no pure-query formulation for {cwe.cwe_id}")
    return template.format(cwe_id=cwe.cwe_id, entry=entry_name)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_DISPATCH = {
    "CWE-242": "banned",
    "CWE-477": "banned",
    "CWE-415": "double",
    "CWE-1341": "double",
    "CWE-467": "sizeof",
    "CWE-479": "signal",
    "CWE-558": "getlogin",
    "CWE-401": "missing-release",
}


def run_all(graph: PropertyGraph, tu: Optional[TranslationUnit], catalog: list):
    """Run every catalog entry through its detector family.

    Unknown weakness ids fall back to the banned-call rule over their
    function events. Returns (findings, capability misses); findings
    are sorted by (cwe_id, smallest terminal ExecOrder).
    """
    findings = []
    capabilities = []
    for cwe in catalog:
        family = _DISPATCH.get(cwe.cwe_id, "banned")
        if family == "banned":
            findings.extend(detect_banned_calls(graph, cwe))
        elif family == "double":
            findings.extend(detect_double_release(graph, cwe))
        elif family == "sizeof":
            findings.extend(detect_sizeof_on_pointer(graph, tu, cwe))
        elif family == "signal":
            findings.extend(detect_signal_nonreentrant(graph, cwe))
        elif family == "getlogin":
            findings.extend(detect_getlogin_multithreaded(graph, cwe))
        else:
            capabilities.append(detect_missing_release(graph, cwe))

    def order(f: Finding):
        min_exec = min(
            (graph.node(t).properties.get("ExecOrder", 0) for t in f.terminal_nodes),
            default=0,
        )
        return (f.cwe_id, min_exec)

    findings.sort(key=order)
    return findings, capabilities
