import random

import pytest

from conftest import (
    DOUBLE_FREE_INTERPROC_SRC,
    DOUBLE_FREE_SRC,
    call_graph_of,
    catalog_entry,
    load_catalog,
    merged_graph_of,
)
from pkgraph.cypher.eval import execute_query
from pkgraph.cypher.parser import parse_query
from pkgraph.detectors import (
    UnsupportedTemplate,
    detect_banned_calls,
    detect_double_release,
    detect_getlogin_multithreaded,
    detect_missing_release,
    detect_signal_nonreentrant,
    detect_sizeof_on_pointer,
    entry_nodes,
    generate_detection_query,
    run_all,
)
from pkgraph.graph import PropertyGraph
from pkgraph.render import render_node
from pkgraph.vulndata import CweRecord


def names_of(graph, ids):
    return [graph.node(i).properties["Name"] for i in ids]


class TestEntryNodes:
    def test_single_function(self):
        graph, _ = call_graph_of(DOUBLE_FREE_SRC)
        assert names_of(graph, entry_nodes(graph)) == ["foo"]

    def test_called_function_is_not_a_root(self):
        graph, _ = call_graph_of(DOUBLE_FREE_INTERPROC_SRC)
        assert names_of(graph, entry_nodes(graph)) == ["main"]

    def test_empty_graph(self):
        graph = PropertyGraph()
        graph.seal()
        assert entry_nodes(graph) == []

    def test_main_listed_first(self):
        graph, _ = call_graph_of("void aux() { g(); }\nvoid main() { h(); }")
        assert names_of(graph, entry_nodes(graph)) == ["main", "aux"]


class TestBannedCalls:
    def test_gets_detected(self):
        graph, _ = call_graph_of(DOUBLE_FREE_SRC)
        findings = detect_banned_calls(graph, catalog_entry("CWE-242"))
        assert len(findings) == 1
        assert names_of(graph, findings[0].terminal_nodes) == ["gets"]
        assert len(findings[0].witness_paths) == 1

    def test_no_obsolete_functions(self):
        graph, _ = call_graph_of(DOUBLE_FREE_SRC)
        assert detect_banned_calls(graph, catalog_entry("CWE-477")) == []

    def test_interprocedural_witness_path(self):
        graph, _ = call_graph_of(DOUBLE_FREE_INTERPROC_SRC)
        findings = detect_banned_calls(graph, catalog_entry("CWE-242"))
        assert len(findings) == 1
        (path,) = findings[0].witness_paths
        assert names_of(graph, path.nodes) == ["main", "printString", "printString", "gets"]


class TestDoubleRelease:
    def test_double_free(self):
        graph, _ = call_graph_of(DOUBLE_FREE_SRC)
        findings = detect_double_release(graph, catalog_entry("CWE-415"))
        assert len(findings) == 1
        finding = findings[0]
        assert len(finding.witness_paths) == 2
        assert sorted(
            graph.node(t).properties["ExecOrder"] for t in finding.terminal_nodes
        ) == [6, 7]

    def test_single_free_clean(self):
        graph, _ = call_graph_of("void foo() { char* p; free(p); }")
        assert detect_double_release(graph, catalog_entry("CWE-415")) == []

    def test_double_fclose(self):
        graph, _ = call_graph_of("void main() { fclose(f); fclose(f); }")
        findings = detect_double_release(graph, catalog_entry("CWE-1341"))
        assert len(findings) == 1
        assert len(findings[0].terminal_nodes) == 2

    def test_calls_without_argument_not_grouped(self):
        graph, _ = call_graph_of("void main() { free(); free(); }")
        assert detect_double_release(graph, catalog_entry("CWE-415")) == []

    def test_monotonic_under_additional_release(self):
        base = "void main() { free(p); free(p); }"
        more = "void main() { free(p); free(p); free(p); }"
        for src in (base, more):
            graph, _ = call_graph_of(src)
            assert detect_double_release(graph, catalog_entry("CWE-415"))


class TestSizeofOnPointer:
    def test_pointer_local_flagged(self):
        graph, tu = call_graph_of("void f() { char* p; int n = sizeof(p); }")
        findings = detect_sizeof_on_pointer(graph, tu, catalog_entry("CWE-467"))
        assert len(findings) == 1

    def test_array_not_flagged(self):
        graph, tu = call_graph_of("void f() { int a[4]; int n = sizeof(a); }")
        assert detect_sizeof_on_pointer(graph, tu, catalog_entry("CWE-467")) == []

    def test_no_sizeof_nodes(self):
        graph, tu = call_graph_of("void f() { g(); }")
        assert detect_sizeof_on_pointer(graph, tu, catalog_entry("CWE-467")) == []


class TestSignalNonreentrant:
    SRC = (
        "void handler(int sig) { syslog(1, \"hit\"); }\n"
        "void main() { signal(2, handler); }\n"
    )

    def test_handler_reaching_syslog(self):
        graph, _ = call_graph_of(self.SRC)
        findings = detect_signal_nonreentrant(graph, catalog_entry("CWE-479"))
        assert len(findings) == 1
        (path,) = findings[0].witness_paths
        assert names_of(graph, path.nodes) == ["handler", "syslog"]

    def test_safe_handler(self):
        src = self.SRC.replace("syslog", "printf")
        graph, _ = call_graph_of(src)
        assert detect_signal_nonreentrant(graph, catalog_entry("CWE-479")) == []

    def test_unresolvable_handler_warns(self, caplog):
        graph, _ = call_graph_of('void main() { signal(2, "literal"); }')
        with caplog.at_level("WARNING"):
            findings = detect_signal_nonreentrant(graph, catalog_entry("CWE-479"))
        assert findings == []
        assert any("cannot be resolved" in r.message for r in caplog.records)


class TestGetloginMultithreaded:
    def test_with_threads(self):
        graph, _ = call_graph_of(
            "void main() { pthread_create(t, n, w, n); getlogin(); }"
        )
        findings = detect_getlogin_multithreaded(graph, catalog_entry("CWE-558"))
        assert len(findings) == 1

    def test_without_threads(self):
        graph, _ = call_graph_of("void main() { getlogin(); }")
        assert detect_getlogin_multithreaded(graph, catalog_entry("CWE-558")) == []

    def test_threads_without_getlogin(self):
        graph, _ = call_graph_of("void main() { pthread_create(t, n, w, n); }")
        assert detect_getlogin_multithreaded(graph, catalog_entry("CWE-558")) == []


class TestMissingRelease:
    def test_always_a_capability_miss(self):
        for src in ("void main() { malloc(8); }", "", "void main() { malloc(8); free(p); }"):
            graph, _ = call_graph_of(src)
            capability = detect_missing_release(graph, catalog_entry("CWE-401"))
            assert not capability.supported
            assert "data-flow" in capability.reason


class TestGenerateDetectionQuery:
    def test_double_free_query_parses_and_matches(self):
        text = generate_detection_query(catalog_entry("CWE-415"), "foo")
        query = parse_query(text)
        assert len(query.clauses) == 8

    def test_unsupported_families(self):
        for cwe_id in ("CWE-401", "CWE-467", "CWE-479", "CWE-558"):
            with pytest.raises(UnsupportedTemplate):
                generate_detection_query(catalog_entry(cwe_id), "main")

    def test_no_events(self):
        with pytest.raises(UnsupportedTemplate):
            generate_detection_query(CweRecord("CWE-242", "x", "", []), "main")


def query_terminals(graph, cwe, entry_name):
    """Terminal node renderings from executing the generated query."""
    table = execute_query(parse_query(generate_detection_query(cwe, entry_name)), graph)
    terminals = set()
    for row in table.rows:
        for cell in row:
            if "-[:" in cell:
                terminals.add(cell.rsplit("->", 1)[-1])
            elif cell.startswith("(:CallGraph"):
                terminals.add(cell)
    return terminals


def detector_terminals(graph, cwe):
    detect = detect_double_release if cwe.cwe_id in ("CWE-415", "CWE-1341") else detect_banned_calls
    return {
        render_node(graph.node(t)) for f in detect(graph, cwe) for t in f.terminal_nodes
    }


EVENT_POOL = ["free", "gets", "atoi", "fclose", "work", "log_it", "step"]
ARG_POOL = ["p", "q", "buf", "fp"]


def random_merged_graph(rng):
    calls = "\n    ".join(
        f"{rng.choice(EVENT_POOL)}({rng.choice(ARG_POOL)});"
        for _ in range(rng.randint(1, 12))
    )
    source = "void main() {\n    " + calls + "\n}\n"
    graph, tu, _ = merged_graph_of(source)
    return graph


class TestQueryRuleEquivalence:
    @pytest.mark.parametrize("cwe_id", ["CWE-242", "CWE-415", "CWE-1341"])
    def test_fixture_graphs(self, cwe_id):
        cwe = catalog_entry(cwe_id)
        for source, entry in (
            (DOUBLE_FREE_SRC, "foo"),
            (DOUBLE_FREE_INTERPROC_SRC, "main"),
        ):
            graph, _, _ = merged_graph_of(source)
            assert query_terminals(graph, cwe, entry) == detector_terminals(graph, cwe)

    @pytest.mark.parametrize("cwe_id", ["CWE-242", "CWE-415", "CWE-1341"])
    def test_random_graphs(self, cwe_id):
        cwe = catalog_entry(cwe_id)
        rng = random.Random(4100 + len(cwe_id))
        for _ in range(25):
            graph = random_merged_graph(rng)
            assert query_terminals(graph, cwe, "main") == detector_terminals(graph, cwe)


class TestRunAll:
    def test_double_free_example_findings(self, catalog):
        graph, tu, _ = merged_graph_of(DOUBLE_FREE_SRC)
        findings, capabilities = run_all(graph, tu, catalog)
        assert {f.cwe_id for f in findings} == {"CWE-242", "CWE-415", "CWE-1341"}
        assert [c.cwe_id for c in capabilities] == ["CWE-401"]

    def test_empty_graph(self, catalog):
        graph = PropertyGraph()
        graph.seal()
        findings, capabilities = run_all(graph, None, catalog)
        assert findings == []
        assert len(capabilities) == 1

    def test_witness_paths_are_sound(self, catalog):
        graph, tu, _ = merged_graph_of(DOUBLE_FREE_INTERPROC_SRC)
        findings, _ = run_all(graph, tu, catalog)
        for finding in findings:
            cwe = next(c for c in catalog if c.cwe_id == finding.cwe_id)
            assert finding.witness_paths
            for path in finding.witness_paths:
                assert graph.is_valid_path(path)
                name = graph.node(path.end).properties["Name"]
                assert name in cwe.function_events or name == "sizeof"
            for terminal in finding.terminal_nodes:
                assert any(p.end == terminal for p in finding.witness_paths)

    def test_unknown_cwe_falls_back_to_banned(self):
        graph, tu = call_graph_of("void main() { dangerous(); }")
        extra = CweRecord("CWE-9999", "Custom", "", ["dangerous"])
        findings, _ = run_all(graph, tu, [extra])
        assert len(findings) == 1

    def test_output_order_stable(self, catalog):
        graph, tu, _ = merged_graph_of(DOUBLE_FREE_SRC)
        first, _ = run_all(graph, tu, catalog)
        second, _ = run_all(graph, tu, catalog)
        assert [(f.cwe_id, f.terminal_nodes) for f in first] == [
            (f.cwe_id, f.terminal_nodes) for f in second
        ]
