"""Clause-pipeline evaluation of parsed queries over a sealed graph.

Evaluation threads a binding table (ordered columns, one dict per row)
through the clause list: MATCH joins rows with pattern matches, WITH
projects (grouping when an aggregate appears), WHERE filters, UNWIND
fans lists out into rows, RETURN renders the final table. Null follows
the usual rules: comparisons with null are false, aggregates skip
nulls, property access on null is null.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..graph import Node, Path, PropertyGraph, values_equal
from . import ast
from .ast import Binary, Func, Literal, Not, Prop, Var


class EvalError(Exception):
    """Base class for query evaluation errors."""


class UnboundVariable(EvalError):
    pass


class TypeMismatch(EvalError):
    pass


@dataclass
class ResultTable:
    columns: list
    rows: list  # of tuples of rendered strings


# -- value rendering ---------------------------------------------------------
# Node/path rendering is delegated to the canonical renderer so query
# results and finding reports produce identical strings.

def _render_value(value, graph: PropertyGraph) -> str:
    from ..render import render_node, render_path, render_scalar

    if value is None:
        return "null"
    if isinstance(value, Node):
        return render_node(value)
    if isinstance(value, Path):
        return render_path(graph, value)
    if isinstance(value, list):
        return "[" + ", ".join(_render_value(v, graph) for v in value) + "]"
    return render_scalar(value, quote_text=False)


def _group_key(value):
    if isinstance(value, Node):
        return ("node", value.id)
    if isinstance(value, Path):
        return ("path", value.nodes, value.edges)
    if isinstance(value, list):
        return ("list", tuple(_group_key(v) for v in value))
    return (type(value).__name__, value)


class _Evaluator:
    def __init__(self, graph: PropertyGraph):
        self.graph = graph

    # -- scalar expressions ------------------------------------------------

    def scalar(self, expr, row: dict):
        if isinstance(expr, Literal):
            return expr.value
        if isinstance(expr, Var):
            if expr.name not in row:
                raise UnboundVariable(f"unbound variable {expr.name!r}")
            return row[expr.name]
        if isinstance(expr, Prop):
            if expr.var not in row:
                raise UnboundVariable(f"unbound variable {expr.var!r} in {expr.var}.{expr.key}")
            subject = row[expr.var]
            if subject is None:
                return None
            if not isinstance(subject, Node):
                raise TypeMismatch(f"{expr.var}.{expr.key}: {expr.var} is not a node")
            return subject.properties.get(expr.key)
        if isinstance(expr, Func):
            if expr.name in ast.AGGREGATES:
                raise TypeMismatch(f"{expr.name} is only allowed in WITH/RETURN projections")
            if expr.name == "SIZE":
                arg = self.scalar(expr.arg, row)
                if arg is None:
                    return 0
                if not isinstance(arg, list):
                    raise TypeMismatch(f"SIZE of non-list: {ast.expr_text(expr)}")
                return len(arg)
            raise TypeMismatch(f"unknown function {expr.name}")
        if isinstance(expr, Binary):
            return self._binary(expr, row)
        if isinstance(expr, Not):
            value = self.scalar(expr.operand, row)
            return None if value is None else not value
        raise TypeMismatch(f"cannot evaluate {expr!r}")

    def _binary(self, expr: Binary, row: dict):
        if expr.op in ("AND", "OR"):
            left = self.scalar(expr.left, row)
            right = self.scalar(expr.right, row)
            if expr.op == "AND":
                if left is False or right is False:
                    return False
                return None if left is None or right is None else bool(left and right)
            if left is True or right is True:
                return True
            return None if left is None or right is None else bool(left or right)
        left = self.scalar(expr.left, row)
        right = self.scalar(expr.right, row)
        if left is None or right is None:
            return None
        if expr.op == "=":
            return self._equal(left, right)
        if expr.op == "<>":
            return not self._equal(left, right)
        if not isinstance(left, (int, float)) or not isinstance(right, (int, float)):
            raise TypeMismatch(
                f"ordering comparison on non-numeric operands: {ast.expr_text(expr)}"
            )
        if expr.op == "<":
            return left < right
        if expr.op == "<=":
            return left <= right
        if expr.op == ">":
            return left > right
        return left >= right

    @staticmethod
    def _equal(left, right) -> bool:
        if isinstance(left, Node) or isinstance(right, Node):
            return left is right
        return values_equal(left, right)

    # -- pattern matching --------------------------------------------------

    def match_pattern(self, pattern, row: dict) -> list:
        """All binding extensions of row produced by the pattern. Each
        result is a dict of newly bound variables (plus the path var)."""
        results = []
        first = pattern.nodes[0]

        def node_candidates(np, env):
            merged = {**row, **env}
            if np.var and np.var in merged:
                node = merged[np.var]
                if node is None:
                    return []
                if not isinstance(node, Node):
                    raise TypeMismatch(f"pattern variable {np.var!r} is not bound to a node")
                return [node] if self._node_matches(np, node, merged) else []
            if np.label is not None:
                pool = self.graph.find_nodes(np.label)
            else:
                pool = list(self.graph.nodes())
            return [n for n in pool if self._node_matches(np, n, merged)]

        def extend(index, node, env, node_seq, edge_seq, used):
            if index == len(pattern.rels):
                bindings = dict(env)
                if pattern.path_var:
                    bindings[pattern.path_var] = Path(tuple(node_seq), tuple(edge_seq))
                results.append(bindings)
                return
            rel = pattern.rels[index]
            next_np = pattern.nodes[index + 1]
            if rel.var_length is None:
                for edge in self.graph.out_edges(node.id):
                    if edge.id in used:
                        continue
                    if rel.type is not None and edge.type != rel.type:
                        continue
                    target = self.graph.node(edge.target)
                    next_env = self._bind_target(next_np, target, env, row)
                    if next_env is None:
                        continue
                    extend(
                        index + 1,
                        target,
                        next_env,
                        node_seq + [target.id],
                        edge_seq + [edge.id],
                        used | {edge.id},
                    )
            else:
                lo, hi = rel.var_length
                targets = node_candidates(next_np, env)
                target_ids = {t.id for t in targets}
                for path in self.graph.enumerate_paths(
                    node.id, target_ids, rel.type, lo, hi
                ):
                    if used.intersection(path.edges):
                        continue
                    target = self.graph.node(path.end)
                    next_env = self._bind_target(next_np, target, env, row)
                    if next_env is None:
                        continue
                    extend(
                        index + 1,
                        target,
                        next_env,
                        node_seq + list(path.nodes[1:]),
                        edge_seq + list(path.edges),
                        used | set(path.edges),
                    )

        for start in node_candidates(first, {}):
            env = {}
            if first.var and first.var not in row:
                env[first.var] = start
            extend(0, start, env, [start.id], [], set())
        return results

    def _bind_target(self, np, node: Node, env: dict, row: dict) -> Optional[dict]:
        merged = {**row, **env}
        if np.var and np.var in merged and merged[np.var] is not node:
            return None
        if not self._node_matches(np, node, merged):
            return None
        if np.var and np.var not in merged:
            out = dict(env)
            out[np.var] = node
            return out
        return env

    def _node_matches(self, np, node: Node, row: dict) -> bool:
        if np.label is not None and node.label != np.label:
            return False
        for key, expr in np.props:
            want = self.scalar(expr, row)
            if want is None:
                return False
            if key not in node.properties or not values_equal(want, node.properties[key]):
                return False
        return True

    # -- clauses -----------------------------------------------------------

    def apply_match(self, clause, columns: list, rows: list):
        pattern = clause.pattern
        new_vars = []
        for np in pattern.nodes:
            if np.var and np.var not in columns and np.var not in new_vars:
                new_vars.append(np.var)
        if pattern.path_var and pattern.path_var not in columns:
            new_vars.append(pattern.path_var)
        out = []
        for row in rows:
            matches = self.match_pattern(pattern, row)
            if not matches and clause.optional:
                out.append({**row, **{v: None for v in new_vars}})
                continue
            for bindings in matches:
                merged = dict(row)
                for var in new_vars:
                    merged[var] = bindings.get(var)
                # re-check bindings for vars that were already bound
                out.append(merged)
        return columns + new_vars, out

    def project(self, items, rows: list):
        """Shared WITH/RETURN projection with aggregate grouping."""
        aggregated = any(ast.has_aggregate(expr) for expr, _ in items)
        if not aggregated:
            return [
                {alias: self.scalar(expr, row) for expr, alias in items} for row in rows
            ]
        key_items = [(expr, alias) for expr, alias in items if not ast.has_aggregate(expr)]
        agg_items = [(expr, alias) for expr, alias in items if ast.has_aggregate(expr)]
        groups = {}
        order = []
        for row in rows:
            key_values = {alias: self.scalar(expr, row) for expr, alias in key_items}
            key = tuple(_group_key(key_values[alias]) for _, alias in key_items)
            if key not in groups:
                groups[key] = (key_values, [])
                order.append(key)
            groups[key][1].append(row)
        out = []
        for key in order:
            key_values, member_rows = groups[key]
            projected = dict(key_values)
            for expr, alias in agg_items:
                projected[alias] = self._aggregate(expr, member_rows)
            out.append(projected)
        return out

    def _aggregate(self, expr, rows: list):
        if isinstance(expr, Func) and expr.name == "COLLECT":
            values = [self.scalar(expr.arg, row) for row in rows]
            return [v for v in values if v is not None]
        if isinstance(expr, Func) and expr.name == "COUNT":
            return sum(1 for row in rows if self.scalar(expr.arg, row) is not None)
        if isinstance(expr, Func) and expr.name == "SIZE":
            value = self._aggregate(expr.arg, rows)
            if value is None:
                return 0
            if not isinstance(value, list):
                raise TypeMismatch(f"SIZE of non-list: {ast.expr_text(expr)}")
            return len(value)
        raise TypeMismatch(f"unsupported aggregate expression: {ast.expr_text(expr)}")

    # -- pipeline ----------------------------------------------------------

    def execute(self, query) -> ResultTable:
        columns = []
        rows = [{}]
        for clause in query.clauses:
            if isinstance(clause, ast.MatchClause):
                columns, rows = self.apply_match(clause, columns, rows)
            elif isinstance(clause, ast.WithClause):
                rows = self.project(clause.items, rows)
                columns = [alias for _, alias in clause.items]
            elif isinstance(clause, ast.WhereClause):
                rows = [r for r in rows if self.scalar(clause.expr, r) is True]
            elif isinstance(clause, ast.UnwindClause):
                out = []
                for row in rows:
                    value = self.scalar(clause.expr, row)
                    if value is None:
                        continue
                    elements = value if isinstance(value, list) else [value]
                    for element in elements:
                        out.append({**row, clause.alias: element})
                rows = out
                if clause.alias not in columns:
                    columns = columns + [clause.alias]
            elif isinstance(clause, ast.ReturnClause):
                items = [
                    (expr, alias or ast.expr_text(expr)) for expr, alias in clause.items
                ]
                projected = self.project(items, rows)
                out_columns = [alias for _, alias in items]
                rendered = [
                    tuple(_render_value(row[c], self.graph) for c in out_columns)
                    for row in projected
                ]
                rendered.sort()
                return ResultTable(out_columns, rendered)
        raise TypeMismatch("query has no RETURN clause")  # parser guarantees otherwise


def execute_query(query, graph: PropertyGraph) -> ResultTable:
    """Run a parsed query over a sealed graph; deterministic output
    (rows canonically sorted by their rendered tuples)."""
    return _Evaluator(graph).execute(query)


def format_result_table(table: ResultTable) -> str:
    """Pipe-delimited rendering: header row, then one line per row."""
    lines = [" | ".join(table.columns).rstrip()]
    for row in table.rows:
        lines.append(" | ".join(row).rstrip())
    return "\n".join(lines) + "\n"
