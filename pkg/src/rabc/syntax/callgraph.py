from __future__ import annotations

from .ast import AssignCall, Program, iter_stmts


def call_edges(prog: Program) -> dict[str, list[str]]:
    """Callees of each function in order of first call, unknown names skipped."""
    known = set(prog.names())
    edges: dict[str, list[str]] = {}
    for f in prog.functions:
        out: list[str] = []
        for s in iter_stmts(f.body):
            if isinstance(s, AssignCall) and s.fn in known and s.fn not in out:
                out.append(s.fn)
        edges[f.name] = out
    return edges


def call_graph_sccs(prog: Program) -> list[list[str]]:
    """Strongly connected components with every callee group before its callers.

    Iterative Tarjan; components come out in reverse topological order of the
    caller->callee graph, which is exactly callees first.
    """
    edges = call_edges(prog)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[list[str]] = []
    counter = 0
    order = {n: i for i, n in enumerate(prog.names())}

    for root in prog.names():
        if root in index:
            continue
        work = [(root, iter(edges[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges[succ])))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(sorted(comp, key=order.__getitem__))
    return out
