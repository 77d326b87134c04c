"""Causal DAGs and the graph algorithms recoverability reduces to.

Node names are bare tokens (letters, digits, underscore). Names containing
``@`` are reserved for the counterfactual copies produced by :func:`swig`.
All graph objects are immutable once built; iteration over nodes is in
lexicographic order so that outputs and error messages are reproducible.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    CycleDetected,
    DuplicateEdge,
    DuplicateNode,
    InvalidName,
    NameClash,
    OverlappingSets,
    SelectionError,
    UnknownEndpoint,
    UnknownNode,
)

_NAME = re.compile(r"^[A-Za-z0-9_]+$")
_CF_NAME = re.compile(r"^[A-Za-z0-9_]+@[A-Za-z0-9_]+$")


def valid_name(name: str, counterfactual: bool = False) -> bool:
    if not isinstance(name, str):
        return False
    if _NAME.match(name):
        return True
    return counterfactual and bool(_CF_NAME.match(name))


class Dag:
    """A directed acyclic graph over named nodes.

    Use :func:`build_dag` rather than calling the constructor directly; the
    constructor accepts already-deduplicated collections.
    """

    __slots__ = ("nodes", "edges", "_parents", "_children", "order")

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]],
                 _counterfactual: bool = False):
        nodes = frozenset(nodes)
        edges = frozenset(tuple(e) for e in edges)
        for n in sorted(nodes):
            if not valid_name(n, _counterfactual):
                raise InvalidName(f"invalid node name {n!r}")
        parents = {n: set() for n in nodes}
        children = {n: set() for n in nodes}
        for u, v in sorted(edges):
            for end in (u, v):
                if end not in nodes:
                    raise UnknownEndpoint(f"edge ({u}, {v}) uses undeclared node {end!r}")
            if u == v:
                raise CycleDetected([u, u])
            parents[v].add(u)
            children[u].add(v)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_parents",
                           {n: tuple(sorted(p)) for n, p in parents.items()})
        object.__setattr__(self, "_children",
                           {n: tuple(sorted(c)) for n, c in children.items()})
        object.__setattr__(self, "order", self._toposort())

    def __setattr__(self, key, value):
        raise AttributeError("Dag is immutable")

    def _toposort(self) -> tuple[str, ...]:
        # Kahn's algorithm with a lexicographic tie-break.
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        ready = sorted(n for n, d in indeg.items() if d == 0)
        out = []
        while ready:
            n = ready.pop(0)
            out.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
                    ready.sort()
        if len(out) != len(self.nodes):
            raise CycleDetected(self._find_cycle({n for n, d in indeg.items() if d > 0}))
        return tuple(out)

    def _find_cycle(self, remaining: set[str]) -> list[str]:
        # Every node left after Kahn has a parent that is also left; walk
        # parents until a node repeats.
        start = min(remaining)
        seen = {start: 0}
        path = [start]
        n = start
        while True:
            n = next(p for p in self._parents[n] if p in remaining)
            if n in seen:
                cyc = path[seen[n]:]
                cyc.reverse()
                return cyc + [cyc[0]]
            seen[n] = len(path)
            path.append(n)

    def parents(self, v: str) -> tuple[str, ...]:
        self._check(v)
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        self._check(v)
        return self._children[v]

    def _check(self, *vs: str) -> None:
        for v in vs:
            if v not in self.nodes:
                raise UnknownNode(f"unknown node {v!r}")

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.nodes, self.edges))

    def __repr__(self):
        parts = []
        for n in self.order:
            ps = self._parents[n]
            parts.append(f"[{n}|{','.join(ps)}]" if ps else f"[{n}]")
        return "Dag(" + "".join(parts) + ")"

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, v):
        return v in self.nodes


def build_dag(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> Dag:
    """Validate ``nodes`` and ``edges`` and return a :class:`Dag`.

    Raises
    ------
    DuplicateNode, DuplicateEdge, UnknownEndpoint, CycleDetected, InvalidName
    """
    nodes = list(nodes)
    edges = [tuple(e) for e in edges]
    seen = set()
    for n in nodes:
        if n in seen:
            raise DuplicateNode(f"node {n!r} declared twice")
        seen.add(n)
    seen_e = set()
    for e in edges:
        if len(e) != 2:
            raise UnknownEndpoint(f"edge {e!r} must have exactly two endpoints")
        if e in seen_e:
            raise DuplicateEdge(f"edge {e[0]} -> {e[1]} declared twice")
        seen_e.add(e)
    return Dag(nodes, edges)


@dataclass(frozen=True)
class SelectionDag:
    """A causal DAG augmented with one sink selection node."""

    base: Dag
    selection: str

    def __post_init__(self):
        if self.selection not in self.base.nodes:
            raise UnknownNode(f"selection node {self.selection!r} is not in the graph")
        if self.base.children(self.selection):
            raise SelectionError(
                f"selection node {self.selection!r} must be a sink, has children "
                + ", ".join(self.base.children(self.selection)))
        if not self.base.parents(self.selection):
            raise SelectionError(f"selection node {self.selection!r} has no parents")

    @property
    def causal(self) -> Dag:
        """The causal graph G, i.e. the base graph without the selection node."""
        return subgraph_removing(self.base, {self.selection})


@dataclass(frozen=True)
class Swig:
    graph: Dag
    random_half: str
    fixed_half: str
    relabeling: Mapping[str, str]


def ancestors(g: Dag, v: str) -> frozenset[str]:
    """Inclusive ancestor set of ``v`` (``v`` itself is a member)."""
    g._check(v)
    seen = {v}
    stack = [v]
    while stack:
        for p in g._parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def ancestors_of_set(g: Dag, vs: Iterable[str]) -> frozenset[str]:
    out = set()
    for v in vs:
        out |= ancestors(g, v)
    return frozenset(out)


def descendants(g: Dag, v: str) -> frozenset[str]:
    """Inclusive descendant set of ``v``."""
    g._check(v)
    seen = {v}
    stack = [v]
    while stack:
        for c in g._children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def subgraph_removing(g: Dag, removed: Iterable[str]) -> Dag:
    """Induced subgraph on ``g.nodes - removed``."""
    removed = set(removed)
    g._check(*sorted(removed))
    keep = g.nodes - removed
    return Dag(keep, [(u, v) for u, v in g.edges if u in keep and v in keep],
               _counterfactual=True)


def d_separated(g: Dag, a: Iterable[str], b: Iterable[str], z: Iterable[str] = ()) -> bool:
    """Decide whether ``a`` and ``b`` are d-separated given ``z`` in ``g``.

    Reachability ("Bayes ball") over (node, direction) states, linear in the
    size of the graph.
    """
    a, b, z = set(a), set(b), set(z)
    g._check(*sorted(a | b | z))
    if not a or not b:
        raise OverlappingSets("a and b must be non-empty")
    if a & b or a & z or b & z:
        raise OverlappingSets("a, b and z must be pairwise disjoint")

    z_anc = ancestors_of_set(g, z)
    # "up": reached from a child, moving against edge direction.
    # "down": reached from a parent, moving along edge direction.
    queue = deque((n, "up") for n in sorted(a))
    visited = set()
    while queue:
        n, d = queue.popleft()
        if (n, d) in visited:
            continue
        visited.add((n, d))
        if n in b:
            return False
        if d == "up" and n not in z:
            queue.extend((p, "up") for p in g._parents[n])
            queue.extend((c, "down") for c in g._children[n])
        elif d == "down":
            if n not in z:
                queue.extend((c, "down") for c in g._children[n])
            if n in z_anc:
                # collider (or its ancestor) is conditioned on: pass back up
                queue.extend((p, "up") for p in g._parents[n])
    return True


def with_selection(g: Dag, parents_of_s: Iterable[str], name: str = "S") -> SelectionDag:
    """Add a selection node ``name`` with edges from ``parents_of_s``."""
    parents_of_s = set(parents_of_s)
    if not parents_of_s:
        raise SelectionError("the selection node needs at least one parent")
    g._check(*sorted(parents_of_s))
    if name in g.nodes:
        raise NameClash(f"node {name!r} already exists")
    if not valid_name(name):
        raise InvalidName(f"invalid node name {name!r}")
    base = Dag(g.nodes | {name}, set(g.edges) | {(p, name) for p in parents_of_s},
               _counterfactual=True)
    return SelectionDag(base, name)


def cf_name(v: str, suffix: str) -> str:
    return f"{v}@{suffix}"


def swig(g: Dag, x: str) -> Swig:
    """Single-world intervention graph for ``do(x)``.

    ``x`` keeps its incoming edges but loses its outgoing ones; a fixed node
    ``x@fixed`` with no parents takes over the outgoing edges. Every proper
    descendant ``d`` of ``x`` is renamed ``d@<x lowercased>``.
    """
    g._check(x)
    if "@" in x:
        raise InvalidName(f"cannot split an already counterfactual node {x!r}")
    suffix = x.lower()
    fixed = cf_name(x, "fixed")
    relabel = {d: cf_name(d, suffix) for d in sorted(descendants(g, x) - {x})}
    clash = ({fixed} | set(relabel.values())) & g.nodes
    if clash:
        raise NameClash(f"SWIG names collide with existing nodes: {sorted(clash)}")

    def ren(n):
        return relabel.get(n, n)

    nodes = {ren(n) for n in g.nodes} | {fixed}
    edges = set()
    for u, v in g.edges:
        if u == x:
            edges.add((fixed, ren(v)))
        else:
            edges.add((ren(u), ren(v)))
    return Swig(Dag(nodes, edges, _counterfactual=True), x, fixed, relabel)


# text format ---------------------------------------------------------------

def parse_dag(text: str, source: str = "<string>",
              counterfactual: bool = False) -> Dag | SelectionDag:
    """Parse the line-oriented DAG format.

    Statements are ``node <name>``, ``snode <name>`` (selection node, at most
    one) and ``edge <parent> <child>``; ``#`` starts a comment. A file with an
    ``snode`` yields a :class:`SelectionDag`. ``counterfactual=True`` also
    admits ``name@suffix`` nodes, as written by :func:`format_dag` for SWIGs.
    """
    from .errors import GraphError, ParseError

    nodes: list[str] = []
    declared: set[str] = set()
    edges: list[tuple[str, str]] = []
    seen_edges: set[tuple[str, str]] = set()
    snode = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kw = toks[0]
        if kw in ("node", "snode"):
            if len(toks) != 2:
                raise ParseError(f"'{kw}' takes exactly one name", source, lineno,
                                 toks[2] if len(toks) > 2 else kw)
            name = toks[1]
            if not valid_name(name, counterfactual):
                raise ParseError("invalid node name", source, lineno, name)
            if name in declared:
                raise ParseError("node declared twice", source, lineno, name)
            if kw == "snode":
                if snode is not None:
                    raise ParseError("more than one selection node", source, lineno, name)
                snode = name
            declared.add(name)
            nodes.append(name)
        elif kw == "edge":
            if len(toks) != 3:
                raise ParseError("'edge' takes a parent and a child", source, lineno,
                                 toks[3] if len(toks) > 3 else kw)
            for t in toks[1:]:
                if t not in declared:
                    raise ParseError("edge uses an undeclared node", source, lineno, t)
            e = (toks[1], toks[2])
            if e in seen_edges:
                raise ParseError("edge declared twice", source, lineno, f"{e[0]} {e[1]}")
            seen_edges.add(e)
            edges.append(e)
        else:
            raise ParseError("unknown statement", source, lineno, kw)
    try:
        g = Dag(nodes, edges, _counterfactual=counterfactual)
        return SelectionDag(g, snode) if snode is not None else g
    except GraphError as exc:
        exc.source = source
        raise


def read_dag(path, counterfactual: bool = False) -> Dag | SelectionDag:
    with open(path, encoding="utf-8") as fh:
        return parse_dag(fh.read(), source=str(path), counterfactual=counterfactual)


def format_dag(g: Dag | SelectionDag) -> str:
    """Render ``g`` in the text format accepted by :func:`parse_dag`."""
    sel = None
    if isinstance(g, SelectionDag):
        g, sel = g.base, g.selection
    lines = []
    for n in sorted(g.nodes):
        lines.append(f"{'snode' if n == sel else 'node'} {n}")
    for u, v in sorted(g.edges):
        lines.append(f"edge {u} {v}")
    return "\n".join(lines) + "\n"
