"""Graphical recoverability of causal effects under selection bias.

Two questions are answered from the structure of a selection DAG alone:

* whether the interventional distribution ``P(Y_x = y)`` can be recovered
  from the selected (``S = 1``) data: this holds exactly when the ancestors
  of ``Y`` in the graph with ``X`` deleted share no node with the ancestors
  of ``S``;
* whether the covariate-specific odds ratio of ``X`` and ``Y`` is
  recoverable, which holds when ``X`` is d-separated from ``S`` given
  ``(Y, W)`` or ``Y`` is d-separated from ``S`` given ``(X, W)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable

from .errors import InvalidQuery
from .graph import SelectionDag, ancestors, d_separated, descendants, subgraph_removing


class Rule(enum.Enum):
    C1 = "C1"
    C2_FIRST = "C2_first"
    C2_SECOND = "C2_second"
    NONE = "none"


@dataclass(frozen=True)
class Query:
    exposure: str
    outcome: str
    adjustment: frozenset = frozenset()
    selection: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "adjustment", frozenset(self.adjustment))

    def resolve(self, gs: SelectionDag) -> "Query":
        """Fill in the selection node from ``gs`` and validate against it."""
        q = self if self.selection is not None else replace(self, selection=gs.selection)
        nodes = gs.base.nodes
        for v in sorted({q.exposure, q.outcome, q.selection} | q.adjustment):
            if v not in nodes:
                raise InvalidQuery(f"node {v!r} is not in the graph")
        if q.selection != gs.selection:
            raise InvalidQuery(
                f"query selection {q.selection!r} differs from graph selection {gs.selection!r}")
        if q.exposure == q.outcome:
            raise InvalidQuery("exposure and outcome must differ")
        if {q.exposure, q.outcome} & q.adjustment:
            raise InvalidQuery("exposure and outcome cannot be adjusted for")
        if q.selection in q.adjustment | {q.exposure, q.outcome}:
            raise InvalidQuery("the selection node cannot be exposure, outcome or covariate")
        return q


@dataclass(frozen=True)
class Verdict:
    """Outcome of one recoverability test.

    For the ``P(Y_x)`` test, ``intersection`` is the full ancestor
    intersection and ``witness`` its maximal elements (members with no
    descendant inside the intersection); either one being non-empty certifies
    non-recoverability.
    """

    recoverable: bool
    rule: Rule
    witness: frozenset = frozenset()
    intersection: frozenset = frozenset()


@dataclass(frozen=True)
class IndependenceTest:
    a: str
    b: str
    given: tuple
    holds: bool
    observed: bool | None = None  # filled in by a numerical check, if any

    def label(self) -> str:
        return f"{self.a} ⫫ {self.b} | ({', '.join(self.given)})"


@dataclass(frozen=True)
class Report:
    query: Query
    pyx: Verdict
    odds_ratio: Verdict
    tests: tuple = field(default_factory=tuple)

    def render(self) -> str:
        return render_report(self)


def _fmt_set(s: Iterable[str]) -> str:
    return "{" + ", ".join(sorted(s)) + "}"


def check_pyx_recoverable(gs: SelectionDag, q: Query) -> Verdict:
    """Recoverability of ``P(Y_x = y)`` from the selected data."""
    q = q.resolve(gs)
    an_y = ancestors(subgraph_removing(gs.base, {q.exposure}), q.outcome)
    an_s = ancestors(gs.base, q.selection)
    inter = an_y & an_s
    if not inter:
        return Verdict(True, Rule.C1)
    maximal = frozenset(v for v in inter if not (descendants(gs.base, v) - {v}) & inter)
    return Verdict(False, Rule.NONE, maximal, frozenset(inter))


def _or_tests(gs: SelectionDag, q: Query) -> tuple[IndependenceTest, IndependenceTest]:
    w = tuple(sorted(q.adjustment))
    s = q.selection
    first = d_separated(gs.base, {q.exposure}, {s}, {q.outcome, *w})
    second = d_separated(gs.base, {q.outcome}, {s}, {q.exposure, *w})
    return (IndependenceTest(q.exposure, s, (q.outcome, *w), first),
            IndependenceTest(q.outcome, s, (q.exposure, *w), second))


def check_or_recoverable(gs: SelectionDag, q: Query) -> Verdict:
    """Recoverability of the covariate-specific odds ratio of ``X`` and ``Y``."""
    q = q.resolve(gs)
    first, second = _or_tests(gs, q)
    if first.holds:
        return Verdict(True, Rule.C2_FIRST)
    if second.holds:
        return Verdict(True, Rule.C2_SECOND)
    return Verdict(False, Rule.NONE)


def recoverability_report(gs: SelectionDag, q: Query) -> Report:
    q = q.resolve(gs)
    return Report(q, check_pyx_recoverable(gs, q), check_or_recoverable(gs, q),
                  _or_tests(gs, q))


def observe(report: Report, table) -> Report:
    """Attach numerically observed independencies from a probability table.

    ``table`` is anything accepted by :func:`selbias.scm.independence_gap`
    (an SCM or a :class:`~selbias.scm.ProbTable`). Graphical results are left
    untouched: a d-connected pair may still be independent in a particular
    distribution, and the report keeps the two notions apart.
    """
    from .scm import cond_independent

    tests = tuple(
        replace(t, observed=cond_independent(table, {t.a}, {t.b}, set(t.given), 1e-10))
        for t in report.tests)
    return replace(report, tests=tests)


def render_report(r: Report) -> str:
    q = r.query
    lines = [f"query: exposure={q.exposure} outcome={q.outcome} "
             f"adjust={_fmt_set(q.adjustment)} selection={q.selection}"]
    c1 = "HOLDS" if r.pyx.recoverable else "FAILS"
    lines.append(f"C1  An({q.outcome}) in G minus {q.exposure} ∩ An({q.selection}) = ∅: {c1}"
                 f"  intersection {_fmt_set(r.pyx.intersection)}")
    for t in r.tests:
        line = f"C2  {t.label()}: {'HOLDS' if t.holds else 'FAILS'} (graphical)"
        if t.observed is not None:
            line += f", {'holds' if t.observed else 'fails'} numerically"
        lines.append(line)
    if r.pyx.recoverable:
        lines.append(f"P({q.outcome}_x): RECOVERABLE")
    else:
        lines.append(f"P({q.outcome}_x): NOT RECOVERABLE, witness {_fmt_set(r.pyx.witness)}")
    if r.odds_ratio.recoverable:
        t = r.tests[0] if r.odds_ratio.rule is Rule.C2_FIRST else r.tests[1]
        lines.append(f"OR: RECOVERABLE via {t.a}⫫{t.b}|({','.join(t.given)})")
    else:
        lines.append("OR: NOT RECOVERABLE")
    return "\n".join(lines) + "\n"
