"""Graphs from the responsibility-analysis setting, built in code.

The same graphs ship as text files under ``fixtures/`` at the repository root.
``A_sev`` and ``R_sev`` stand for the severe-accident indicator and the
responsibility for a severe accident (``R_sev = F * A_sev``).
"""

from .graph import Dag, SelectionDag, build_dag, with_selection

_DAG_A_EDGES = [("W", "X"), ("W", "Y"), ("X", "Y")]


def dag_a() -> SelectionDag:
    """Selection on the outcome only."""
    return with_selection(build_dag("WXY", _DAG_A_EDGES), {"Y"})


def dag_b() -> SelectionDag:
    """Selection on both the outcome and the exposure."""
    return with_selection(build_dag("WXY", _DAG_A_EDGES), {"X", "Y"})


def dag_c() -> SelectionDag:
    """Selection on a mediator ``M`` of the exposure effect."""
    g = build_dag("WXMY", [("W", "X"), ("W", "Y"), ("X", "M"), ("M", "Y")])
    return with_selection(g, {"M"})


def accident_mechanism() -> Dag:
    """Full causal graph for accident and severe-accident occurrence.

    Edges are transcribed as drawn, including ``A -> R_sev`` (the drawing has
    no ``F -> R_sev`` arrow even though ``R_sev = F * A_sev``).
    """
    return build_dag(
        ["X", "W", "V", "F", "A", "A_sev", "R", "R_sev"],
        [("W", "X"), ("W", "V"), ("W", "F"), ("X", "F"), ("X", "V"),
         ("W", "A"), ("W", "A_sev"), ("F", "A"), ("F", "R"), ("A", "R"),
         ("V", "F"), ("V", "A_sev"), ("A", "A_sev"), ("A", "R_sev"),
         ("A_sev", "R_sev")],
    )


def case_i_graph(x_to_v: bool = True) -> Dag:
    edges = [("W", "X"), ("W", "F"), ("W", "A"), ("W", "V"), ("X", "F"),
             ("F", "A"), ("F", "R"), ("A", "R"), ("V", "F")]
    if x_to_v:
        edges.append(("X", "V"))
    return build_dag(["X", "W", "V", "F", "A", "R"], edges)


def case_i() -> SelectionDag:
    """All accidents recorded: selection ``S`` hangs off ``A``."""
    return with_selection(case_i_graph(), {"A"})


def case_ii_graph(x_to_v: bool = True) -> Dag:
    edges = [("W", "X"), ("W", "F"), ("W", "A_sev"), ("W", "V"), ("X", "F"),
             ("F", "A_sev"), ("F", "R_sev"), ("A_sev", "R_sev"), ("V", "F"),
             ("V", "A_sev")]
    if x_to_v:
        edges.append(("X", "V"))
    return build_dag(["X", "W", "V", "F", "A_sev", "R_sev"], edges)


def case_ii(x_to_v: bool = True) -> SelectionDag:
    """Only severe accidents recorded: selection hangs off ``A_sev``."""
    return with_selection(case_ii_graph(x_to_v), {"A_sev"})


def severe_chain() -> SelectionDag:
    """``X -> A_sev -> R_sev`` with the selection node copying ``A_sev``."""
    g = build_dag(["X", "A_sev", "R_sev"], [("X", "A_sev"), ("A_sev", "R_sev")])
    return with_selection(g, {"A_sev"})


ALL = {
    "dag_a": dag_a,
    "dag_b": dag_b,
    "dag_c": dag_c,
    "accident_full": accident_mechanism,
    "case_i": case_i,
    "case_ii": case_ii,
    "severe_chain": severe_chain,
}
