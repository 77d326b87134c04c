"""Which causal quantities survive selection? A tour of the graphical checks."""

# %%
# Three small selection graphs. W confounds X and Y; the selection node S
# hangs off Y (A), off both X and Y (B), or off a mediator M (C).
from selbias import Query, fixtures, recoverability_report
from selbias.graph import d_separated, format_dag, swig

xyw = Query("X", "Y", frozenset({"W"}))
for name in ("dag_a", "dag_b", "dag_c"):
    gs = fixtures.ALL[name]()
    print(f"--- {name}")
    print(recoverability_report(gs, xyw).render())

# %%
# The interventional distribution is lost in all three: Y (or M) is itself
# an ancestor of S. The odds ratio survives only in A, where S depends on X
# through Y alone.

# %%
# Responsibility analysis. Case (i) records every accident, case (ii) only
# severe ones, and severity depends on speed V.
for name, gs, outcomes in [("case (i)", fixtures.case_i(), ("F", "R")),
                           ("case (ii)", fixtures.case_ii(), ("F", "R_sev"))]:
    for y in outcomes:
        print(f"--- {name}, outcome {y}")
        print(recoverability_report(gs, Query("X", y, frozenset({"W"}))).render())

# %%
# Deleting X -> V from case (ii) is not enough for the fault odds ratio:
# F is a collider on X -> F <- V -> A_sev, and conditioning on it opens the
# path to the selection node.
no_xv = fixtures.case_ii(x_to_v=False)
print(recoverability_report(no_xv, Query("X", "F", frozenset({"W"}))).render())

# %%
# Splitting X in the case (ii) graph gives the single-world graph. The
# counterfactual outcome is cut off from the natural exposure given W.
sw = swig(fixtures.case_ii_graph(), "X")
print(format_dag(sw.graph))
print("R_sev@x independent of X given W:",
      d_separated(sw.graph, {"X"}, {"R_sev@x"}, {"W"}))
