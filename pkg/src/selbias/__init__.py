"""Selection-bias recoverability on causal DAGs and exact binary SCM inference."""

from .graph import (
    Dag,
    SelectionDag,
    Swig,
    ancestors,
    build_dag,
    d_separated,
    format_dag,
    parse_dag,
    read_dag,
    subgraph_removing,
    swig,
    with_selection,
)
from .recoverability import (
    Query,
    Rule,
    Verdict,
    check_or_recoverable,
    check_pyx_recoverable,
    recoverability_report,
)
from .scm import (
    CfJoint,
    DiscreteScm,
    Mechanism,
    ProbTable,
    adjusted_effect,
    cond_independent,
    counterfactual_joint,
    intervene,
    joint,
    prob,
    sample,
)
from .study import (
    StudyParams,
    appendix_d_demo,
    approx_error,
    build_paper_scm,
    cf_independence_check,
    closed_form,
    paf,
    sweep,
)

__version__ = "0.1.0"
