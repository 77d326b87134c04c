"""Why conditioning on the selected slice is not enough, in two exact checks."""

# %%
from selbias.scm import counterfactual_joint, joint
from selbias.study import (
    StudyParams,
    appendix_d_demo,
    cf_independence_check,
    severe_chain_scm,
)

# Chain X -> A_sev -> R_sev with S = A_sev. If R_x were independent of X
# given S, P(R_x=1) would not depend on x.
r = appendix_d_demo()
print("P(R_x=1) for x=0,1:", r.p_r_do)
print("mixture over S    :", r.p_r_mixture)
print("average effect    :", r.ace)

# %%
# The dependence is visible directly in the counterfactual joint.
cf = counterfactual_joint(severe_chain_scm(), "X")
for x in (0, 1):
    print(f"P(R_sev@1=1 | X={x}, S=1) =", cf.table.prob({"R_sev@1": 1}, {"X": x, "S": 1}))

# %%
# With X -> A_sev switched off the two sides agree again.
print("difference, null chain:", appendix_d_demo(0.0).difference)

# %%
# On the study model with a confounder W, conditioning on the counterfactual
# A_sev restores independence; conditioning on the factual A_sev does not.
rep = cf_independence_check(StudyParams(alpha_x=2, beta_x=1, gamma_v=2))
print(f"R_x vs X | W, A_x : {rep.cf_gap:.2e}")
print(f"selected equality: {rep.selected_gap:.2e}")
print(f"R_x vs X | W, A   : {rep.naive_gap:.4f}")
