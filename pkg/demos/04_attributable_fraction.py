"""Population attributable fraction from stratum odds ratios."""

# %%
import numpy as np

from selbias.scm import DiscreteScm, Mechanism
from selbias.study import paf

rng = np.random.default_rng(3)


def model(scale):
    base = rng.uniform(0.2, 0.9, size=4) * scale
    rr = rng.uniform(1.5, 3.0, size=4)
    return DiscreteScm.from_spec([
        ("W1", [], Mechanism.bernoulli(0.4)),
        ("W2", [], Mechanism.bernoulli(0.6)),
        ("X", ["W1", "W2"], Mechanism.table(rng.uniform(0.2, 0.7, size=4))),
        ("R", ["W1", "W2", "X"],
         Mechanism.table(np.ravel([[b, b * r] for b, r in zip(base, rr)]))),
    ])


# %%
# Three algebraic forms of the fraction coincide; replacing stratum risk
# ratios by odds ratios is accurate only for rare outcomes.
for scale in (1e-4, 0.3):
    res = paf(model(scale), "X", "R", ["W1", "W2"])
    print(f"scale {scale:g}: exact {res.paf_exact:.6f}, forms "
          f"{', '.join(f'{f:.6f}' for f in res.forms)}, odds-ratio version {res.paf_approx:.6f}")
