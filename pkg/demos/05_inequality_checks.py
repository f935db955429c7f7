"""Numerical checks of the duality identity, the four-party inequality and
the cloning gap.

Each check reports lhs, rhs, slack = lhs - rhs and whether the bound
directions make a negative slack a genuine counterexample ("sound").
"""

import numpy as np

from entroof import lab
from entroof.measures import ec_lower_chain
from entroof.roof import OptimizerConfig

config = OptimizerConfig(restarts=4, seed=0)

# S(rho_A) = E_f(rho_AC) + C<-(rho_AB) for tripartite pure states.
rep = lab.fuzz_campaign("duality", 10, [2, 2, 2], seed=1, config=config)
print(f"duality, 10 random states: slack in [{rep.min_slack:.1e}, {rep.max_slack:.1e}]")

# E(phi_AA':BB') >= E_f(rho_AB) + C(rho_A'B') for four-party pure states.
rep = lab.fuzz_campaign("lemma1", 10, [2, 2, 2, 2], seed=42, config=config)
print(f"lemma1, 10 random states: min slack {rep.min_slack:.3f}, violations {rep.violations}")
print(rep.to_csv().splitlines()[0])
print(rep.to_csv().splitlines()[1])

# Two copies of a singlet carry two ebits across AA':BB', one more than a
# single copy: a copy cannot be produced locally.
rec = lab.cloning_gap(lab.singlet(), config)
print("cloning gap for the singlet:", {k: rec.extra[k] for k in ("ef_joint_bits", "ef_single_bits", "gap_bits")})

# Finite-copy chain: E_f(rho^n)/n >= ((n-1)/n) G_HV(rho).
for n in (1, 2, 10, 100):
    out = ec_lower_chain(lab.singlet(), None, n, config)
    print(f"n={n:3d}: chain value {out['chain_value']:.4f} ({out['label']})")
