"""Directed classical correlation.

C-> measures the first party and asks how much the second party's entropy
drops on average; C<- measures the second party.  Values come from a search
over rank-one POVMs, so they are lower bounds.
"""

import numpy as np

from entroof.measures import classical_correlation, classical_correlation_max
from entroof.roof import OptimizerConfig
from entroof.states import DensityMatrix, binary_entropy, random_density, tensor

config = OptimizerConfig(restarts=4, seed=0)

# Perfectly classically correlated bits: one bit either way.
cc = DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
print("classical bits:", classical_correlation(cc, None, "->", config))

# A product state carries no correlation at all.
prod = tensor(random_density((2,), seed=1), random_density((2,), seed=2))
print("product state: ", classical_correlation_max(prod, None, config))

# A classical-quantum state: A holds a bit, B holds |0> or |+> accordingly.
# Measuring A reveals everything about B's preparation, so C-> = S(rho_B).
# Measuring B can only partly identify the bit (non-orthogonal states), so
# C<- is the accessible information 1 - h(cos^2(pi/8)).
plus = np.array([1, 1]) / np.sqrt(2)
cq = DensityMatrix(
    0.5 * np.kron(np.diag([1, 0]), np.diag([1, 0])) + 0.5 * np.kron(np.diag([0, 1]), np.outer(plus, plus)),
    (2, 2),
)
right = classical_correlation(cq, None, "->", config)
left = classical_correlation(cq, None, "<-", config)
h = binary_entropy(np.cos(np.pi / 8) ** 2)
print(f"C-> = {right}   expected {h:.6f}")
print(f"C<- = {left}   expected {1 - h:.6f}")

# The optimal measurement for C<- is the witness POVM.
print("C<- witness effects (diagonals):")
for e in left.witness.effects:
    if np.trace(e).real > 1e-9:
        print("  ", np.round(np.diag(e).real, 4))
