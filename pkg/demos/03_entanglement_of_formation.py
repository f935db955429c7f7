"""Entanglement of formation: closed form versus numeric convex roof.

For two qubits the concurrence gives E_f exactly.  The numeric roof
searches pure decompositions of the state and reports the best average
entanglement found, an upper bound.
"""

import numpy as np

from entroof.measures import concurrence, eof_numeric, eof_two_qubit_exact
from entroof.roof import OptimizerConfig
from entroof.states import DensityMatrix, random_density

config = OptimizerConfig(restarts=4, seed=0)
singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)

print("Werner family p*singlet + (1-p)*I/4")
print("   p    concurrence  E_f exact   E_f numeric")
for p in np.linspace(0.2, 1.0, 5):
    rho = DensityMatrix(p * np.outer(singlet, singlet) + (1 - p) * np.eye(4) / 4, (2, 2))
    exact = eof_two_qubit_exact(rho)
    numeric = eof_numeric(rho, None, config)
    print(f"  {p:.1f}   {concurrence(rho):.4f}       {exact.value:.6f}    {numeric}")

print()
print("random two-qubit states (numeric - exact):")
for seed in range(5):
    rho = random_density((2, 2), ancilla_dim=2, seed=seed)
    gap = eof_numeric(rho, None, config).value - eof_two_qubit_exact(rho).value
    print(f"  seed {seed}: {gap:+.2e}")

# The optimal decomposition found is returned as an ensemble witness,
# already reduced to at most d^2 + 1 members.
res = eof_numeric(random_density((2, 2), 3, seed=11), None, config)
print()
print(f"witness: {len(res.witness)} pure members, weights {np.round(res.witness.weights, 4)}")
