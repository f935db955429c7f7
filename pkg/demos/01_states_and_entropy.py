"""States, reductions and entropies.

Builds a few small states, takes partial traces and purifications, and
prints von Neumann entropies in bits.
"""

import numpy as np

from entroof.states import (
    DensityMatrix,
    PureState,
    partial_trace,
    partial_transpose,
    purify,
    random_density,
    tensor,
    von_neumann_entropy,
)

# The singlet (|01> - |10>)/sqrt(2): maximally entangled, so each half is I/2.
singlet = PureState(np.array([0, 1, -1, 0]) / np.sqrt(2), (2, 2))
rho_a = partial_trace(singlet, (0,))
print("reduced singlet:\n", np.round(rho_a.matrix.real, 6))
print("S(rho_A) =", von_neumann_entropy(rho_a), "bits")

# Entropy of diag(3/4, 1/4) is the binary entropy h(1/4).
print("S(diag(3/4, 1/4)) =", round(von_neumann_entropy(DensityMatrix(np.diag([0.75, 0.25]), (2,))), 6))

# Product states have a trivial reduction structure.
a = random_density((2,), seed=1)
b = random_density((3,), seed=2)
ab = tensor(a, b)
print("tr_B(a x b) == a:", np.allclose(partial_trace(ab, (0,)).matrix, a.matrix))

# Every mixed state is the reduction of a pure state on a larger space.
rho = random_density((2, 2), ancilla_dim=3, seed=7)
psi = purify(rho)
print("purification dims:", psi.dims, " round trip ok:", np.allclose(partial_trace(psi, (0, 1)).matrix, rho.matrix))

# Partial transpose: the singlet is NPT, a product state is PPT.
print("singlet PT min eigenvalue:", round(partial_transpose(singlet.density(), 1)[1], 6))
print("product PT min eigenvalue:", round(partial_transpose(ab, 1)[1], 6))
