"""Mixed convex roofs of the classical correlation.

G_HV averages max(C->, C<-) over mixed decompositions of a state and takes
the infimum.  It vanishes exactly on separable states, so a numeric roof
near zero is consistent with separability and a clearly positive value is
evidence of entanglement.
"""

import numpy as np

from entroof.lab import random_separable, singlet, werner
from entroof.measures import classical_correlation_max, g_roof
from entroof.roof import OptimizerConfig

config = OptimizerConfig(restarts=2, max_iterations=60, seed=0)

# Pure states have one decomposition, so G_HV is the correlation itself.
print("singlet:", g_roof(singlet(), None, "HV", config))

# A separable state with its product decomposition supplied: the roof
# reaches zero at the supplied decomposition.
rho, decomposition = random_separable(4, seed=3)
print("separable (with decomposition):", g_roof(rho, None, "HV", config, initial=[decomposition]))

# Werner states are entangled for p > 1/3.  The roof is never above the
# correlation of the state itself (the one-member decomposition).
for p in (0.2, 0.6, 0.9):
    w = werner(p)
    print(f"werner p={p}: G_HV {g_roof(w, None, 'HV', config)}   C {classical_correlation_max(w, None, config)}")
