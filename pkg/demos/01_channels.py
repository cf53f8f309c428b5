"""Channels induced by a bipartite unitary.

A unitary U on C^n (x) C^k and an environment state beta give the channel
X -> Tr_B(U (X (x) beta) U*).  This walk-through builds a few channels,
checks that local unitaries on the environment side do not change them,
and recovers the factors of a product unitary.
"""

# %%
import numpy as np

from uniclass.channels import StinespringChannel, choi, state_spanning_set, stinespring_map
from uniclass.classify import is_aut
from uniclass.generate import haar_unitary, product_unitary, random_density
from uniclass.matcore import BipartiteOperator, matrix_units, max_norm

n, k = 2, 3
u = BipartiteOperator(haar_unitary(n * k, seed=1), n, k)
beta = random_density(k, seed=2)
ch = StinespringChannel(u, beta)
rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
out = ch(rho)
print("trace of output:", np.trace(out).real)
print("Choi matrix eigenvalues:", np.round(np.linalg.eigvalsh(choi(ch)), 4))

# %% Multiplying by I (x) W on the left leaves every channel unchanged.
w = haar_unitary(k, seed=3)
moved = BipartiteOperator(np.kron(np.eye(n), w) @ u.mat, n, k)
gap = max(
    max_norm(stinespring_map(u, x, b) - stinespring_map(moved, x, b))
    for x in matrix_units(n)
    for b in state_spanning_set(k)
)
print("largest channel difference after I (x) W:", gap)

# %% A product V (x) W gives the channel X -> V X V*, whatever beta is.
p = product_unitary(3, 2, seed=4)
verdict = is_aut(p)
print("product test:", verdict.value.value)
v_rec, w_rec = verdict.witness["V"], verdict.witness["W"]
print("reconstruction error:", max_norm(np.kron(v_rec, w_rec) - p.mat))
print("Haar unitary Schmidt rank:", is_aut(u).witness["schmidt_rank"])
