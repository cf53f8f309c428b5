"""Tangent space and variety dimensions.

At a block-diagonal point sum_i U_i (x) e_i f_i* the enveloping tangent space
of the unital class has real dimension sum_ij sum_x d_x^2, where d_x are the
eigenvalue multiplicities of U_i U_j*.  The numeric count is the kernel
dimension of the linearised unitarity constraints on U and U^Gamma.
"""

# %%
import numpy as np

from uniclass.generate import product_unitary, sample_block_diag_A
from uniclass.tangent import (
    enveloping_dim_analytic,
    enveloping_dim_numeric,
    enveloping_report,
    mblockdiag_dim_numeric,
    variety_dim_formulas,
)

print("product point (2,2):", enveloping_dim_numeric(product_unitary(2, 2, seed=0)))
for n, k in [(2, 2), (2, 3), (3, 2), (3, 3)]:
    s = sample_block_diag_A(n, k, seed=7)
    r = enveloping_report(s.operator, s.blocks)
    print(f"({n},{k}) analytic {r.analytic:3d} numeric {r.numeric:3d} generic {r.params['generic']}")

# %% Degenerate spectra raise the count: I (+) diag(1, 1, -1).
print("I (+) V, V with a double eigenvalue:", enveloping_dim_analytic([np.eye(3), np.diag([1, 1, -1])]))

# %% Closed forms next to a numeric rank count for M_block-diag.
for n, k in [(1, 3), (2, 2), (2, 3), (3, 2)]:
    f = variety_dim_formulas(n, k)
    print(f"({n},{k})", f.to_dict(), "numeric M:", mblockdiag_dim_numeric(n, k))
