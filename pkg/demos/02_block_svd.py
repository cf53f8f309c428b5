"""Block singular value decompositions.

An operator on C^n (x) C^k is block diagonal on A when it can be written as
sum_i X_i (x) e_i f_i* for orthonormal bases e, f.  The test looks at the
n x n blocks X_ab and asks whether {X_a X_b*} and {X_a* X_b} are commuting
normal families.
"""

# %%
from uniclass.blocksvd import canonicalize, commutator_violations, compute_block_svd, has_block_svd
from uniclass.classify import is_block_diag_A, is_block_diag_B
from uniclass.generate import b_not_a_n3, circulant_unitary, named_examples, sample_block_diag_A
from uniclass.matcore import BipartiteOperator, max_norm, numeric_rank

s = sample_block_diag_A(3, 4, p=2, seed=5)
d = canonicalize(compute_block_svd(s.operator))
print("terms:", len(d), "isometry ranks:", [numeric_rank(t.isom) for t in d.terms])
print("reconstruction error:", max_norm(d.reconstruct() - s.operator.mat))

# %% A 4 x 4 matrix whose diagonal block products commute but which has no block SVD.
no_svd = named_examples()["no_block_svd_4x4"]
check = has_block_svd(no_svd)
print("has block SVD:", bool(check))
print("first failing pair:", check.witness)
# the pair X_11 X_22* and X_12 X_22* (flat block indices 0, 3 and 1, 3) is one of many
named = [v for v in commutator_violations(no_svd) if v["indices"] == (0, 3, 1, 3)]
print("X_11 X_22* vs X_12 X_22*:", named[0])

# %% Circulant unitaries are diagonalised by the Fourier matrix and are block diagonal on B.
for n, k in [(2, 2), (2, 3), (4, 2)]:
    u = BipartiteOperator(circulant_unitary(n * k, seed=n + k), n, k)
    print(f"circulant ({n},{k}): block_diag_B = {is_block_diag_B(u).value.value}")

# %% With three blocks on A and non-commuting V, W the operator is block diagonal on B only.
u = b_not_a_n3()
print("B:", is_block_diag_B(u).value.value, " A:", is_block_diag_A(u).value.value)
