"""Where the named examples sit among the unitary classes.

classify_all returns a three-valued verdict with a witness for each class
and checks the known inclusions between them.
"""

# %%
from uniclass.classify import classify_all, mixed_necessary
from uniclass.generate import GENERATORS, named_examples

names = ["aut", "unital", "block_diag_A", "block_diag_B", "const", "cppt", "mixed"]
print(f"{'operator':24s}" + "".join(f"{c:>14s}" for c in names))
ops = {name: op for name, op in named_examples().items() if name != "no_block_svd_4x4"}
for gen in ["haar", "product", "const", "circulant", "both_block"]:
    ops[gen] = GENERATORS[gen](2, 4, seed=3)
for label, op in ops.items():
    report = classify_all(op)
    print(f"{label:24s}" + "".join(f"{report.value(c):>14s}" for c in names))

# %% The 4 x 2 example is unital and block diagonal on B, yet not mixed unitary.
v = mixed_necessary(named_examples()["mixed_4x2"])
print("verdict:", v.value.value, "heuristic:", v.heuristic)
print("certified bound on max min |l_j|:", v.witness["bound"])
