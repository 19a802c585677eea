"""h-, p-, and hp-refinement on the singular-solution benchmark.

The exact solution t^(1+alpha) has unbounded higher derivatives at t = 0, so
pure degree raising converges only algebraically; combining mesh refinement
with moderate degrees does markedly better per unknown.  Writes the sweep to
hp_refinement.csv for plotting.
"""

import numpy as np

from abelhp import error_E1, make_benchmark, solve, uniform_mesh

alpha = 0.3
b = make_benchmark("ex1", alpha=alpha)

rows = []
print(f"singular solution u = t^{1 + alpha}:  E1 errors")
print("degree:", "  ".join(f"{d:>9d}" for d in range(2, 9)))
for N in (1, 2, 4):
    errs = []
    for degree in range(2, 9):
        sol = solve(b.spec, uniform_mesh(N, 1.0, degree), b.solver_options())
        e = error_E1(sol, b.exact)
        errs.append(e)
        rows.append((N, degree, N * (degree + 1), e))
    print(f"N = {N}: " + "  ".join(f"{e:.3e}" for e in errs))

with open("hp_refinement.csv", "w") as fh:
    fh.write("N,degree,L,E1\n")
    for N, degree, L, e in rows:
        fh.write(f"{N},{degree},{L},{e:.6e}\n")
print("\nwrote hp_refinement.csv; plot E1 against L to compare strategies")

best = min(rows, key=lambda r: r[3])
print(f"best configuration here: N={best[0]}, degree={best[1]} (L={best[2]}), E1={best[3]:.2e}")
