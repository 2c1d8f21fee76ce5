"""Small tour of the conic solver: an LP, an SDP, and an infeasible problem.

Run:  python demos/solver_basics.py
"""

import numpy as np

from risbeam import conic
from risbeam.conic import BlockSpec, ConicProblem

# --- a three-variable LP as three nonneg scalar blocks ---------------------
# min x1 + x2 + x3  s.t.  x1 + x2 = 1,  x2 + x3 = 1
lp = ConicProblem(
    blocks=[BlockSpec(1, "nonneg")] * 3,
    objective=[np.array([[1.0]])] * 3,
    constraints=[
        {0: np.array([[1.0]]), 1: np.array([[1.0]])},
        {1: np.array([[1.0]]), 2: np.array([[1.0]])},
    ],
    rhs=[1.0, 1.0],
)
sol = conic.solve(lp)
print("LP:", sol.status.value, "objective", round(sol.primal_objective, 9))
print("    x =", [round(float(x[0, 0]), 6) for x in sol.X])

# --- a tiny SDP: min Tr X with the off-diagonal sum pinned ------------------
sdp = ConicProblem(
    blocks=[BlockSpec(2)],
    objective=[np.eye(2)],
    constraints=[{0: np.array([[0.0, 1.0], [1.0, 0.0]])}],
    rhs=[2.0],
)
sol = conic.solve(sdp)
print("SDP:", sol.status.value, "objective", round(sol.primal_objective, 9))
print("    X =\n", np.round(sol.X[0], 6))
print(
    "    KKT residuals:",
    f"primal {sol.primal_residual:.2e}, dual {sol.dual_residual:.2e}, gap {sol.complementarity_gap:.2e}",
)

# --- infeasibility is certified, not guessed --------------------------------
bad = ConicProblem(
    blocks=[BlockSpec(1, "nonneg")],
    objective=[np.array([[1.0]])],
    constraints=[{0: np.array([[1.0]])}],
    rhs=[-1.0],
)
print("x >= 0 with x = -1:", conic.solve(bad).status.value)

# --- the Hermitian embedding used by the subproblem compilers ---------------
h = np.array([[1.0, 2.0 - 1.0j], [2.0 + 1.0j, 3.0]])
emb = conic.embed_hermitian(h)
print("Hermitian eigenvalues:", np.round(np.linalg.eigvalsh(h), 6))
print("embedded eigenvalues:", np.round(np.linalg.eigvalsh(emb), 6), "(each doubled)")
