"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Problems are stated in standard primal form over a product of cones,

    minimize    sum_k <C_k, X_k>
    subject to  sum_k <A_ik, X_k> = b_i,    i = 1..m,
                X_k PSD  (nonnegative-scalar blocks are 1x1 PSD blocks),

and solved together with the dual

    maximize    b' y
    subject to  C_k - sum_i y_i A_ik = S_k,   S_k PSD,

by an infeasible-start HKM predictor-corrector method.  Problem sizes in this
package are small (blocks up to ~100 rows, a few dozen constraints), so all
linear algebra is dense.

The module also provides the two embeddings used by the subproblem compilers:
``embed_hermitian`` maps a complex Hermitian matrix to the equivalent real
symmetric matrix of twice the size, and ``soc_as_psd`` gives the arrow-matrix
template that renders a second-order-cone constraint as a PSD block.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "BlockSpec",
    "ConicProblem",
    "ConicSolution",
    "SolveStatus",
    "SolverWarning",
    "embed_hermitian",
    "soc_as_psd",
    "SocTemplate",
    "solve",
]

_SYM_TOL = 1e-12


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


class SolverWarning(UserWarning):
    """Non-fatal solver diagnostics (dropped rows, regularization)."""


@dataclass(frozen=True)
class BlockSpec:
    """One cone block: ``kind`` is ``"psd"`` or ``"nonneg"`` (dim 1)."""

    dim: int
    kind: str = "psd"

    def __post_init__(self):
        if self.kind not in ("psd", "nonneg"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("block dimension must be >= 1")
        if self.kind == "nonneg" and self.dim != 1:
            raise ValueError("nonneg blocks are scalars (dim 1)")


def _check_symmetric(mat, dim, what):
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (dim, dim):
        raise ValueError(f"{what}: expected shape {(dim, dim)}, got {mat.shape}")
    asym = np.max(np.abs(mat - mat.T)) if dim > 1 else 0.0
    if asym > _SYM_TOL * max(1.0, np.max(np.abs(mat))):
        raise ValueError(f"{what}: matrix is not symmetric (residual {asym:.3e})")
    return 0.5 * (mat + mat.T)


class ConicProblem:
    """Standard-form block-diagonal SDP data.

    Parameters
    ----------
    blocks : sequence of BlockSpec
    objective : sequence of per-block symmetric matrices C_k
    constraints : sequence of mappings {block index: symmetric matrix A_ik};
        blocks missing from a mapping carry a zero coefficient
    rhs : array of m right-hand sides b_i

    All matrices are symmetrized on construction and must be symmetric to
    within 1e-12 beforehand.
    """

    def __init__(self, blocks, objective, constraints, rhs):
        self.blocks = [b if isinstance(b, BlockSpec) else BlockSpec(*b) for b in blocks]
        if len(objective) != len(self.blocks):
            raise ValueError("objective must supply one matrix per block")
        self.objective = [
            _check_symmetric(c, blk.dim, f"objective block {k}")
            for k, (c, blk) in enumerate(zip(objective, self.blocks))
        ]
        self.rhs = np.asarray(rhs, dtype=float).ravel()
        if len(constraints) != self.rhs.size:
            raise ValueError("one rhs entry per constraint required")
        self.constraints = []
        for i, row in enumerate(constraints):
            clean = {}
            for k, mat in row.items():
                if not 0 <= k < len(self.blocks):
                    raise ValueError(f"constraint {i}: no block {k}")
                clean[k] = _check_symmetric(mat, self.blocks[k].dim, f"constraint {i}, block {k}")
            self.constraints.append(clean)

    @property
    def num_blocks(self):
        return len(self.blocks)

    @property
    def num_constraints(self):
        return self.rhs.size

    def stacked(self):
        """Per-block dense constraint stacks, shape (m, dim, dim)."""
        m = self.num_constraints
        stacks = [np.zeros((m, blk.dim, blk.dim)) for blk in self.blocks]
        for i, row in enumerate(self.constraints):
            for k, mat in row.items():
                stacks[k][i] = mat
        return stacks

    def dump(self, path):
        """Write the problem as structured text for offline inspection.

        One record per nonzero coefficient: ``block i j constraint value``
        (constraint index -1 for the objective), preceded by the block table
        and followed by the right-hand sides.  Values use shortest
        round-trip decimal text.
        """
        with open(path, "w") as fh:
            fh.write(f"blocks {self.num_blocks}\n")
            for k, blk in enumerate(self.blocks):
                fh.write(f"block {k} {blk.dim} {blk.kind}\n")
            for k, mat in enumerate(self.objective):
                for i, j in zip(*np.nonzero(mat)):
                    fh.write(f"entry {k} {i} {j} -1 {float(mat[i, j])!r}\n")
            for ci, row in enumerate(self.constraints):
                for k, mat in row.items():
                    for i, j in zip(*np.nonzero(mat)):
                        fh.write(f"entry {k} {i} {j} {ci} {float(mat[i, j])!r}\n")
            for ci, bi in enumerate(self.rhs):
                fh.write(f"rhs {ci} {float(bi)!r}\n")


@dataclass
class ConicSolution:
    """Solver output: primal/dual iterates plus KKT residual norms.

    Residuals are relative: primal ||b - A(X)|| / (1 + ||b||), dual
    ||C - A*(y) - S||_F / (1 + ||C||_F), and the complementarity gap
    max(|pobj - dobj|, <X, S>) / (1 + |pobj| + |dobj|).  ``status ==
    OPTIMAL`` guarantees all three are <= the solve tolerance.
    """

    status: SolveStatus
    X: list
    y: np.ndarray
    S: list
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    complementarity_gap: float
    iterations: int


def embed_hermitian(H):
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of Hermitian H.

    The embedding is PSD iff H is, doubles every eigenvalue's multiplicity,
    and doubles the trace; compilers compensate the factor 2.  Rejects
    non-Hermitian input (residual above 1e-12).
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("embed_hermitian expects a square matrix")
    herm_err = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if herm_err > _SYM_TOL * max(1.0, np.max(np.abs(H))):
        raise ValueError(f"matrix is not Hermitian (residual {herm_err:.3e})")
    H = 0.5 * (H + H.conj().T)
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def unembed_hermitian(Y):
    """Recover the Hermitian matrix whose embedding best matches Y.

    For Y = embed_hermitian(H) this is exact; for a general symmetric Y it
    averages Y with its symplectic conjugate, which preserves PSD-ness and
    every inner product against embedded coefficient matrices.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0] // 2
    if Y.shape != (2 * n, 2 * n):
        raise ValueError("expected an even-dimensional square matrix")
    re = 0.5 * (Y[:n, :n] + Y[n:, n:])
    im = 0.5 * (Y[n:, :n] - Y[:n, n:])
    H = re + 1j * im
    return 0.5 * (H + H.conj().T)


@dataclass(frozen=True)
class SocTemplate:
    """Arrow-matrix template for ||u||_2 <= a with u of length ``dim``.

    ``assemble(u, a)`` returns the Hermitian arrow [[a I, u], [u^H, a]],
    which is PSD exactly when ||u|| <= a; its entries are linear in (u, a).
    """

    dim: int

    @property
    def size(self):
        return self.dim + 1

    def assemble(self, u, a):
        u = np.asarray(u).ravel()
        if u.size != self.dim:
            raise ValueError(f"expected u of length {self.dim}, got {u.size}")
        dtype = complex if np.iscomplexobj(u) else float
        arrow = np.zeros((self.size, self.size), dtype=dtype)
        arrow[np.diag_indices(self.size)] = a
        arrow[: self.dim, self.dim] = u
        arrow[self.dim, : self.dim] = np.conj(u)
        return arrow


def soc_as_psd(dim):
    """Template turning a second-order-cone constraint into a PSD block."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return SocTemplate(dim)


# ---------------------------------------------------------------------------
# solver internals
# ---------------------------------------------------------------------------


def _presolve(problem):
    """Row-scale the constraints and drop linearly dependent rows.

    Returns (stacks, b, C, keep, row_scale) for the reduced system.  Raises
    nothing; an inconsistent dependent/zero row yields keep = None which the
    caller reports as infeasible.
    """
    stacks = problem.stacked()
    m = problem.num_constraints
    b = problem.rhs.copy()

    flat = np.hstack([s.reshape(m, -1) for s in stacks]) if m else np.zeros((0, 0))
    row_norm = np.max(np.abs(flat), axis=1) if m else np.zeros(0)

    # zero rows: 0 = b_i is either vacuous or infeasible
    for i in range(m):
        if row_norm[i] == 0.0 and abs(b[i]) > 1e-12:
            return None, None, None, None, None

    scale = np.where(row_norm > 0, np.maximum(row_norm, np.abs(b)), 1.0)
    flat_s = flat / scale[:, None]
    b_s = b / scale

    keep = [i for i in range(m) if row_norm[i] > 0]
    if len(keep) < m:
        warnings.warn(f"dropping {m - len(keep)} vacuous constraint rows", SolverWarning)

    sub = flat_s[keep]
    if sub.shape[0] > 1:
        _, r, piv = sla.qr(sub.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.sum(diag > 1e-10 * max(diag[0], 1e-300))) if diag.size else 0
        if rank < len(keep):
            kept_local = sorted(piv[:rank])
            dropped_local = sorted(piv[rank:])
            basis = sub[kept_local]
            for j in dropped_local:
                coeff, *_ = np.linalg.lstsq(basis.T, sub[j], rcond=None)
                mismatch = abs(b_s[j] - coeff @ b_s[np.asarray(keep)[kept_local]])
                if mismatch > 1e-8 * (1.0 + np.max(np.abs(b_s))):
                    return None, None, None, None, None
            warnings.warn(
                f"dropping {len(dropped_local)} linearly dependent constraint rows",
                SolverWarning,
            )
            keep = [keep[i] for i in kept_local]

    keep = np.asarray(keep, dtype=int)
    stacks_r = [s[keep] / scale[keep, None, None] for s in stacks]
    C = [c.copy() for c in problem.objective]
    return stacks_r, b_s[keep], C, keep, scale


def _sym(mat):
    return 0.5 * (mat + mat.T)


def _chol_psd(mat):
    """Cholesky with one re-symmetrize-and-jitter retry."""
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        jitter = 1e-14 * max(1.0, np.trace(mat) / mat.shape[0])
        return np.linalg.cholesky(_sym(mat) + jitter * np.eye(mat.shape[0]))


def _max_step(chol_l, direction):
    """Largest alpha with M + alpha*D PSD, for M = L L^T succeeding Cholesky."""
    w = sla.solve_triangular(chol_l, direction, lower=True)
    w = sla.solve_triangular(chol_l, w.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(w))[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _apply_A(stacks, X):
    out = 0.0
    for s, x in zip(stacks, X):
        out = out + np.einsum("ikl,kl->i", s, x)
    return out


def _apply_At(stacks, y):
    return [np.einsum("i,ikl->kl", y, s) for s in stacks]


def _dual_ray_certificate(stacks, b, y, tol):
    """True when y normalizes to a Farkas ray proving primal infeasibility."""
    bty = b @ y
    if bty <= max(1.0, np.max(np.abs(b), initial=0.0)):
        return False
    ray = y / bty
    for s in stacks:
        z = np.einsum("i,ikl->kl", ray, s)
        scale = max(1.0, np.max(np.abs(z)))
        if np.linalg.eigvalsh(_sym(z))[-1] > tol * scale:
            return False
    return True


def solve(problem, tol=1e-8, max_iter=100):
    """Solve a ConicProblem to the requested KKT tolerance.

    Returns a ConicSolution whose status is OPTIMAL (all three relative KKT
    residuals <= tol), INFEASIBLE (a Farkas certificate was found, or the
    equality rows are inconsistent), MAX_ITERATIONS, or NUMERICAL_FAILURE
    (irrecoverably ill-conditioned Newton systems; callers may perturb and
    restart).  The method is deterministic for identical inputs.
    """
    dims = [blk.dim for blk in problem.blocks]
    n_tot = sum(dims)
    m_orig = problem.num_constraints

    pres_out = _presolve(problem)
    if pres_out[0] is None:
        return _finalize(
            problem,
            SolveStatus.INFEASIBLE,
            [np.zeros((d, d)) for d in dims],
            np.zeros(m_orig),
            [c.copy() for c in problem.objective],
            0,
        )
    stacks, b, C, keep, row_scale = pres_out
    m = b.size

    if m == 0:
        # unconstrained over the cone: X = 0 is optimal iff C is PSD
        X0 = [np.zeros((d, d)) for d in dims]
        status = SolveStatus.OPTIMAL
        if any(np.linalg.eigvalsh(c)[0] < -tol for c in C if c.size):
            status = SolveStatus.MAX_ITERATIONS  # objective unbounded below
        return _finalize(problem, status, X0, np.zeros(m_orig), C, 0)

    a_norms = np.sqrt(sum(np.sum(s**2, axis=(1, 2)) for s in stacks))
    n_max = max(dims)
    xi_p = max(10.0, np.sqrt(n_max), n_max * np.max(np.abs(b) / (1.0 + a_norms)))
    xi_d = max(10.0, np.sqrt(n_max), max(np.linalg.norm(c) for c in C))

    X = [xi_p * np.eye(d) for d in dims]
    S = [xi_d * np.eye(d) for d in dims]
    y = np.zeros(m)

    b_scale = 1.0 + np.linalg.norm(b)
    c_scale = 1.0 + np.sqrt(sum(np.linalg.norm(c) ** 2 for c in C))
    gamma = 0.99  # fraction-to-boundary

    status = SolveStatus.MAX_ITERATIONS
    it = 0
    best = None
    best_score = np.inf
    polish_left = 2  # extra iterations after first hitting tolerance
    for it in range(1, max_iter + 1):
        rp = b - _apply_A(stacks, X)
        Aty = _apply_At(stacks, y)
        Rd = [c - at - s for c, at, s in zip(C, Aty, S)]

        pobj = sum(np.tensordot(c, x) for c, x in zip(C, X))
        dobj = b @ y
        mu = sum(np.tensordot(x, s) for x, s in zip(X, S)) / n_tot

        pres = np.linalg.norm(rp) / b_scale
        dres = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd)) / c_scale
        gap_rel = max(abs(pobj - dobj), mu * n_tot) / (1.0 + abs(pobj) + abs(dobj))

        score = max(pres, dres, gap_rel)
        if score < best_score:
            best_score = score
            best = ([x.copy() for x in X], y.copy(), [s.copy() for s in S])

        if pres <= tol and dres <= tol and gap_rel <= tol:
            status = SolveStatus.OPTIMAL
            if polish_left == 0 or score <= 1e-4 * tol:
                break
            polish_left -= 1
        elif status is SolveStatus.OPTIMAL:
            break  # a polish step degraded the iterate; best one is kept
        elif _dual_ray_certificate(stacks, b, y, 1e-9):
            status = SolveStatus.INFEASIBLE
            break

        try:
            L_s = [_chol_psd(s) for s in S]
            L_x = [_chol_psd(x) for x in X]
        except np.linalg.LinAlgError:
            if status is SolveStatus.OPTIMAL:
                break
            status = SolveStatus.NUMERICAL_FAILURE
            break

        Sinv = []
        for L, d in zip(L_s, dims):
            inv = sla.cho_solve((L, True), np.eye(d))
            Sinv.append(_sym(inv))

        # Schur complement M_ij = sum_k tr(A_ik X_k A_jk Sinv_k)
        M = np.zeros((m, m))
        for s, x, sinv in zip(stacks, X, Sinv):
            t = np.einsum("ab,ibc,cd->iad", x, s, sinv, optimize=True)
            M += np.einsum("iab,jba->ij", t, s, optimize=True)
        M = _sym(M)

        L_m = None
        reg = 0.0
        base = max(np.max(np.abs(np.diag(M))), 1e-300)
        for _ in range(6):
            try:
                L_m = np.linalg.cholesky(M + reg * np.eye(m))
                break
            except np.linalg.LinAlgError:
                reg = base * 1e-14 if reg == 0.0 else reg * 100.0
        if L_m is None:
            if status is not SolveStatus.OPTIMAL:
                status = SolveStatus.NUMERICAL_FAILURE
            break

        def schur_solve(rhs):
            dy = sla.cho_solve((L_m, True), rhs)
            # one refinement step against the unregularized matrix
            dy += sla.cho_solve((L_m, True), rhs - M @ dy)
            return dy

        a_x = b - rp
        a_sinv = np.array([sum(np.tensordot(s[i], sinv) for s, sinv in zip(stacks, Sinv)) for i in range(m)])
        a_xrd = np.zeros(m)
        for s, x, r, sinv in zip(stacks, X, Rd, Sinv):
            g = x @ r @ sinv
            a_xrd += np.einsum("ikl,lk->i", s, g)

        def newton(nu, corr):
            rhs = rp - nu * a_sinv + a_x + a_xrd
            if corr is not None:
                for s, g in zip(stacks, corr):
                    rhs = rhs + np.einsum("ikl,lk->i", s, g)
            dy = schur_solve(rhs)
            dS = [r - at for r, at in zip(Rd, _apply_At(stacks, dy))]
            dX = []
            for k, (x, sinv, ds) in enumerate(zip(X, Sinv, dS)):
                raw = nu * sinv - x - x @ ds @ sinv
                if corr is not None:
                    raw = raw - corr[k]
                dX.append(_sym(raw))
            return dX, dy, dS

        # predictor
        dXa, _, dSa = newton(0.0, None)
        ap = min(1.0, min(_max_step(L, d) for L, d in zip(L_x, dXa)))
        ad = min(1.0, min(_max_step(L, d) for L, d in zip(L_s, dSa)))
        mu_aff = sum(
            np.tensordot(x + ap * dx, s + ad * ds)
            for x, dx, s, ds in zip(X, dXa, S, dSa)
        ) / n_tot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # corrector
        corr = [dx @ ds @ sinv for dx, ds, sinv in zip(dXa, dSa, Sinv)]
        dX, dy, dS = newton(sigma * mu, corr)

        if any(not np.all(np.isfinite(d)) for d in dX) or not np.all(np.isfinite(dy)):
            if status is not SolveStatus.OPTIMAL:
                status = SolveStatus.NUMERICAL_FAILURE
            break

        ap = min(1.0, gamma * min(_max_step(L, d) for L, d in zip(L_x, dX)))
        ad = min(1.0, gamma * min(_max_step(L, d) for L, d in zip(L_s, dS)))

        X = [_sym(x + ap * dx) for x, dx in zip(X, dX)]
        y = y + ad * dy
        S = [_sym(s + ad * ds) for s, ds in zip(S, dS)]

    else:
        it = max_iter

    if status is SolveStatus.OPTIMAL and best is not None:
        X, y, S = best  # polish steps may have moved past the best point
    if status in (SolveStatus.MAX_ITERATIONS, SolveStatus.NUMERICAL_FAILURE):
        if _dual_ray_certificate(stacks, b, y, 1e-7):
            status = SolveStatus.INFEASIBLE
        elif best is not None:
            X, y, S = best  # return the cleanest iterate visited

    y_full = np.zeros(m_orig)
    y_full[keep] = y / row_scale[keep]
    return _finalize(problem, status, X, y_full, S, it)


def _finalize(problem, status, X, y_full, S, iterations):
    """Recompute KKT residuals against the original (unscaled) data."""
    stacks = problem.stacked()
    b = problem.rhs
    C = problem.objective
    pobj = sum(np.tensordot(c, x) for c, x in zip(C, X))
    dobj = float(b @ y_full)
    rp = b - _apply_A(stacks, X) if b.size else np.zeros(0)
    Rd = [c - at - s for c, at, s in zip(C, _apply_At(stacks, y_full), S)]
    comp = sum(np.tensordot(x, s) for x, s in zip(X, S))
    pres = np.linalg.norm(rp) / (1.0 + np.linalg.norm(b))
    dres = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd)) / (
        1.0 + np.sqrt(sum(np.linalg.norm(c) ** 2 for c in C))
    )
    gap = max(abs(pobj - dobj), comp) / (1.0 + abs(pobj) + abs(dobj))
    return ConicSolution(
        status=status,
        X=X,
        y=y_full,
        S=S,
        primal_objective=float(pobj),
        dual_objective=dobj,
        primal_residual=float(pres),
        dual_residual=float(dres),
        complementarity_gap=float(gap),
        iterations=iterations,
    )
