"""Bernstein-type-inequality machinery for the Gaussian outage constraint.

The rate-outage event is a quadratic form in the stacked CSI-error vector.
For spherical error covariances the trace, Frobenius norm, and linear-term
norm of that quadratic form collapse to closed forms in the margin matrix A
and the composite scale zeta_g^2 + zeta_q^2 * L; ``bti_terms`` computes those
closed forms, while ``explicit_quadratic_matrix`` / ``explicit_linear_vector``
build the full stacked objects and serve as test oracles.

``check_bti`` evaluates the sufficient condition with the minimal feasible
slack values, which is exact because the condition is monotone in both
slacks: a design passes iff some slack assignment passes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import _real_part, effective_channel

__all__ = [
    "BtiData",
    "bti_terms",
    "explicit_quadratic_matrix",
    "explicit_linear_vector",
    "check_bti",
    "bti_margin",
]

_UNIT_MOD_TOL = 1e-9


def _require_unit_modulus(e):
    e = np.asarray(e).ravel()
    if e.size and np.max(np.abs(np.abs(e) - 1.0)) > _UNIT_MOD_TOL:
        raise ValueError("phase vector must be unit-modulus")
    return e


@dataclass(frozen=True)
class BtiData:
    """Closed-form ingredients of the Bernstein-type outage condition."""

    trace_term: float  # trace of the stacked quadratic-form matrix
    frob_term: float  # Frobenius norm of the same matrix
    mvec_norm: float  # norm of the stacked linear-term vector
    m_scalar: float  # deterministic margin at the channel estimate
    min_eig_scale: float  # lambda_min of (zeta_g^2 + zeta_q^2 L) * A
    zeta_g: float
    zeta_q: float


def bti_terms(amat, e, g_hat, Q_hat, zeta_g, zeta_q, beta_r, sigma2, mu=0.0):
    """Closed-form BtiData for margin matrix ``amat`` at phase vector ``e``.

    ``mu`` is the nonnegative rate-back-off slack used by the phase
    subproblem; mu = 0 reproduces the plain outage condition.
    """
    if mu < 0:
        raise ValueError("mu must be >= 0")
    e = _require_unit_modulus(e)
    L = e.size
    zeta2 = zeta_g**2 + zeta_q**2 * L
    c = effective_channel(e, g_hat, Q_hat)
    quad = _real_part(c.conj() @ amat @ c)
    return BtiData(
        trace_term=float(zeta2 * np.trace(amat).real),
        frob_term=float(zeta2 * np.linalg.norm(amat)),
        mvec_norm=float(np.sqrt(zeta2) * np.linalg.norm(amat @ c)),
        m_scalar=float(quad - (1.0 + beta_r) * sigma2 - mu),
        min_eig_scale=float(zeta2 * np.linalg.eigvalsh(amat)[0]),
        zeta_g=float(zeta_g),
        zeta_q=float(zeta_q),
    )


def explicit_quadratic_matrix(amat, e, zeta_g, zeta_q):
    """Stacked (N + LN) Hermitian matrix of the error quadratic form.

    Blocks: [[zg^2 A, zg zq (A kron e^T)], [zg zq (A kron e*), zq^2 (A kron E^T)]]
    with E = e e^H.  Used as a test oracle against ``bti_terms``.
    """
    e = _require_unit_modulus(e)
    amat = np.asarray(amat)
    big_e = np.outer(e, e.conj())
    top_right = zeta_g * zeta_q * np.kron(amat, e[None, :])
    return np.block(
        [
            [zeta_g**2 * amat, top_right],
            [top_right.conj().T, zeta_q**2 * np.kron(amat, big_e.T)],
        ]
    )


def explicit_linear_vector(amat, e, g_hat, Q_hat, zeta_g, zeta_q):
    """Stacked (N + LN) linear-term vector of the error quadratic form.

    First block zg * A c; second block zq * conj(vec(e c^H A)), column-major
    vec.  Its norm equals sqrt(zeta_g^2 + zeta_q^2 L) * ||A c||.
    """
    e = _require_unit_modulus(e)
    c = effective_channel(e, g_hat, Q_hat)
    row = c.conj() @ amat  # (g^H + e^H Q) A
    outer = np.outer(e, row)  # (L, N)
    return np.concatenate(
        [zeta_g * (amat @ c), zeta_q * outer.flatten(order="F").conj()]
    )


def bti_margin(data, tau):
    """Left-hand side of the outage condition at the minimal slacks."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    ln_inv = np.log(1.0 / tau)
    a_min = np.sqrt(data.frob_term**2 + 2.0 * data.mvec_norm**2)
    b_min = max(0.0, -data.min_eig_scale)
    margin = data.trace_term - np.sqrt(2.0 * ln_inv) * a_min - ln_inv * b_min + data.m_scalar
    return float(margin), float(a_min), float(b_min)


def check_bti(data, tau):
    """Deterministic sufficient check of the outage chance constraint.

    Returns (feasible, a_min, b_min).  The slacks enter the first condition
    monotonically, so evaluating at the minimal values a_min =
    sqrt(frob^2 + 2 mvec^2) and b_min = max(0, -min_eig_scale) decides
    feasibility exactly.
    """
    margin, a_min, b_min = bti_margin(data, tau)
    return margin >= 0.0, a_min, b_min
