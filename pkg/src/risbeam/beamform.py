"""Transmit-covariance and phase-shift SDPs, randomization, and the AO loop.

Both subproblems are compiled to standard-form block-diagonal SDPs for the
dense interior-point solver in :mod:`risbeam.conic`.  Complex Hermitian
decision blocks are real-embedded (trace doubling compensated at compile
time); the norm constraint on the stacked uncertainty terms becomes a PSD
arrow block; entry ties between blocks become scalar equality rows.

To keep the solver well conditioned, each compile normalizes channels by the
total channel power and powers by the matched-filter power scale, so all
compiled data is O(1); results are mapped back to physical units (watts) on
extraction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import conic
from .bti import bti_margin, bti_terms, check_bti
from .channel import rng_from_seed
from .conic import SolveStatus, embed_hermitian, unembed_hermitian
from .model import Design, effective_channel, margin_matrix

__all__ = [
    "DesignError",
    "Infeasible",
    "NumericalFailure",
    "RandomizationFailed",
    "SubproblemSolveInfo",
    "solve_transmit",
    "gaussian_randomize_beamformer",
    "solve_phase",
    "gaussian_randomize_phases",
    "alternating_optimize",
]

DEFAULT_CANDIDATES = 200


class DesignError(Exception):
    """Base class for design-stage failures."""


class Infeasible(DesignError):
    """The requested (rate, tau, beta, delta_c) is unattainable."""


class NumericalFailure(DesignError):
    """The conic solver failed; caller may perturb and restart."""


class RandomizationFailed(DesignError):
    """No randomization candidate could be made feasible."""


@dataclass
class SubproblemSolveInfo:
    """Diagnostics of one SDP solve plus its rank-one extraction."""

    sdp_status: str
    sdp_objective: float
    rank1_gap: float
    candidates_tried: int = 0
    candidates_accepted: int = 0
    slack_a: float = 0.0
    slack_b: float = 0.0
    slack_mu: float = 0.0
    iterations: int = 0


# ---------------------------------------------------------------------------
# complex-block SDP builder
# ---------------------------------------------------------------------------


class _Builder:
    """Assembles a ConicProblem from complex Hermitian and scalar blocks.

    Constraint coefficients on a Hermitian block are raw complex matrices K
    with the convention value = tr(K X); real-valued rows require Hermitian
    K (asserted), complex-valued rows are split into real and imaginary
    parts by the ``complex_row`` helper.
    """

    def __init__(self):
        self._blocks = []  # ("herm", cdim) or ("scalar",)
        self._objective = {}
        self._rows = []
        self._rhs = []

    def herm(self, cdim):
        self._blocks.append(("herm", cdim))
        return len(self._blocks) - 1

    def scalar(self):
        self._blocks.append(("scalar", 1))
        return len(self._blocks) - 1

    def set_objective(self, idx, coeff):
        self._objective[idx] = coeff

    def real_row(self, herm_coeffs, scalar_coeffs, rhs):
        row = {}
        for idx, K in herm_coeffs.items():
            K = np.asarray(K, dtype=complex)
            herm_err = np.max(np.abs(K - K.conj().T)) if K.size else 0.0
            if herm_err > 1e-12 * max(1.0, np.max(np.abs(K))):
                raise AssertionError("real-valued row requires a Hermitian coefficient")
            row[idx] = 0.5 * (K + K.conj().T)
        for idx, val in scalar_coeffs.items():
            row[idx] = float(val)
        if all(np.max(np.abs(np.atleast_1d(v))) == 0.0 for v in row.values()):
            # vacuous tie, e.g. the imaginary part of a diagonal entry
            if abs(rhs) > 1e-10:
                raise AssertionError(f"zero row with nonzero rhs {rhs!r}")
            return
        self._rows.append(row)
        self._rhs.append(float(rhs))

    def complex_row(self, herm_coeffs, scalar_coeffs, rhs):
        """Two real rows enforcing a complex-valued linear equality."""
        rhs = complex(rhs)
        for part, mult in (("re", 1.0), ("im", -1j)):
            hc = {idx: 0.5 * (mult * K + (mult * np.asarray(K, dtype=complex)).conj().T) for idx, K in herm_coeffs.items()}
            sc = {
                idx: (complex(v).real if part == "re" else complex(v).imag)
                for idx, v in scalar_coeffs.items()
            }
            val = rhs.real if part == "re" else rhs.imag
            self.real_row(hc, sc, val)

    def build(self):
        blocks, objective = [], []
        for k, (kind, cdim) in enumerate(self._blocks):
            coeff = self._objective.get(k)
            if kind == "herm":
                blocks.append(conic.BlockSpec(2 * cdim, "psd"))
                cmat = np.zeros((cdim, cdim), dtype=complex) if coeff is None else coeff
                objective.append(0.5 * embed_hermitian(cmat))
            else:
                blocks.append(conic.BlockSpec(1, "nonneg"))
                objective.append(np.array([[0.0 if coeff is None else float(coeff)]]))
        constraints = []
        for row in self._rows:
            entry = {}
            for idx, coeff in row.items():
                kind = self._blocks[idx][0]
                if kind == "herm":
                    entry[idx] = 0.5 * embed_hermitian(coeff)
                else:
                    entry[idx] = np.array([[coeff]])
            constraints.append(entry)
        return conic.ConicProblem(blocks, objective, constraints, np.asarray(self._rhs))

    def extract(self, solution, idx):
        kind, _ = self._blocks[idx]
        if kind == "herm":
            return unembed_hermitian(solution.X[idx])
        return float(solution.X[idx][0, 0])


def _raise_for_status(solution):
    if solution.status == SolveStatus.OPTIMAL:
        return
    if solution.status == SolveStatus.INFEASIBLE:
        raise Infeasible("subproblem infeasible")
    raise NumericalFailure(f"conic solve ended with status {solution.status.value}")


def _unit(k, n):
    v = np.zeros(n)
    v[k] = 1.0
    return v


def _basis(i, j, n):
    """E_ij = e_i e_j^T with tr(E_ij X) = X_ji."""
    out = np.zeros((n, n), dtype=complex)
    out[i, j] = 1.0
    return out


@dataclass(frozen=True)
class _Scales:
    """Unit system of one compile: channel amplitude and power scale."""

    s_ch: float  # channel amplitude unit
    u_p: float  # beamformer power unit, watts
    u_m: float  # margin/slack unit = u_p * s_ch^2


def _scales(chan, params):
    s_ch2 = np.linalg.norm(chan.g_hat) ** 2 + np.linalg.norm(chan.Q_hat) ** 2
    if s_ch2 <= 0.0:
        raise Infeasible("channel is identically zero")
    u_m = (2.0**params.rate - 1.0) * (1.0 + params.beta_r) * params.sigma2
    return _Scales(s_ch=float(np.sqrt(s_ch2)), u_p=float(u_m / s_ch2), u_m=float(u_m))


# ---------------------------------------------------------------------------
# transmit-covariance subproblem
# ---------------------------------------------------------------------------


def _compile_transmit(e, chan, params):
    n = chan.n_antennas
    L = chan.n_elements
    sc = _scales(chan, params)
    g = chan.g_hat / sc.s_ch
    Q = chan.Q_hat / sc.s_ch
    zeta2 = (chan.zeta_g**2 + chan.zeta_q**2 * L) / sc.s_ch**2
    sigma2 = params.sigma2 / sc.u_m
    c = effective_channel(e, g, Q)

    c_lin = 1.0 / (2.0**params.rate - 1.0) - params.beta_r
    c_diag = (1.0 + params.beta_r) * params.beta_t
    ln_inv = np.log(1.0 / params.tau)

    bld = _Builder()
    iv = bld.herm(n)  # transmit covariance
    ia, ib, islack = bld.scalar(), bld.scalar(), bld.scalar()
    d = n * n + n + 1  # arrow block: [zeta2 vec(A); sqrt(2 zeta2) A c; corner]
    ip = bld.herm(d)
    iw = bld.herm(n)  # b I + zeta2 A(V)
    bld.set_objective(iv, np.eye(n))

    def a_entry_coeff(m_row, n_col):
        # K with tr(K V) = A(V)_{m_row, n_col}
        K = c_lin * _basis(n_col, m_row, n)
        if m_row == n_col:
            K -= c_diag * _basis(n_col, n_col, n)
        return K

    # outage condition, linear in (V, a, b)
    g_bti = (
        zeta2 * (c_lin - c_diag) * np.eye(n)
        + c_lin * np.outer(c, c.conj())
        - c_diag * np.diag(np.abs(c) ** 2)
    )
    bld.real_row(
        {iv: g_bti},
        {ia: -np.sqrt(2.0 * ln_inv), ib: -ln_inv, islack: -1.0},
        (1.0 + params.beta_r) * sigma2,
    )

    # arrow block ties: diagonal = a, last column = stacked uncertainty terms
    for j in range(d):
        bld.real_row({ip: _basis(j, j, d).real}, {ia: -1.0}, 0.0)
    for col in range(n):
        for row in range(n):
            t = row + col * n  # column-major vec position of A_{row, col}
            bld.complex_row({ip: _basis(d - 1, t, d), iv: -zeta2 * a_entry_coeff(row, col)}, {}, 0.0)
    for m_row in range(n):
        t = n * n + m_row
        K = np.zeros((n, n), dtype=complex)
        for n_col in range(n):
            K += c[n_col] * a_entry_coeff(m_row, n_col)
        bld.complex_row({ip: _basis(d - 1, t, d), iv: -np.sqrt(2.0 * zeta2) * K}, {}, 0.0)
    for p in range(d - 1):
        for q in range(p + 1, d - 1):
            bld.complex_row({ip: _basis(q, p, d)}, {}, 0.0)

    # spectral slack block: W = b I + zeta2 A(V)
    for m_row in range(n):
        for n_col in range(m_row, n):
            sc_coeff = {ib: -1.0} if m_row == n_col else {}
            bld.complex_row(
                {iw: _basis(n_col, m_row, n), iv: -zeta2 * a_entry_coeff(m_row, n_col)},
                sc_coeff,
                0.0,
            )

    return bld, (iv, ia, ib), sc


def solve_transmit(e, chan, params, rng=None, n_cand=DEFAULT_CANDIDATES, tol=1e-8):
    """Minimum-power transmit covariance for fixed phases, then rank-one v.

    Compiles the relaxed covariance problem (rank constraint dropped), solves
    it, and extracts a beamformer by Gaussian randomization.  The returned
    beamformer always passes ``check_bti``.  Raises ``Infeasible`` when the
    outage target cannot be met regardless of power (for example beta_r >=
    1/(2^R - 1)) and propagates ``NumericalFailure`` from the solver.
    """
    e = np.asarray(e).ravel()
    if e.size != chan.n_elements or np.max(np.abs(np.abs(e) - 1.0)) > 1e-9:
        raise ValueError("e must be a unit-modulus vector of length L")
    if rng is None:
        rng = rng_from_seed(0, stream=2)
    bld, (iv, ia, ib), sc = _compile_transmit(e, chan, params)
    solution = conic.solve(bld.build(), tol=tol)
    _raise_for_status(solution)

    cov = sc.u_p * bld.extract(solution, iv)
    info = SubproblemSolveInfo(
        sdp_status=solution.status.value,
        sdp_objective=sc.u_p * solution.primal_objective,
        rank1_gap=_rank1_gap(cov),
        slack_a=sc.u_m * bld.extract(solution, ia),
        slack_b=sc.u_m * bld.extract(solution, ib),
        iterations=solution.iterations,
    )
    v = gaussian_randomize_beamformer(cov, e, chan, params, n_cand, rng, info=info)
    return v, info


def _rank1_gap(mat):
    eig = np.linalg.eigvalsh(mat)
    total = float(np.sum(np.clip(eig, 0.0, None)))
    if total <= 0.0:
        return 0.0
    return float(np.clip(eig[-1] / total, 0.0, 1.0))


def _beamformer_margin_slope(v, e, chan, params):
    """Slope D of the outage margin at t * v v^H; margin(t) = t D - offset."""
    amat = margin_matrix(np.outer(v, v.conj()), params.rate, params.beta_t, params.beta_r)
    data = bti_terms(
        amat, e, chan.g_hat, chan.Q_hat, chan.zeta_g, chan.zeta_q, params.beta_r, params.sigma2
    )
    margin, _, _ = bti_margin(data, params.tau)
    offset = (1.0 + params.beta_r) * params.sigma2
    return margin + offset, offset


def gaussian_randomize_beamformer(cov, e, chan, params, n_cand, rng, info=None):
    """Recover a feasible rank-one beamformer from the relaxed covariance.

    Numerically rank-one covariances short-circuit to the scaled principal
    eigenvector.  Otherwise draws ``n_cand`` candidates from CN(0, cov) and
    rescales each to the minimal power passing ``check_bti``; the margin is
    affine in the power scale, so the minimal feasible scale is exact.
    Raises ``RandomizationFailed`` when no candidate admits a feasible scale.
    """
    eig, vec = np.linalg.eigh(cov)
    gap = _rank1_gap(cov)

    candidates = []
    if gap >= 1.0 - 1e-6:
        candidates.append(np.sqrt(max(eig[-1], 0.0)) * vec[:, -1])
        tried = 1
    else:
        if n_cand < 1:
            raise RandomizationFailed("no randomization candidates requested")
        root = vec * np.sqrt(np.clip(eig, 0.0, None))
        n = cov.shape[0]
        draws = (rng.standard_normal((n_cand, n)) + 1j * rng.standard_normal((n_cand, n))) / np.sqrt(2.0)
        candidates = list(draws @ root.T)  # z = root @ g has covariance cov
        tried = n_cand

    best_v, best_power = None, np.inf
    accepted = 0
    for v in candidates:
        norm2 = float(np.vdot(v, v).real)
        if norm2 <= 0.0:
            continue
        slope, offset = _beamformer_margin_slope(v, e, chan, params)
        if slope <= 0.0:
            continue  # infeasible at any power: the HWI-induced SNR ceiling
        scale = offset / slope * (1.0 + 1e-9)
        accepted += 1
        power = scale * norm2
        if power < best_power:
            best_power = power
            best_v = np.sqrt(scale) * v
    if info is not None:
        info.candidates_tried = tried
        info.candidates_accepted = accepted
    if best_v is None:
        raise RandomizationFailed("no candidate could be rescaled to feasibility")
    return best_v


# ---------------------------------------------------------------------------
# phase-shift subproblem
# ---------------------------------------------------------------------------


def _compile_phase(v, a_prev, chan, params):
    n = chan.n_antennas
    L = chan.n_elements
    sc = _scales(chan, params)
    g = chan.g_hat / sc.s_ch
    Q = chan.Q_hat / sc.s_ch
    zeta2 = (chan.zeta_g**2 + chan.zeta_q**2 * L) / sc.s_ch**2
    sigma2 = params.sigma2 / sc.u_m
    a_prev_n = a_prev / sc.u_m
    amat = margin_matrix(np.outer(v, v.conj()), params.rate, params.beta_t, params.beta_r) / sc.u_p
    ln_inv = np.log(1.0 / params.tau)

    lift_margin = np.block(
        [[Q @ amat @ Q.conj().T, (Q @ amat @ g)[:, None]], [(Q @ amat @ g)[None, :].conj(), np.zeros((1, 1))]]
    )
    a2 = amat @ amat.conj().T
    lift_norm = np.block(
        [[Q @ a2 @ Q.conj().T, (Q @ a2 @ g)[:, None]], [(Q @ a2 @ g)[None, :].conj(), np.zeros((1, 1))]]
    )
    g_quad = float((g.conj() @ amat @ g).real)
    g_quad2 = float((g.conj() @ a2 @ g).real)

    bld = _Builder()
    ie = bld.herm(L + 1)  # lifted phase Gram matrix with unit diagonal
    iw = bld.herm(n)
    imu, ia, ib = bld.scalar(), bld.scalar(), bld.scalar()
    is1, is2 = bld.scalar(), bld.scalar()
    bld.set_objective(imu, -1.0)  # maximize the rate back-off slack

    for j in range(L + 1):
        bld.real_row({ie: _basis(j, j, L + 1).real}, {}, 1.0)

    bld.real_row(
        {ie: lift_margin},
        {ia: -np.sqrt(2.0 * ln_inv), ib: -ln_inv, imu: -1.0, is1: -1.0},
        (1.0 + params.beta_r) * sigma2 - g_quad - zeta2 * float(np.trace(amat).real),
    )

    # first-order linearization of the norm bound around a_prev
    bld.real_row(
        {ie: 2.0 * zeta2 * lift_norm},
        {ia: -2.0 * a_prev_n, is2: 1.0},
        a_prev_n**2 - zeta2**2 * np.linalg.norm(amat) ** 2 - 2.0 * zeta2 * g_quad2,
    )

    for m_row in range(n):
        for n_col in range(m_row, n):
            sc_coeff = {ib: -1.0} if m_row == n_col else {}
            bld.complex_row({iw: _basis(n_col, m_row, n)}, sc_coeff, zeta2 * amat[m_row, n_col])

    return bld, (ie, imu, ia, ib), sc


def solve_phase(v, a_prev, chan, params, rng=None, n_cand=DEFAULT_CANDIDATES, tol=1e-8):
    """Feasibility-improving phase update for a fixed beamformer.

    Maximizes the rate back-off slack mu over the lifted unit-diagonal Gram
    matrix (rank constraint dropped), with the norm bound linearized around
    ``a_prev``, then extracts unit-modulus phases by Gaussian randomization.
    Raises ``Infeasible`` when the linearization cuts off every feasible
    point; callers fall back to the incumbent phases.
    """
    v = np.asarray(v).ravel()
    if rng is None:
        rng = rng_from_seed(0, stream=3)
    if a_prev < 0:
        raise ValueError("a_prev must be >= 0")
    bld, (ie, imu, ia, ib), sc = _compile_phase(v, a_prev, chan, params)
    solution = conic.solve(bld.build(), tol=tol)
    _raise_for_status(solution)

    lift = bld.extract(solution, ie)
    mu = sc.u_m * bld.extract(solution, imu)
    info = SubproblemSolveInfo(
        sdp_status=solution.status.value,
        sdp_objective=mu,
        rank1_gap=_rank1_gap(lift),
        slack_a=sc.u_m * bld.extract(solution, ia),
        slack_b=sc.u_m * bld.extract(solution, ib),
        slack_mu=mu,
        iterations=solution.iterations,
    )
    e = gaussian_randomize_phases(lift, v, chan, params, n_cand, rng, info=info)
    return e, mu, info


def gaussian_randomize_phases(lift, v, chan, params, n_cand, rng, info=None):
    """Unit-modulus phases from the lifted Gram matrix.

    Candidates are the principal eigenvector plus ``n_cand`` draws from
    CN(0, lift); each is de-referenced by the phase of its last coordinate
    and projected entrywise to unit modulus.  Returns the candidate with the
    largest outage margin for the fixed beamformer; the projection always
    yields a valid phase vector.
    """
    L = lift.shape[0] - 1
    eig, vec = np.linalg.eigh(lift)
    cand = [vec[:, -1]]
    if n_cand > 0:
        root = vec * np.sqrt(np.clip(eig, 0.0, None))
        draws = (rng.standard_normal((n_cand, L + 1)) + 1j * rng.standard_normal((n_cand, L + 1))) / np.sqrt(2.0)
        cand.extend(list(draws @ root.T))

    amat = margin_matrix(np.outer(v, v.conj()), params.rate, params.beta_t, params.beta_r)

    def project(z):
        return np.exp(1j * np.angle(z[:L] * np.conj(z[L])))

    def margin_of(e):
        data = bti_terms(
            amat, e, chan.g_hat, chan.Q_hat, chan.zeta_g, chan.zeta_q, params.beta_r, params.sigma2
        )
        return bti_margin(data, params.tau)[0]

    best_e, best_margin = None, -np.inf
    for z in cand:
        e = project(z)
        m = margin_of(e)
        if m > best_margin:
            best_margin, best_e = m, e
    if info is not None:
        info.candidates_tried = len(cand)
        info.candidates_accepted = 1  # the projection always yields a valid e
    return best_e


# ---------------------------------------------------------------------------
# alternating optimization
# ---------------------------------------------------------------------------


def alternating_optimize(
    chan,
    params,
    seed,
    max_iter=30,
    n_cand=DEFAULT_CANDIDATES,
    tol=1e-8,
    trace_path=None,
):
    """Alternate the transmit and phase subproblems until the power settles.

    Phases start from i.i.d. uniform draws.  Each phase update is accepted
    only if it does not reduce the outage margin of the incumbent design, and
    each transmit update only if it does not increase power, so the recorded
    power trace is non-increasing; the loop stops when the relative decrease
    falls below ``params.epsilon`` or after ``max_iter`` iterations.

    Raises ``Infeasible`` from the first transmit solve when the target is
    unattainable.  A failed phase subproblem keeps the incumbent phases and
    lets the power criterion terminate the loop.
    """
    rng = rng_from_seed(seed, stream=1)
    e = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, chan.n_elements))

    trace_rows = []

    v, tinfo = solve_transmit(e, chan, params, rng, n_cand, tol)
    power = float(np.vdot(v, v).real)
    trace = [power]
    trace_rows.append((1, power, 0.0, tinfo.slack_a, tinfo.slack_b, tinfo.sdp_status))

    for it in range(2, max_iter + 1):
        data = bti_terms(
            margin_matrix(np.outer(v, v.conj()), params.rate, params.beta_t, params.beta_r),
            e,
            chan.g_hat,
            chan.Q_hat,
            chan.zeta_g,
            chan.zeta_q,
            params.beta_r,
            params.sigma2,
        )
        feasible, a_min, _ = check_bti(data, params.tau)
        assert feasible, "incumbent design lost feasibility"
        incumbent_margin = bti_margin(data, params.tau)[0]

        mu = 0.0
        status = "KeptIncumbent"
        try:
            e_new, mu, pinfo = solve_phase(v, a_min, chan, params, rng, n_cand, tol)
            new_data = bti_terms(
                margin_matrix(np.outer(v, v.conj()), params.rate, params.beta_t, params.beta_r),
                e_new,
                chan.g_hat,
                chan.Q_hat,
                chan.zeta_g,
                chan.zeta_q,
                params.beta_r,
                params.sigma2,
            )
            if bti_margin(new_data, params.tau)[0] >= incumbent_margin:
                e = e_new
                status = pinfo.sdp_status
        except DesignError:
            pass

        try:
            v_new, tinfo = solve_transmit(e, chan, params, rng, n_cand, tol)
        except DesignError:
            break
        new_power = float(np.vdot(v_new, v_new).real)
        if new_power <= power:
            v, power = v_new, new_power

        prev = trace[-1]
        trace.append(power)
        trace_rows.append((it, power, mu, tinfo.slack_a, tinfo.slack_b, status))
        if prev - power < params.epsilon * max(prev, 1e-300):
            break

    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "power_w", "mu", "a", "b", "sdp_status"])
            writer.writerows(trace_rows)

    return Design(beamformer=v, phases=e, power=power, trace=trace)
