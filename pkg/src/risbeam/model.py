"""Physical-layer core: margin matrix, effective noise power, SNR, rate.

Hardware impairments enter as additive Gaussian distortion whose power is
proportional to the signal power (beta_t at the transmitter, beta_r at the
receiver), so the effective noise is a population expectation over symbols
and distortion, never a per-sample quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Design",
    "margin_matrix",
    "noise_power",
    "snr",
    "achievable_rate",
    "effective_channel",
]

_UNIT_MOD_TOL = 1e-9


@dataclass(frozen=True)
class Design:
    """A candidate solution: beamformer, RIS phases, and the power trace."""

    beamformer: np.ndarray  # complex (N,)
    phases: np.ndarray  # complex (L,), unit modulus
    power: float  # watts, ||beamformer||^2
    trace: list = field(default_factory=list)  # per-iteration power values

    def __post_init__(self):
        mod_err = np.max(np.abs(np.abs(self.phases) - 1.0)) if self.phases.size else 0.0
        if mod_err > _UNIT_MOD_TOL:
            raise ValueError(f"phase vector is not unit-modulus (residual {mod_err:.3e})")
        p = float(np.vdot(self.beamformer, self.beamformer).real)
        if abs(p - self.power) > 1e-12 * max(p, 1.0):
            raise ValueError("recorded power disagrees with ||beamformer||^2")


def _real_part(value, scale=1.0):
    # Hermitian forms are real; assert the rounding residue then truncate.
    value = complex(value)
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real), scale):
        raise AssertionError(f"imaginary residue {value.imag:.3e} on a Hermitian form")
    return value.real


def effective_channel(e, g, Q):
    """Column vector c with c^H = g^H + e^H Q."""
    return np.asarray(g).ravel() + np.asarray(Q).conj().T @ np.asarray(e).ravel()


def margin_matrix(cov, rate, beta_t, beta_r):
    """Matrix A(cov) whose quadratic form decides the rate-threshold event.

    A = (1/(2^R - 1) - beta_r) * cov - (1 + beta_r) * beta_t * diag(cov);
    linear in cov, so the compiled subproblems stay linear.  The achievable
    rate meets R exactly when c^H A c >= (1 + beta_r) * sigma2 for the
    effective channel c.
    """
    cov = np.asarray(cov)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("cov must be a square matrix")
    if rate <= 0:
        raise ValueError("rate must be positive")
    cov = 0.5 * (cov + cov.conj().T)  # exact-real diagonal
    c_lin = 1.0 / (2.0**rate - 1.0) - beta_r
    c_diag = (1.0 + beta_r) * beta_t
    return c_lin * cov - c_diag * np.diag(np.diag(cov).real)


def noise_power(beamformer, e, g, Q, beta_t, beta_r, sigma2):
    """Total effective noise power at the receiver, watts.

    Sums transmit-distortion leakage through the channel, thermal noise, and
    the receive-side impairment; always >= (1 + beta_r) * sigma2.
    """
    v = np.asarray(beamformer).ravel()
    c = effective_channel(e, g, Q)
    distortion = beta_r * np.outer(v, v.conj()) + (1.0 + beta_r) * beta_t * np.diag(
        np.abs(v) ** 2
    )
    quad = _real_part(c.conj() @ distortion @ c)
    return quad + (1.0 + beta_r) * sigma2


def snr(beamformer, e, g, Q, beta_t, beta_r, sigma2):
    """Received SNR |c^H v|^2 / noise_power."""
    v = np.asarray(beamformer).ravel()
    c = effective_channel(e, g, Q)
    num = abs(np.vdot(c, v)) ** 2
    return num / noise_power(beamformer, e, g, Q, beta_t, beta_r, sigma2)


def achievable_rate(gamma):
    """log2(1 + gamma), bit/s/Hz."""
    if gamma < 0:
        raise ValueError("SNR must be >= 0")
    return float(np.log2(1.0 + gamma))
