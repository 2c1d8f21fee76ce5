"""Simulation scenario: geometry, path loss, Rician fading, cascaded channel.

Large-scale fading follows PL_dB = -30 - 10*alpha*log10(d).  Small-scale
fading is Rician; the deterministic component uses uniform linear arrays with
half-wavelength spacing and angles drawn once per realization.  The full
cascaded-link loss (BS->RIS distance plus RIS->user distance) is applied to
the BS->RIS matrix, with the RIS->user vector kept at unit large-scale gain;
the split is a recorded convention and can be moved via ``cascade_pl_split``.

All randomness flows through numpy's Philox counter-based generator so that a
seed reproduces a realization bit-for-bit on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SystemParams",
    "ChannelRealization",
    "rng_from_seed",
    "path_loss_db",
    "steering_vector",
    "rician_channel",
    "cascade",
    "generate",
    "sample_errors",
    "save_realization",
    "load_realization",
]


def rng_from_seed(seed, stream=0):
    """Philox generator keyed on (seed, stream); the package-wide RNG."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(stream) & (2**64 - 1)]))


@dataclass(frozen=True)
class SystemParams:
    """Scenario constants for one experiment cell."""

    n_antennas: int = 2
    n_elements: int = 24
    beta_t: float = 0.05
    beta_r: float = 0.05
    sigma2: float = 1e-11  # -80 dBm in watts
    rate: float = 1.5  # bit/s/Hz
    tau: float = 0.01
    pos_bs: tuple = (0.0, 0.0)
    pos_ris: tuple = (90.0, 0.0)
    pos_user: tuple = (90.0, 5.0)
    alpha_cascaded: float = 3.0
    alpha_direct: float = 4.0
    rician_k: float = 5.0
    delta_c: float = 0.01
    epsilon: float = 1e-6  # AO convergence tolerance
    cascade_pl_split: float = 1.0  # fraction of cascaded dB loss on BS->RIS

    def __post_init__(self):
        if not (0 <= self.beta_t < 1 and 0 <= self.beta_r < 1):
            raise ValueError("beta_t, beta_r must lie in [0, 1)")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if not 0 <= self.delta_c < 1:
            raise ValueError("delta_c must lie in [0, 1)")
        if self.rate <= 0 or self.sigma2 <= 0:
            raise ValueError("rate and sigma2 must be positive")
        if self.n_antennas < 1 or self.n_elements < 1:
            raise ValueError("n_antennas and n_elements must be >= 1")


@dataclass(frozen=True)
class ChannelRealization:
    """Estimated channels plus the CSI-error scales derived from them."""

    g_hat: np.ndarray  # direct BS->user, (N,)
    H_hat: np.ndarray  # BS->RIS, (L, N)
    h_hat: np.ndarray  # RIS->user, (L,)
    Q_hat: np.ndarray  # cascaded diag(h_hat^H) H_hat, (L, N)
    zeta_g: float
    zeta_q: float
    seed: int

    @property
    def n_antennas(self):
        return self.g_hat.size

    @property
    def n_elements(self):
        return self.h_hat.size

    def with_error_level(self, delta_c):
        """Same realization with the error scales recomputed for delta_c."""
        return replace(
            self,
            zeta_g=float(delta_c * np.linalg.norm(self.g_hat)),
            zeta_q=float(delta_c * np.linalg.norm(self.Q_hat)),
        )


def path_loss_db(distance, alpha):
    """Large-scale loss in dB at the given link distance (meters)."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return -30.0 - 10.0 * alpha * np.log10(distance)


def steering_vector(n, angle):
    """Half-wavelength ULA response, unit-modulus entries."""
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def rician_channel(rows, cols, k_factor, pl_db, rng):
    """Rician-faded (rows x cols) matrix with E||H||_F^2 = rows*cols*PL.

    The LoS part is an outer product of ULA steering vectors with angles
    drawn uniformly from [0, pi) once per call; the NLoS part is i.i.d.
    standard complex Gaussian.
    """
    if k_factor < 0:
        raise ValueError("Rician factor must be >= 0")
    theta, psi = rng.uniform(0.0, np.pi, size=2)
    los = np.outer(steering_vector(rows, theta), steering_vector(cols, psi).conj())
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    amp = np.sqrt(10.0 ** (pl_db / 10.0))
    w_los = np.sqrt(k_factor / (k_factor + 1.0))
    w_nlos = np.sqrt(1.0 / (k_factor + 1.0))
    return amp * (w_los * los + w_nlos * nlos)


def cascade(h, H):
    """Cascaded matrix diag(h^H) H; row l is conj(h_l) * H[l]."""
    h = np.asarray(h).ravel()
    H = np.asarray(H)
    if H.shape[0] != h.size:
        raise ValueError("h and H disagree on the number of RIS elements")
    return h.conj()[:, None] * H


def generate(params, seed):
    """Draw one estimated-channel realization, reproducible from seed."""
    rng = rng_from_seed(seed)
    d_direct = float(np.hypot(*(np.subtract(params.pos_user, params.pos_bs))))
    d_br = float(np.hypot(*(np.subtract(params.pos_ris, params.pos_bs))))
    d_ru = float(np.hypot(*(np.subtract(params.pos_user, params.pos_ris))))

    pl_casc = path_loss_db(d_br + d_ru, params.alpha_cascaded)
    g_hat = rician_channel(
        1, params.n_antennas, params.rician_k, path_loss_db(d_direct, params.alpha_direct), rng
    ).ravel()
    H_hat = rician_channel(
        params.n_elements, params.n_antennas, params.rician_k, params.cascade_pl_split * pl_casc, rng
    )
    h_hat = rician_channel(
        params.n_elements, 1, params.rician_k, (1.0 - params.cascade_pl_split) * pl_casc, rng
    ).ravel()
    Q_hat = cascade(h_hat, H_hat)

    return ChannelRealization(
        g_hat=g_hat,
        H_hat=H_hat,
        h_hat=h_hat,
        Q_hat=Q_hat,
        zeta_g=float(params.delta_c * np.linalg.norm(g_hat)),
        zeta_q=float(params.delta_c * np.linalg.norm(Q_hat)),
        seed=int(seed),
    )


def sample_errors(zeta_g, zeta_q, dims, rng, size=None):
    """CSI error draws: dg ~ CN(0, zeta_g^2 I_N), vec(dQ) ~ CN(0, zeta_q^2 I_LN).

    ``dims`` is (L, N).  With ``size`` set, returns batches of shape
    (size, N) and (size, L, N).
    """
    if zeta_g < 0 or zeta_q < 0:
        raise ValueError("error scales must be >= 0")
    L, N = dims
    shape_g = (N,) if size is None else (size, N)
    shape_q = (L, N) if size is None else (size, L, N)
    dg = zeta_g * (rng.standard_normal(shape_g) + 1j * rng.standard_normal(shape_g)) / np.sqrt(2.0)
    dq = zeta_q * (rng.standard_normal(shape_q) + 1j * rng.standard_normal(shape_q)) / np.sqrt(2.0)
    return dg, dq


def _encode(arr):
    arr = np.asarray(arr, dtype=complex)
    return {"shape": list(arr.shape), "data": [[float(z.real), float(z.imag)] for z in arr.ravel()]}


def _decode(obj):
    data = np.array([complex(re, im) for re, im in obj["data"]])
    return data.reshape(obj["shape"])


def save_realization(chan, path):
    """Structured-text export ([re, im] pairs) for cross-implementation tests."""
    doc = {
        "g_hat": _encode(chan.g_hat),
        "H_hat": _encode(chan.H_hat),
        "h_hat": _encode(chan.h_hat),
        "Q_hat": _encode(chan.Q_hat),
        "zeta_g": chan.zeta_g,
        "zeta_q": chan.zeta_q,
        "seed": chan.seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_realization(path):
    with open(path) as fh:
        doc = json.load(fh)
    return ChannelRealization(
        g_hat=_decode(doc["g_hat"]),
        H_hat=_decode(doc["H_hat"]),
        h_hat=_decode(doc["h_hat"]),
        Q_hat=_decode(doc["Q_hat"]),
        zeta_g=float(doc["zeta_g"]),
        zeta_q=float(doc["zeta_q"]),
        seed=int(doc["seed"]),
    )
