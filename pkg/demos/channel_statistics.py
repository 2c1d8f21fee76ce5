"""Scenario geometry, path loss, and Rician fading sanity checks.

Run:  python demos/channel_statistics.py
"""

import numpy as np

from risbeam import channel
from risbeam.channel import SystemParams

params = SystemParams()  # BS (0,0), RIS (90,0), user (90,5), N=2, L=24

d_direct = float(np.hypot(90.0, 5.0))
print(f"direct link {d_direct:.2f} m -> {channel.path_loss_db(d_direct, 4.0):.2f} dB")
print(f"cascaded link 95 m -> {channel.path_loss_db(95.0, 3.0):.2f} dB")

# empirical second moment of the Rician draw matches rows*cols*PL
rng = channel.rng_from_seed(0)
acc = 0.0
for _ in range(5000):
    h = channel.rician_channel(4, 2, params.rician_k, -20.0, rng)
    acc += np.linalg.norm(h) ** 2
print(f"E||H||_F^2 = {acc / 5000:.4e} (expect {8 * 10 ** (-2.0):.4e})")

chan = channel.generate(params, seed=1)
print(f"||g_hat||  = {np.linalg.norm(chan.g_hat):.3e}")
print(f"||Q_hat||F = {np.linalg.norm(chan.Q_hat):.3e}")
print(f"zeta_g = {chan.zeta_g:.3e}, zeta_q = {chan.zeta_q:.3e} (delta_c = {params.delta_c})")

# error draws reproduce the spherical covariance
rng = channel.rng_from_seed(2)
dg, dq = channel.sample_errors(chan.zeta_g, chan.zeta_q, (params.n_elements, params.n_antennas), rng, size=20000)
print(f"sample E||dg||^2 = {np.mean(np.sum(np.abs(dg) ** 2, axis=1)):.3e} "
      f"(expect {params.n_antennas * chan.zeta_g ** 2:.3e})")
print(f"sample var(dQ entries) = {np.mean(np.abs(dq) ** 2):.3e} (expect {chan.zeta_q ** 2:.3e})")
