"""Independent verification: Monte Carlo outage estimation and baselines.

The outage event is a deterministic function of the CSI error draw; hardware
impairments enter through the population-mean noise power, so each Monte
Carlo sample perturbs only the channels.  Baselines rerun the same AO
designer with the corresponding robustness terms zeroed at design time only;
evaluation always uses the true model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .beamform import alternating_optimize
from .channel import rng_from_seed, sample_errors

__all__ = ["OutageEstimate", "estimate_outage", "design_baseline", "BASELINE_KINDS"]

BASELINE_KINDS = ("NonrobustCSI", "NonrobustHWI", "NonrobustBoth", "PerfectRef")


@dataclass(frozen=True)
class OutageEstimate:
    """Binomial outage estimate with a normal-approximation 95% interval."""

    n_samples: int
    n_violations: int
    p_hat: float
    ci_halfwidth: float
    seed: int


def estimate_outage(design, chan, params, n_samples, seed):
    """Empirical probability that the achieved rate falls below the target.

    Draws (dg, dQ) error batches, forms the true channels, and counts rate
    violations under the rate threshold; deterministic for a given seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = rng_from_seed(seed, stream=4)
    L, N = chan.n_elements, chan.n_antennas
    dg, dq = sample_errors(chan.zeta_g, chan.zeta_q, (L, N), rng, size=n_samples)

    v = design.beamformer
    e = design.phases
    c = (chan.g_hat + dg) + np.einsum("sln,l->sn", np.conj(chan.Q_hat + dq), e)  # c_s = g + Q^H e

    num = np.abs(np.einsum("sn,n->s", c.conj(), v)) ** 2
    denom = (
        params.beta_r * num
        + (1.0 + params.beta_r) * params.beta_t * np.einsum("sn,n->s", np.abs(c) ** 2, np.abs(v) ** 2)
        + (1.0 + params.beta_r) * params.sigma2
    )
    gamma = num / denom
    rate = np.log2(1.0 + gamma)
    n_violations = int(np.sum(rate < params.rate))
    p_hat = n_violations / n_samples
    return OutageEstimate(
        n_samples=int(n_samples),
        n_violations=n_violations,
        p_hat=float(p_hat),
        ci_halfwidth=float(1.96 * np.sqrt(p_hat * (1.0 - p_hat) / n_samples)),
        seed=int(seed),
    )


def design_baseline(kind, chan, params, seed, **kwargs):
    """Run the AO designer with the scheme's robustness terms zeroed.

    NonrobustCSI ignores CSI error at design time (error scales zeroed),
    NonrobustHWI ignores hardware impairments (betas zeroed), NonrobustBoth
    ignores both, and PerfectRef is the ideal-hardware perfect-CSI reference.
    The returned design must be evaluated under the true model by the caller
    (PerfectRef under the ideal model).
    """
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline kind {kind!r}")
    design_chan, design_params = chan, params
    if kind in ("NonrobustCSI", "NonrobustBoth", "PerfectRef"):
        design_chan = replace(chan, zeta_g=0.0, zeta_q=0.0)
    if kind in ("NonrobustHWI", "NonrobustBoth", "PerfectRef"):
        design_params = replace(params, beta_t=0.0, beta_r=0.0)
    return alternating_optimize(design_chan, design_params, seed, **kwargs)
