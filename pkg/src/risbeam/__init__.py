"""Robust transmit design for an RIS-aided MISO downlink.

Minimizes base-station transmit power under a rate-outage chance constraint
with transceiver hardware impairments and Gaussian CSI error, alternating two
semidefinite subproblems, plus a Monte Carlo harness that verifies the outage
behaviour against non-robust baselines.
"""

from . import beamform, bti, channel, cli, conic, evaluate, model

__all__ = ["beamform", "bti", "channel", "cli", "conic", "evaluate", "model"]

__version__ = "0.1.0"
