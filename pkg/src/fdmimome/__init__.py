"""Secrecy-rate simulator for a full-duplex MIMOME network.

Exact and asymptotic rates, jamming power optimization, tolerable-antenna
metrics, two-phase channel-estimation bounds, and Eve-side blind detection,
plus a CSV experiment harness (``fdmimome`` on the command line).
"""

from .asymptotics import (
    DiagonalSpectrum,
    EtaSolution,
    asymptotic_rate_bob,
    asymptotic_rate_eve_equal_power,
    asymptotic_rate_eve_general,
    limit_rate_eve,
    omega,
    shannon_transform,
    solve_eta,
)
from .channel import (
    ChannelRealization,
    ErgodicResult,
    EvePosition,
    NetworkConfig,
    PowerAllocation,
    ergodic_secrecy_mc,
    exact_rate_bob,
    exact_rate_eve,
    path_loss,
    sample_channels,
    secrecy_rate,
    worst_case_eve_position,
)
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
