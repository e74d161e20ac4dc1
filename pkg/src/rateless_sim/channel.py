"""Fading channel, imperfect CSI, and mutual-information evaluation.

The channel model is unit-power Rayleigh fading, either i.i.d. across slots
or the first-order autoregressive process

    h[t+1] = sqrt(w_old) h[t] + sqrt(w_new) n[t],   w_old + w_new = 1,

with circular-symmetric unit-variance complex Gaussian innovations.  The
transmitter sees the estimate

    hhat[t] = sqrt(rho) h[t] + sqrt(1-rho) nhat[t],

so conditionally on hhat the true gain is CN(sqrt(rho) hhat, 1-rho) and the
channel power |h|^2 follows a noncentral (Rician-power) law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .quadrature import MAX_NODES


@dataclass(frozen=True)
class ComplexGain:
    re: float
    im: float

    @property
    def power(self) -> float:
        return self.re * self.re + self.im * self.im

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.power)


@dataclass(frozen=True)
class ChannelDraw:
    true_gains: tuple[ComplexGain, ...]
    estimated_gains: tuple[ComplexGain, ...]
    slot_index: int


@dataclass(frozen=True)
class ChannelParams:
    csi_accuracy: float = 0.8
    mode: str = "ar1"
    ar_old_weight: float = 0.1
    ar_innovation_weight: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.csi_accuracy <= 1.0:
            raise ValueError(f"csi_accuracy must be in [0, 1], got {self.csi_accuracy}")
        if self.mode not in ("iid", "ar1"):
            raise ValueError(f"mode must be 'iid' or 'ar1', got {self.mode!r}")
        if not 0.0 <= self.ar_old_weight <= 1.0:
            raise ValueError("ar_old_weight must be in [0, 1]")
        if abs(self.ar_old_weight + self.ar_innovation_weight - 1.0) > 1e-12:
            raise ValueError("AR weights must sum to 1 (unit steady-state power)")


def _unit_cn(rng: np.random.Generator, s_users: int) -> np.ndarray:
    """(s_users, 2) array of re/im parts of CN(0,1) draws."""
    return rng.standard_normal((s_users, 2)) / math.sqrt(2.0)


def step_channel(prev: ChannelDraw | None, params: ChannelParams,
                 rng: np.random.Generator, s_users: int | None = None) -> ChannelDraw:
    """Advance the channel one slot and draw the CSI observation.

    Draw order per slot is fixed (true-gain innovations for all users, then
    CSI noise for all users) so that batched generation in the run kernels
    consumes the identical random stream.
    """
    if prev is None:
        if s_users is None:
            raise ValueError("s_users required for the first draw")
        innov = _unit_cn(rng, s_users)
        h = innov  # stationary start
        idx = 0
    else:
        s_users = len(prev.true_gains)
        innov = _unit_cn(rng, s_users)
        if params.mode == "ar1":
            a = math.sqrt(params.ar_old_weight)
            b = math.sqrt(params.ar_innovation_weight)
            h = np.array([[a * g.re, a * g.im] for g in prev.true_gains]) + b * innov
        else:
            h = innov
        idx = prev.slot_index + 1
    rho = params.csi_accuracy
    noise = _unit_cn(rng, s_users)
    hhat = math.sqrt(rho) * h + math.sqrt(1.0 - rho) * noise
    return ChannelDraw(
        true_gains=tuple(ComplexGain(row[0], row[1]) for row in h),
        estimated_gains=tuple(ComplexGain(row[0], row[1]) for row in hhat),
        slot_index=idx,
    )


def mutual_info(h: ComplexGain | float, p: float, i_max: float = 8.0) -> float:
    """Decode rate min(log2(1 + |h|^2 P), i_max) in bits/symbol."""
    if p < 0.0:
        raise ValueError(f"power must be non-negative, got {p}")
    habs2 = h.power if isinstance(h, ComplexGain) else float(h) ** 2
    return quadrature.mutual_info_scalar(habs2, p, i_max)


class ConditionalLaw:
    """Quadrature nodes for |h|^2 given one CSI observation.

    Builds the fixed node set once; repeated evaluations at different powers
    (as in the golden-section power search) reuse it.
    """

    def __init__(self, hhat: ComplexGain | float, rho: float,
                 p_peak: float, i_max: float):
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {rho}")
        u_hat = hhat.power if isinstance(hhat, ComplexGain) else float(hhat) ** 2
        self.i_max = float(i_max)
        self.p_peak = float(p_peak)
        self.u = np.empty(MAX_NODES)
        self.w = np.empty(MAX_NODES)
        self.wsuf = np.empty(MAX_NODES + 1)
        self.n = quadrature.build_nodes(u_hat, rho, p_peak, i_max, self.u, self.w, self.wsuf)
        self._xf = np.empty(MAX_NODES)
        self._xi = self._xf.view(np.int64)

    def expected_mi(self, p: float) -> float:
        if p < 0.0:
            raise ValueError(f"power must be non-negative, got {p}")
        return quadrature.expected_mi(self.u, self.w, self.wsuf, self.n,
                                      p, self.i_max, self._xf, self._xi)

    def tail(self, u_threshold: float) -> float:
        """Pr{|h|^2 >= u_threshold} on the discretized law (panel-exact at nodes)."""
        k = int(np.searchsorted(self.u[:self.n], u_threshold, side="left"))
        return float(self.wsuf[k])

    def best_power(self, q: float, z: float, k_symbols: float) -> float:
        return quadrature.power_search(self.u, self.w, self.wsuf, self.n,
                                       q * k_symbols, z, self.p_peak, self.i_max,
                                       self._xf, self._xi)


def expected_mutual_info(hhat: ComplexGain | float, p: float, rho: float,
                         i_max: float = 8.0, p_peak: float | None = None) -> float:
    """E{ min(log2(1+|h|^2 P), i_max) | hhat } under the conditional law.

    Deterministic fixed-node quadrature; equals mutual_info(hhat, p) at
    rho=1 and 0 at P=0.  p_peak only shapes the node layout and defaults to
    max(4*P, 1); pass the configured peak when evaluating many powers.
    """
    if p_peak is None:
        p_peak = max(4.0 * p, 1.0)
    return ConditionalLaw(hhat, rho, p_peak, i_max).expected_mi(p)
