"""The per-slot network control rules.

Four decisions each slot: admitted arrivals (rate control), transmit power
per candidate user, the scheduled user, and on each ACK the size of the next
rateless code.  All rules are greedy drift-plus-penalty choices driven by
the encoder queues and the two virtual queues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelDraw, ChannelParams, ComplexGain, ConditionalLaw, mutual_info
from .kernels import rate_control_log
from .rateless import (AckOutcome, NO_ACK, UserState, VirtualState,
                       decoder_step, encoder_step, reset_code, w_step, z_step)


@dataclass(frozen=True)
class NcaParams:
    v: float                      # utility weight
    l_av: float                   # target average block size, slots
    k: float                      # symbols per packet
    i_max: float = 8.0
    p_av: float = 10.0 ** 1.2
    p_peak: float = 4.0 * 10.0 ** 1.2
    delta: float | None = None    # message-size step, bits
    eps_power: float | None = None
    eps_overhead: float = 0.0
    d_cap: float | None = None

    def __post_init__(self):
        if self.v <= 0.0 or self.l_av < 1.0 or self.k <= 0.0 or self.i_max <= 0.0:
            raise ValueError("v, k, i_max must be positive and l_av >= 1")
        if self.p_av <= 0.0 or self.p_peak < self.p_av:
            raise ValueError("need 0 < p_av <= p_peak")
        if self.delta is None:
            object.__setattr__(self, "delta", 0.05 * self.m_max)
        if self.eps_power is None:
            object.__setattr__(self, "eps_power", 1e-3 * self.p_peak)
        if self.d_cap is None:
            object.__setattr__(self, "d_cap", self.i_max * self.k)
        if self.delta <= 0.0 or self.eps_power <= 0.0 or self.d_cap <= 0.0:
            raise ValueError("delta, eps_power, d_cap must be positive")
        if self.eps_overhead < 0.0:
            raise ValueError("eps_overhead must be non-negative")

    @property
    def m_max(self) -> float:
        return self.i_max * self.l_av * self.k


@dataclass(frozen=True)
class SlotDecision:
    scheduled_user: int | None
    power: float
    admitted: tuple[float, ...]


class LogUtility:
    """U(x) = ln(1 + x/k); U'(0) = 1/k."""

    def __init__(self, k: float):
        if k <= 0.0:
            raise ValueError("k must be positive")
        self.k = k
        self.b = 1.0 / k

    def value(self, x: float) -> float:
        return math.log1p(x / self.k)

    def derivative(self, x: float) -> float:
        return 1.0 / (self.k + x)


class LinearUtility:
    """U(x) = b*x."""

    def __init__(self, b: float):
        if b <= 0.0:
            raise ValueError("slope must be positive")
        self.b = b

    def value(self, x: float) -> float:
        return self.b * x

    def derivative(self, x: float) -> float:
        return self.b


def encoding_control(w: float, m: float, params: NcaParams) -> float:
    """Next message size: shrink by delta while w >= 0, else grow, clamped."""
    if w >= 0.0:
        m2 = m - params.delta
        return m2 if m2 > 0.0 else 0.0
    m2 = m + params.delta
    return m2 if m2 < params.m_max else params.m_max


def rate_control(q: float, params: NcaParams, utility, d_cap: float | None = None) -> float:
    """argmax over x in [0, d_cap] of V U(x) - x^2 - 2 q x.

    Linear utility: min{(bV/2 - q)^+, d_cap}.  Log utility: closed-form
    quadratic root.  Other concave utilities: bisection on the stationary
    condition V U'(x) = 2x + 2q to 1e-9 relative tolerance.
    """
    if q < 0.0:
        raise ValueError("q must be non-negative")
    d = params.d_cap if d_cap is None else d_cap
    if isinstance(utility, LinearUtility):
        x = 0.5 * utility.b * params.v - q
        if x < 0.0:
            return 0.0
        return min(x, d)
    if isinstance(utility, LogUtility):
        return rate_control_log(q, params.v, utility.k, d)
    # generic concave utility: V U'(x) - 2x - 2q is decreasing in x
    g0 = params.v * utility.derivative(0.0) - 2.0 * q
    if g0 <= 0.0:
        return 0.0
    gd = params.v * utility.derivative(d) - 2.0 * d - 2.0 * q
    if gd >= 0.0:
        return d
    lo, hi = 0.0, d
    while hi - lo > 1e-9 * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if params.v * utility.derivative(mid) - 2.0 * mid - 2.0 * q >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def power_for_user(q: float, z: float, hhat: ComplexGain | float,
                   params: NcaParams, channel_params: ChannelParams,
                   law: ConditionalLaw | None = None) -> float:
    """argmax over P in [0, P_peak] of q K E{I(h,P)|hhat} - z P."""
    if q < 0.0 or z < 0.0:
        raise ValueError("q and z must be non-negative")
    if law is None:
        law = ConditionalLaw(hhat, channel_params.csi_accuracy,
                             params.p_peak, params.i_max)
    return law.best_power(q, z, params.k)


def schedule(users: list[UserState], virt: VirtualState,
             estimated_gains: tuple[ComplexGain, ...],
             params: NcaParams, channel_params: ChannelParams,
             admitted: tuple[float, ...] | None = None) -> SlotDecision:
    """Pick the user maximizing q K E{I|hhat} - z P at its own best power.

    Below the power floor nothing is scheduled.  Ties go to the lowest user
    index (strict-greater scan).
    """
    best_user = -1
    best_value = -math.inf
    best_power = 0.0
    for idx, u in enumerate(users):
        law = ConditionalLaw(estimated_gains[idx], channel_params.csi_accuracy,
                             params.p_peak, params.i_max)
        p = law.best_power(u.q, virt.z, params.k)
        value = u.q * params.k * law.expected_mi(p) - virt.z * p
        if value > best_value:
            best_value = value
            best_user = idx
            best_power = p
    if best_user < 0 or best_power < params.eps_power:
        return SlotDecision(scheduled_user=None, power=0.0,
                            admitted=admitted or tuple(0.0 for _ in users))
    return SlotDecision(scheduled_user=best_user, power=best_power,
                        admitted=admitted or tuple(0.0 for _ in users))


def genie_ack_override(params: NcaParams, true_gain: ComplexGain,
                       power: float) -> float:
    """Bits delivered by a one-slot code under genie coding: I(h, P) * K."""
    return mutual_info(true_gain, power, params.i_max) * params.k


def nca_slot(users: list[UserState], virt: VirtualState, draw: ChannelDraw,
             params: NcaParams, channel_params: ChannelParams,
             utility=None) -> tuple[SlotDecision, list[UserState], VirtualState, AckOutcome]:
    """One full control slot: rate control, scheduling, transmission, queues.

    Decisions use the estimated gains; the transmission outcome uses the true
    gain.  On an ACK the block-size queue is updated first, then the next
    message size is chosen and the decoder reset.
    """
    if utility is None:
        utility = LogUtility(params.k)
    xs = tuple(rate_control(u.q, params, utility, u.d_cap) for u in users)
    decision = schedule(users, virt, draw.estimated_gains, params,
                        channel_params, admitted=xs)
    users = list(users)
    ack = NO_ACK
    if decision.scheduled_user is not None:
        sidx = decision.scheduled_user
        info = mutual_info(draw.true_gains[sidx], decision.power,
                           params.i_max) * params.k
        users[sidx], ack = decoder_step(users[sidx], True, info, user_id=sidx)
        if ack.acked_user is not None:
            users[sidx] = w_step(users[sidx], ack.recorded_block_size, params.l_av)
            m_next = encoding_control(users[sidx].w, users[sidx].m, params)
            users[sidx] = reset_code(users[sidx], m_next, params.eps_overhead)
    for idx in range(len(users)):
        users[idx] = encoder_step(users[idx], ack, xs[idx], user_id=idx)
    virt = z_step(virt, decision.power, params.p_av)
    return decision, users, virt, ack
