"""Reference strategies: genie (infinite-block-size) and fixed-rate coding.

Both reuse the drift-plus-penalty scheduling and rate-control skeleton.  The
genie serves the realized mutual information of every scheduled slot against
the encoder queue (coding as if the transmitter knew h, scheduling still on
hhat).  The fixed-rate strategy picks, per user and slot, the code rate
maximizing expected goodput R * Pr{I(h,P) K >= R | hhat} jointly with its
power, succeeds iff the realized channel clears the decode threshold, and
otherwise wastes the slot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .channel import ChannelDraw, ChannelParams, ComplexGain, ConditionalLaw, mutual_info
from .controller import LogUtility, NcaParams, SlotDecision, rate_control
from .quadrature import fixed_rate_scan
from .rateless import UserState, VirtualState, z_step


@dataclass
class FixedRateState:
    r_star: float = 0.0           # selected code rate, bits/packet
    outage_count: int = 0
    success_count: int = 0


def conditional_tail_exact(hhat_abs: float, rho: float, u_threshold: float) -> float:
    """Pr{|h|^2 >= u | hhat} from the noncentral chi-square law (oracle-grade)."""
    if u_threshold <= 0.0:
        return 1.0
    if rho >= 1.0:
        return 1.0 if hhat_abs * hhat_abs >= u_threshold else 0.0
    s2 = (1.0 - rho) / 2.0
    lam = rho * hhat_abs * hhat_abs / s2
    return float(stats.ncx2.sf(u_threshold / s2, 2, lam))


def fixed_rate_select(hhat: ComplexGain | float, p: float, rho: float,
                      k: float, i_max: float, grid_points: int = 2048) -> float:
    """Code rate maximizing R * Pr{I(h,P) k >= R | hhat} for the given power.

    Dense grid over R in [0, i_max*k] plus golden-ratio local refinement
    around the best grid cell; the goodput is generally not concave in R so
    no unimodal search is assumed beyond the refinement cell.
    """
    if p < 0.0:
        raise ValueError("power must be non-negative")
    hhat_abs = hhat.amplitude if isinstance(hhat, ComplexGain) else abs(float(hhat))
    if p == 0.0:
        return 0.0
    if rho >= 1.0:
        return mutual_info(hhat_abs, p, i_max) * k

    def goodput(rate):
        u_thr = (2.0 ** (rate / k) - 1.0) / p
        return rate * conditional_tail_exact(hhat_abs, rho, u_thr)

    rates = np.linspace(0.0, i_max * k, grid_points)
    u_thr = (np.exp2(rates / k) - 1.0) / p
    s2 = (1.0 - rho) / 2.0
    lam = rho * hhat_abs * hhat_abs / s2
    values = rates * stats.ncx2.sf(u_thr / s2, 2, lam)
    best = int(np.argmax(values))
    lo = rates[max(best - 1, 0)]
    hi = rates[min(best + 1, grid_points - 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    fc, fd = goodput(c), goodput(d)
    while hi - lo > 1e-9 * i_max * k:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - gr * (hi - lo)
            fc = goodput(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + gr * (hi - lo)
            fd = goodput(d)
    r_mid = 0.5 * (lo + hi)
    candidates = [(goodput(r), r) for r in (r_mid, rates[best])]
    return max(candidates)[1]


def _fixed_rate_decision(u: UserState, z: float, law: ConditionalLaw,
                         params: NcaParams) -> tuple[float, float, float, float]:
    """(weight, power, rate, threshold) of the best threshold/power pair."""
    return fixed_rate_scan(law.u, law.w, law.wsuf, law.n, u.q, z,
                           params.k, params.p_peak, params.i_max)


def fixed_rate_slot(users: list[UserState], fstates: list[FixedRateState],
                    virt: VirtualState, draw: ChannelDraw, params: NcaParams,
                    channel_params: ChannelParams, utility=None,
                    ) -> tuple[SlotDecision, list[UserState], list[FixedRateState], VirtualState, bool]:
    """One slot of the fixed-rate strategy; returns success flag of the slot."""
    if utility is None:
        utility = LogUtility(params.k)
    xs = tuple(rate_control(u.q, params, utility, u.d_cap) for u in users)
    best_user, best_w, best_p, best_r, best_v = -1, 0.0, 0.0, 0.0, 0.0
    for idx, u in enumerate(users):
        law = ConditionalLaw(draw.estimated_gains[idx], channel_params.csi_accuracy,
                             params.p_peak, params.i_max)
        wt, p, rate, thr = _fixed_rate_decision(u, virt.z, law, params)
        if wt > best_w:
            best_user, best_w, best_p, best_r, best_v = idx, wt, p, rate, thr
    users = list(users)
    fstates = list(fstates)
    success = False
    if best_user >= 0 and best_p >= params.eps_power:
        decision = SlotDecision(scheduled_user=best_user, power=best_p, admitted=xs)
        s = best_user
        fstates[s] = replace(fstates[s], r_star=best_r)
        realized = draw.true_gains[s].power
        if realized >= best_v:
            q = users[s].q - best_r
            users[s] = replace(users[s], q=q if q > 0.0 else 0.0)
            fstates[s] = replace(fstates[s], success_count=fstates[s].success_count + 1)
            success = True
        else:
            fstates[s] = replace(fstates[s], outage_count=fstates[s].outage_count + 1)
    else:
        decision = SlotDecision(scheduled_user=None, power=0.0, admitted=xs)
    for idx in range(len(users)):
        users[idx] = replace(users[idx], q=users[idx].q + xs[idx])
    virt = z_step(virt, decision.power, params.p_av)
    return decision, users, fstates, virt, success


def genie_slot(users: list[UserState], virt: VirtualState, draw: ChannelDraw,
               params: NcaParams, channel_params: ChannelParams, utility=None,
               ) -> tuple[SlotDecision, list[UserState], VirtualState, float]:
    """One slot of the genie strategy; returns the bits drained from the queue."""
    if utility is None:
        utility = LogUtility(params.k)
    xs = tuple(rate_control(u.q, params, utility, u.d_cap) for u in users)
    best_user, best_value, best_p = -1, -math.inf, 0.0
    for idx, u in enumerate(users):
        law = ConditionalLaw(draw.estimated_gains[idx], channel_params.csi_accuracy,
                             params.p_peak, params.i_max)
        p = law.best_power(u.q, virt.z, params.k)
        value = u.q * params.k * law.expected_mi(p) - virt.z * p
        if value > best_value:
            best_user, best_value, best_p = idx, value, p
    users = list(users)
    drained = 0.0
    if best_user >= 0 and best_p >= params.eps_power:
        decision = SlotDecision(scheduled_user=best_user, power=best_p, admitted=xs)
        s = best_user
        service = mutual_info(draw.true_gains[s], best_p, params.i_max) * params.k
        q = users[s].q
        drained = q if q < service else service
        q -= service
        users[s] = replace(users[s], q=q if q > 0.0 else 0.0, n=users[s].n + 1)
    else:
        decision = SlotDecision(scheduled_user=None, power=0.0, admitted=xs)
    for idx in range(len(users)):
        users[idx] = replace(users[idx], q=users[idx].q + xs[idx])
    virt = z_step(virt, decision.power, params.p_av)
    return decision, users, virt, drained
