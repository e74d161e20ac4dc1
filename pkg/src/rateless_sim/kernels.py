"""Array-based run loop: the hot kernel behind engine.run.

One chunk call advances the simulation over a block of slots, consuming
pre-generated Gaussian innovations (so the random stream is identical on the
numba and numpy backends) and mutating the state and accumulator arrays in
place.  The per-slot logic mirrors the reference implementations in
controller.py / baselines.py operation for operation; tests pin the two
paths against each other on short runs.

Strategy codes: 0 = rateless control, 1 = genie, 2 = fixed-rate.
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import maybe_jit
from .quadrature import (build_nodes, expected_mi, fixed_rate_scan,
                         mutual_info_scalar, power_search)

SQRT2 = math.sqrt(2.0)

STRATEGY_NCA = 0
STRATEGY_GENIE = 1
STRATEGY_FIXED = 2

# acc vector layout
ACC_PSUM = 0
ACC_ACK_SLOTS = 1
ACC_SCHED_SLOTS = 2
ACC_MAX_Z = 3
ACC_VIOL_LEMMA3 = 4
ACC_VIOL_POWER = 5
ACC_VIOL_NEG = 6
ACC_FIRST_VIOL = 7
ACC_OUTAGES = 8
ACC_LEN = 9


@maybe_jit(fastmath=False)
def rate_control_log(q, v, k, d_cap):
    """Closed-form argmax of V ln(1+x/k) - x^2 - 2qx on [0, d_cap].

    Clamped to V/(2k) - q (never binding in exact arithmetic) so the
    queue bound q <= V/(2k) survives float rounding.
    """
    c = 2.0 * q * k - v
    if c >= 0.0:
        return 0.0
    b = 2.0 * (k + q)
    x = -2.0 * c / (b + math.sqrt(b * b - 8.0 * c))
    cap = 0.5 * v / k - q
    if x > cap:
        x = cap
    if x > d_cap:
        x = d_cap
    return x if x > 0.0 else 0.0


@maybe_jit(fastmath=False)
def run_chunk(strategy, t0, n_slots, warm_start,
              innov, h_re, h_im,
              s_users, rho, mode_ar1, ar_a, ar_b,
              v, l_av, k, i_max, p_av, p_peak,
              delta, eps_power, eps_overhead, d_cap, m_max,
              rho1_fix, q_bound,
              q, msz, rdec, pif, wq, nidx, pending, zbox,
              acc, adm_sum, del_sum, blk_sum, blk_cnt, ack_cnt,
              max_q, viol_snapshot,
              u_buf, w_buf, wsuf_buf, xf, xi, xbuf,
              log_on, log_sched, log_power, log_ack, log_deliv,
              log_block, log_info, log_success, log_adm):
    """Advance n_slots slots starting at global slot t0.  Mutates state in place."""
    sqrt_rho = math.sqrt(rho)
    sqrt_1mrho = math.sqrt(1.0 - rho)
    z = zbox[0]
    for t in range(n_slots):
        g = t0 + t
        # --- channel step: AR(1) or iid true gains, then the CSI mix ---
        for s in range(s_users):
            ire = innov[t, 0, s, 0] / SQRT2
            iim = innov[t, 0, s, 1] / SQRT2
            if g == 0 or mode_ar1 == 0:
                h_re[s] = ire
                h_im[s] = iim
            else:
                h_re[s] = ar_a * h_re[s] + ar_b * ire
                h_im[s] = ar_a * h_im[s] + ar_b * iim
        # --- rate control (pre-update backlog) ---
        for s in range(s_users):
            xbuf[s] = rate_control_log(q[s], v, k, d_cap)
        # --- per-user candidate decisions and the schedule argmax ---
        best_user = -1
        best_value = -1e300
        best_power = 0.0
        best_rate = 0.0
        best_thr = 0.0
        for s in range(s_users):
            hh_re = sqrt_rho * h_re[s] + sqrt_1mrho * (innov[t, 1, s, 0] / SQRT2)
            hh_im = sqrt_rho * h_im[s] + sqrt_1mrho * (innov[t, 1, s, 1] / SQRT2)
            n_nodes = build_nodes(hh_re * hh_re + hh_im * hh_im, rho,
                                  p_peak, i_max, u_buf, w_buf, wsuf_buf)
            if strategy == STRATEGY_FIXED:
                wt, p, rate, thr = fixed_rate_scan(u_buf, w_buf, wsuf_buf, n_nodes,
                                                   q[s], z, k, p_peak, i_max)
                if wt > best_value:
                    best_value = wt
                    best_user = s
                    best_power = p
                    best_rate = rate
                    best_thr = thr
            else:
                p = power_search(u_buf, w_buf, wsuf_buf, n_nodes,
                                 q[s] * k, z, p_peak, i_max, xf, xi)
                value = q[s] * k * expected_mi(u_buf, w_buf, wsuf_buf, n_nodes,
                                               p, i_max, xf, xi) - z * p
                if value > best_value:
                    best_value = value
                    best_user = s
                    best_power = p
        if best_user < 0 or best_power < eps_power:
            best_user = -1
            best_power = 0.0
        # --- transmission outcome against the true gain ---
        acked = -1
        delivered = 0.0
        block = 0
        info = 0.0
        success = -1
        if best_user >= 0:
            s = best_user
            habs2 = h_re[s] * h_re[s] + h_im[s] * h_im[s]
            info = mutual_info_scalar(habs2, best_power, i_max) * k
            if strategy == STRATEGY_NCA:
                if rho1_fix == 1 and pending[s] == 1:
                    msz[s] = info
                    rdec[s] = (1.0 + eps_overhead) * info
                    pending[s] = 0
                if rdec[s] > info:
                    rdec[s] -= info
                    pif[s] += 1
                else:
                    block = pif[s] + 1
                    acked = s
                    delivered = msz[s]
                    nidx[s] += 1
                    pif[s] = 0
                    wq[s] += block - l_av
                    if rho1_fix == 1:
                        pending[s] = 1
                        msz[s] = 0.0
                        rdec[s] = 0.0
                    else:
                        if wq[s] >= 0.0:
                            m2 = msz[s] - delta
                            if m2 < 0.0:
                                m2 = 0.0
                        else:
                            m2 = msz[s] + delta
                            if m2 > m_max:
                                m2 = m_max
                        msz[s] = m2
                        rdec[s] = (1.0 + eps_overhead) * m2
            elif strategy == STRATEGY_GENIE:
                acked = s
                delivered = info
                block = 1
                nidx[s] += 1
            else:  # fixed-rate
                block = 1
                if habs2 >= best_thr:
                    acked = s
                    delivered = best_rate
                    success = 1
                    nidx[s] += 1
                else:
                    success = 0
        # --- encoder queues and the power virtual queue ---
        for s in range(s_users):
            qs = q[s]
            if s == acked:
                drain = delivered if delivered < qs else qs
                if g >= warm_start:
                    del_sum[s] += drain
                qs -= delivered
                if qs < 0.0:
                    qs = 0.0
            q[s] = qs + xbuf[s]
        zp = z - p_av
        if zp < 0.0:
            zp = 0.0
        z = zp + best_power
        # --- invariants ---
        for s in range(s_users):
            if q[s] > q_bound * (1.0 + 1e-12):
                acc[ACC_VIOL_LEMMA3] += 1.0
                if acc[ACC_FIRST_VIOL] < 0.0:
                    acc[ACC_FIRST_VIOL] = g
                    for ss in range(s_users):
                        viol_snapshot[ss] = q[ss]
            if q[s] < 0.0:
                acc[ACC_VIOL_NEG] += 1.0
            if q[s] > max_q[s]:
                max_q[s] = q[s]
        if z < 0.0:
            acc[ACC_VIOL_NEG] += 1.0
        if z > acc[ACC_MAX_Z]:
            acc[ACC_MAX_Z] = z
        if best_power != 0.0 and (best_power < eps_power * (1.0 - 1e-12)
                                  or best_power > p_peak * (1.0 + 1e-12)):
            acc[ACC_VIOL_POWER] += 1.0
        # --- accumulators over the post-warmup window ---
        if g >= warm_start:
            acc[ACC_PSUM] += best_power
            if best_user >= 0:
                acc[ACC_SCHED_SLOTS] += 1.0
            if acked >= 0:
                acc[ACC_ACK_SLOTS] += 1.0
                ack_cnt[acked] += 1
            if success == 0:
                acc[ACC_OUTAGES] += 1.0
            if strategy == STRATEGY_NCA:
                if acked >= 0:
                    blk_sum[acked] += block
                    blk_cnt[acked] += 1
            elif best_user >= 0:
                blk_sum[best_user] += 1.0
                blk_cnt[best_user] += 1
            for s in range(s_users):
                adm_sum[s] += xbuf[s]
        # --- slot log ---
        if log_on == 1:
            log_sched[g] = best_user
            log_power[g] = best_power
            log_ack[g] = acked
            log_deliv[g] = delivered
            log_block[g] = block
            log_info[g] = info
            log_success[g] = success
            for s in range(s_users):
                log_adm[g, s] = xbuf[s]
    zbox[0] = z
