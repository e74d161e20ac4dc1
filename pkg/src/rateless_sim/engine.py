"""Complete runs and parameter sweeps with online invariant checks."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import kernels
from .kernels import ACC_LEN, run_chunk
from .quadrature import MAX_NODES

CHUNK_SLOTS = 65536

STRATEGIES = {"nca": kernels.STRATEGY_NCA,
              "genie": kernels.STRATEGY_GENIE,
              "fixed_rate": kernels.STRATEGY_FIXED}

SWEEP_AXES = ("v", "l_av", "rho", "s_users")


@dataclass(frozen=True)
class ExperimentConfig:
    strategy: str = "nca"
    s_users: int = 3
    v: float = 1e5                    # utility weight; 1e4 * k at the default k
    l_av: float = 10.0                # target average block size, slots
    rho: float = 0.8                  # CSI accuracy
    k: float = 10.0                   # symbols per packet
    i_max: float = 8.0                # decode-rate cap, bits/symbol
    p_av: float = 10.0 ** 1.2         # 12 dB average SNR at unit channel power
    p_peak: float = 4.0 * 10.0 ** 1.2
    delta: float | None = None        # message-size step; default 0.05 * m_max
    eps_power: float | None = None    # power floor; default 1e-3 * p_peak
    eps_overhead: float = 0.0         # decoder reception overhead
    d_cap: float | None = None        # arrival cap; default i_max * k
    t_slots: int = 1_000_000
    warmup_fraction: float = 0.1
    seed: int = 1
    channel_mode: str = "ar1"
    ar_old_weight: float = 0.1
    rho1_encoding_fix: bool = False
    record_log: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.s_users < 1:
            raise ValueError("s_users must be >= 1")
        if self.v <= 0.0 or self.l_av < 1.0 or self.k <= 0.0 or self.i_max <= 0.0:
            raise ValueError("v, k, i_max must be positive and l_av >= 1")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0, 1]")
        if self.p_av <= 0.0 or self.p_av > self.p_peak:
            raise ValueError("need 0 < p_av <= p_peak")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must be in [0, 1)")
        if self.t_slots < 0:
            raise ValueError("t_slots must be non-negative")
        if self.channel_mode not in ("iid", "ar1"):
            raise ValueError("channel_mode must be 'iid' or 'ar1'")
        if not 0.0 <= self.ar_old_weight <= 1.0:
            raise ValueError("ar_old_weight must be in [0, 1]")
        if self.eps_overhead < 0.0:
            raise ValueError("eps_overhead must be non-negative")
        for name in ("delta", "eps_power", "d_cap"):
            val = getattr(self, name)
            if val is not None and val <= 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def m_max(self) -> float:
        return self.i_max * self.l_av * self.k

    @property
    def delta_eff(self) -> float:
        return self.delta if self.delta is not None else 0.05 * self.m_max

    @property
    def eps_power_eff(self) -> float:
        return self.eps_power if self.eps_power is not None else 1e-3 * self.p_peak

    @property
    def d_cap_eff(self) -> float:
        return self.d_cap if self.d_cap is not None else self.i_max * self.k

    @property
    def q_bound(self) -> float:
        """Hard per-slot encoder-queue bound b V / 2 with b = U'(0) = 1/k."""
        return 0.5 * self.v / self.k


@dataclass
class SlotLog:
    scheduled: np.ndarray
    power: np.ndarray
    acked: np.ndarray
    delivered: np.ndarray
    block: np.ndarray
    info_bits: np.ndarray
    success: np.ndarray
    admitted: np.ndarray


@dataclass
class MetricsReport:
    config: ExperimentConfig
    total_utility: float = 0.0
    per_user_throughput: tuple = ()     # admitted bits/slot (the utility argument)
    delivered_throughput: tuple = ()    # bits drained from the encoder queues
    spectral_efficiency_total: float = 0.0
    avg_power: float = 0.0
    avg_block_size: tuple = ()
    ack_fraction: float = 0.0
    sched_fraction: float = 0.0
    ack_count: int = 0
    sched_count: int = 0
    outage_count: int = 0
    max_queue: tuple = ()
    max_z: float = 0.0
    final_queues: tuple = ()
    final_w: tuple = ()
    final_z: float = 0.0
    violations_lemma3: int = 0
    violations_power: int = 0
    violations_negativity: int = 0
    failed: bool = False
    failure_slot: int = -1
    failure_snapshot: tuple = ()
    t_effective: int = 0
    axis: str = ""
    axis_value: float = math.nan
    slot_log: SlotLog | None = field(default=None, compare=False, repr=False)

    @property
    def violations_total(self) -> int:
        return (self.violations_lemma3 + self.violations_power
                + self.violations_negativity)


def run(config: ExperimentConfig) -> MetricsReport:
    """Simulate one configuration and aggregate post-warmup time averages.

    The queue bound q <= bV/2 is asserted every slot; a violation marks the
    run failed and records the slot and queue snapshot.  Block-size and
    ACK-fraction targets are reported as diagnostics, never as failures.
    """
    cfg = config
    s_users = cfg.s_users
    t_slots = cfg.t_slots
    warm = int(cfg.warmup_fraction * t_slots)
    rng = np.random.default_rng(cfg.seed)

    h_re = np.zeros(s_users)
    h_im = np.zeros(s_users)
    q = np.zeros(s_users)
    msz = np.full(s_users, 0.5 * cfg.m_max)
    rdec = (1.0 + cfg.eps_overhead) * msz
    pif = np.zeros(s_users, dtype=np.int64)
    wq = np.zeros(s_users)
    nidx = np.zeros(s_users, dtype=np.int64)
    rho1_fix = 1 if (cfg.rho1_encoding_fix and cfg.rho == 1.0
                     and cfg.strategy == "nca") else 0
    pending = np.full(s_users, rho1_fix, dtype=np.int64)
    zbox = np.zeros(1)

    acc = np.zeros(ACC_LEN)
    acc[kernels.ACC_FIRST_VIOL] = -1.0
    adm_sum = np.zeros(s_users)
    del_sum = np.zeros(s_users)
    blk_sum = np.zeros(s_users)
    blk_cnt = np.zeros(s_users, dtype=np.int64)
    ack_cnt = np.zeros(s_users, dtype=np.int64)
    max_q = np.zeros(s_users)
    viol_snapshot = np.zeros(s_users)

    u_buf = np.empty(MAX_NODES)
    w_buf = np.empty(MAX_NODES)
    wsuf_buf = np.empty(MAX_NODES + 1)
    xf = np.empty(MAX_NODES)
    xi = xf.view(np.int64)
    xbuf = np.empty(s_users)

    log_on = 1 if cfg.record_log else 0
    n_log = t_slots if cfg.record_log else 0
    log_sched = np.full(n_log, -1, dtype=np.int16)
    log_power = np.zeros(n_log)
    log_ack = np.full(n_log, -1, dtype=np.int16)
    log_deliv = np.zeros(n_log)
    log_block = np.zeros(n_log, dtype=np.int32)
    log_info = np.zeros(n_log)
    log_success = np.full(n_log, -1, dtype=np.int8)
    log_adm = np.zeros((n_log, s_users))

    strategy = STRATEGIES[cfg.strategy]
    ar_a = math.sqrt(cfg.ar_old_weight)
    ar_b = math.sqrt(1.0 - cfg.ar_old_weight)
    mode_ar1 = 1 if cfg.channel_mode == "ar1" else 0

    done = 0
    while done < t_slots:
        n = min(CHUNK_SLOTS, t_slots - done)
        innov = rng.standard_normal((n, 2, s_users, 2))
        run_chunk(strategy, done, n, warm,
                  innov, h_re, h_im,
                  s_users, cfg.rho, mode_ar1, ar_a, ar_b,
                  cfg.v, cfg.l_av, cfg.k, cfg.i_max, cfg.p_av, cfg.p_peak,
                  cfg.delta_eff, cfg.eps_power_eff, cfg.eps_overhead,
                  cfg.d_cap_eff, cfg.m_max,
                  rho1_fix, cfg.q_bound,
                  q, msz, rdec, pif, wq, nidx, pending, zbox,
                  acc, adm_sum, del_sum, blk_sum, blk_cnt, ack_cnt,
                  max_q, viol_snapshot,
                  u_buf, w_buf, wsuf_buf, xf, xi, xbuf,
                  log_on, log_sched, log_power, log_ack, log_deliv,
                  log_block, log_info, log_success, log_adm)
        done += n

    t_eff = t_slots - warm
    if t_eff > 0:
        xbar = adm_sum / t_eff
        delivered = del_sum / t_eff
        avg_power = acc[kernels.ACC_PSUM] / t_eff
        ack_fraction = acc[kernels.ACC_ACK_SLOTS] / t_eff
        sched_fraction = acc[kernels.ACC_SCHED_SLOTS] / t_eff
    else:
        xbar = np.zeros(s_users)
        delivered = np.zeros(s_users)
        avg_power = 0.0
        ack_fraction = 0.0
        sched_fraction = 0.0
    avg_block = np.where(blk_cnt > 0, blk_sum / np.maximum(blk_cnt, 1), 0.0)
    total_utility = float(np.sum(np.log1p(xbar / cfg.k)))
    n_viol = int(acc[kernels.ACC_VIOL_LEMMA3])

    log = None
    if cfg.record_log:
        log = SlotLog(scheduled=log_sched, power=log_power, acked=log_ack,
                      delivered=log_deliv, block=log_block, info_bits=log_info,
                      success=log_success, admitted=log_adm)

    return MetricsReport(
        config=cfg,
        total_utility=total_utility,
        per_user_throughput=tuple(float(x) for x in xbar),
        delivered_throughput=tuple(float(x) for x in delivered),
        spectral_efficiency_total=float(np.sum(xbar)) / cfg.k,
        avg_power=float(avg_power),
        avg_block_size=tuple(float(x) for x in avg_block),
        ack_fraction=float(ack_fraction),
        sched_fraction=float(sched_fraction),
        ack_count=int(acc[kernels.ACC_ACK_SLOTS]),
        sched_count=int(acc[kernels.ACC_SCHED_SLOTS]),
        outage_count=int(acc[kernels.ACC_OUTAGES]),
        max_queue=tuple(float(x) for x in max_q),
        max_z=float(acc[kernels.ACC_MAX_Z]),
        final_queues=tuple(float(x) for x in q),
        final_w=tuple(float(x) for x in wq),
        final_z=float(zbox[0]),
        violations_lemma3=n_viol,
        violations_power=int(acc[kernels.ACC_VIOL_POWER]),
        violations_negativity=int(acc[kernels.ACC_VIOL_NEG]),
        failed=n_viol > 0,
        failure_slot=int(acc[kernels.ACC_FIRST_VIOL]),
        failure_snapshot=tuple(float(x) for x in viol_snapshot) if n_viol else (),
        t_effective=t_eff,
        slot_log=log,
    )


def _run_for_sweep(args):
    cfg, axis, value = args
    report = run(cfg)
    report.axis = axis
    report.axis_value = value
    return report


def default_threads() -> int:
    env = os.environ.get("RATELESS_SIM_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(base: ExperimentConfig, axis: str, values, seeds,
          strategies=None, threads: int | None = None) -> list[MetricsReport]:
    """One run per (axis value, seed, strategy), merged in that order.

    Runs are independent and may execute in parallel processes; the result
    order never depends on completion order.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if strategies is None:
        strategies = [base.strategy]
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}")
    tasks = []
    for value in values:
        for seed in seeds:
            for strat in strategies:
                if axis == "s_users":
                    cfg = replace(base, s_users=int(value), seed=int(seed),
                                  strategy=strat)
                else:
                    cfg = replace(base, **{axis: float(value)}, seed=int(seed),
                                  strategy=strat)
                tasks.append((cfg, axis, value))
    n_workers = threads if threads is not None else default_threads()
    if n_workers <= 1 or len(tasks) <= 1:
        return [_run_for_sweep(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_run_for_sweep, tasks, chunksize=1))
