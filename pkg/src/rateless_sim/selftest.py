"""Brute-force oracle suites behind the `selftest` CLI command.

Each suite checks a production decision rule against an independent
reference: exhaustive grid maximization for the three argmax rules, and a
Monte-Carlo estimate of the conditional mutual information for the
quadrature.  All randomness is seeded so a selftest run is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .baselines import conditional_tail_exact, fixed_rate_select
from .channel import ComplexGain, ConditionalLaw
from .controller import LinearUtility, LogUtility, NcaParams, rate_control

P_AV = 10.0 ** 1.2
P_PEAK = 4.0 * P_AV
I_MAX = 8.0


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: worst {self.worst:.3e} "
                f"(tolerance {self.tolerance:.3e}) {self.detail}")


def rate_control_suite(n_instances: int = 1000, grid: int = 1_000_000,
                       seed: int = 20_240_101) -> SuiteResult:
    """rate_control argmax vs a dense grid; argument error <= 1e-3 * d_cap."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    d_cap = 800.0
    xs = np.linspace(0.0, d_cap, grid)
    for i in range(n_instances):
        k = float(rng.uniform(10.0, 500.0))
        v = float(rng.uniform(1e2, 1e5)) * k
        params = NcaParams(v=v, l_av=10.0, k=k, d_cap=d_cap)
        if i % 2 == 0:
            utility = LogUtility(k)
            q = float(rng.uniform(0.0, 1.2 * params.v / (2.0 * k)))
            obj = v * np.log1p(xs / k) - xs * xs - 2.0 * q * xs
        else:
            b = float(rng.uniform(0.1, 5.0))
            utility = LinearUtility(b)
            q = float(rng.uniform(0.0, 1.2 * b * v / 2.0))
            obj = v * b * xs - xs * xs - 2.0 * q * xs
        x_hat = rate_control(q, params, utility)
        x_grid = float(xs[int(np.argmax(obj))])
        worst = max(worst, abs(x_hat - x_grid))
    tol = 1e-3 * d_cap
    return SuiteResult("rate_control vs grid", worst <= tol, worst, tol,
                       f"({n_instances} instances, {grid}-point grid)")


def power_search_suite(n_instances: int = 1000, grid: int = 10_000,
                       seed: int = 20_240_102) -> SuiteResult:
    """power_for_user objective vs grid max; <= 1e-6 relative objective error."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    ps = np.linspace(0.0, P_PEAK, grid)
    params = NcaParams(v=1e6, l_av=10.0, k=100.0)
    for _ in range(n_instances):
        rho = float(rng.uniform(0.0, 1.0))
        hh = ComplexGain(*(rng.standard_normal(2) / math.sqrt(2.0)))
        q = float(rng.uniform(0.0, 5000.0))
        z = float(rng.uniform(0.0, 5e4))
        law = ConditionalLaw(hh, rho, P_PEAK, I_MAX)
        p_hat = law.best_power(q, z, params.k)
        f_hat = q * params.k * law.expected_mi(p_hat) - z * p_hat
        # same objective surface, independent evaluation (numpy log2, full grid)
        n = law.n
        emi = np.minimum(np.log2(1.0 + ps[:, None] * law.u[None, :n]),
                         I_MAX) @ law.w[:n]
        f_grid = float((q * params.k * emi - z * ps).max())
        scale = max(abs(f_grid), 1.0)
        worst = max(worst, (f_grid - f_hat) / scale)
    tol = 1e-6
    return SuiteResult("power_for_user vs grid", worst <= tol, worst, tol,
                       f"({n_instances} instances, {grid}-point grid)")


def fixed_rate_suite(n_instances: int = 1000, grid: int = 100_000,
                     seed: int = 20_240_103) -> SuiteResult:
    """fixed_rate_select goodput vs dense-grid max; <= 1e-4 relative."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    k = 100.0
    for _ in range(n_instances):
        rho = float(rng.uniform(0.0, 0.999))
        hh = ComplexGain(*(rng.standard_normal(2) / math.sqrt(2.0)))
        p = float(rng.uniform(0.1, P_PEAK))
        r_hat = fixed_rate_select(hh, p, rho, k, I_MAX)
        rates = np.linspace(0.0, I_MAX * k, grid)
        s2 = (1.0 - rho) / 2.0
        lam = rho * hh.power / s2
        u_thr = (np.exp2(rates / k) - 1.0) / p
        vals = rates * stats.ncx2.sf(u_thr / s2, 2, lam)
        g_grid = float(vals.max())
        g_hat = r_hat * conditional_tail_exact(hh.amplitude, rho,
                                               (2.0 ** (r_hat / k) - 1.0) / p)
        if g_grid > 0.0:
            worst = max(worst, (g_grid - g_hat) / g_grid)
    tol = 1e-4
    return SuiteResult("fixed_rate_select vs grid", worst <= tol, worst, tol,
                       f"({n_instances} instances, {grid}-point grid)")


def expected_mi_suite(mc_samples: int = 10_000_000,
                      seed: int = 20_240_104) -> SuiteResult:
    """Quadrature vs Monte Carlo on a 5x5 (|hhat|, P) grid, within 3 std errors.

    |hhat| spans the 10th..90th percentile of the unit-power fading law and
    P spans the operating range up to the peak; one grid per rho in the
    sweep set.
    """
    rng = np.random.default_rng(seed)
    habs = np.sqrt(-np.log1p(-np.array([0.1, 0.3, 0.5, 0.7, 0.9])))
    powers = np.array([0.5, 4.0, P_AV, 40.0, P_PEAK])
    worst = -math.inf
    for rho in (0.0, 0.5, 0.8, 0.9):
        s = math.sqrt((1.0 - rho) / 2.0)
        for ha in habs:
            m = math.sqrt(rho) * float(ha)
            z = rng.standard_normal((mc_samples, 2))
            u = (m + s * z[:, 0]) ** 2 + (s * z[:, 1]) ** 2
            law = ConditionalLaw(float(ha), rho, P_PEAK, I_MAX)
            for p in powers:
                vals = np.minimum(np.log2(1.0 + p * u), I_MAX)
                mc = float(vals.mean())
                se = float(vals.std(ddof=1)) / math.sqrt(mc_samples)
                quad = law.expected_mi(float(p))
                excess = abs(quad - mc) - 3.0 * se
                worst = max(worst, excess)
    tol = 0.0
    return SuiteResult("expected_mutual_info vs Monte Carlo",
                       worst <= tol, worst, tol,
                       f"(excess over 3 standard errors of {mc_samples} samples)")


def queue_law_suite(n_slots: int = 20_000, seed: int = 20_240_105) -> SuiteResult:
    """Short logged runs of each strategy: queue invariants hold every slot
    and the encoder backlog replays exactly from the slot log."""
    from .engine import ExperimentConfig, run

    worst = 0.0
    # the low-V config keeps the queue bound below the message quantum so
    # the positive-part clamp in the encoder law binds regularly
    configs = [ExperimentConfig(strategy=s, t_slots=n_slots, seed=seed,
                                record_log=True, warmup_fraction=0.0)
               for s in ("nca", "genie", "fixed_rate")]
    configs.append(ExperimentConfig(strategy="nca", v=4e3, t_slots=n_slots,
                                    seed=seed, record_log=True,
                                    warmup_fraction=0.0))
    for cfg in configs:
        rep = run(cfg)
        worst = max(worst, float(rep.violations_lemma3 + rep.violations_power
                                 + rep.violations_negativity))
        log = rep.slot_log
        q = np.zeros(cfg.s_users)
        drained = np.zeros(cfg.s_users)
        for t in range(cfg.t_slots):
            a = log.acked[t]
            if a >= 0:
                drained[a] += min(q[a], log.delivered[t])
                q[a] = max(q[a] - log.delivered[t], 0.0)
            q += log.admitted[t]
        replay_err = float(np.max(np.abs(
            drained / cfg.t_slots - np.asarray(rep.delivered_throughput))))
        final_err = float(np.max(np.abs(q - np.asarray(rep.final_queues))))
        worst = max(worst, replay_err, final_err)
    tol = 1e-9
    return SuiteResult("queue laws and slot-log replay", worst <= tol, worst, tol,
                       f"({n_slots} slots per config, clamp-stress included)")


def run_all(quick: bool = False) -> list[SuiteResult]:
    if quick:
        return [
            rate_control_suite(n_instances=50, grid=100_000),
            power_search_suite(n_instances=50, grid=2_000),
            fixed_rate_suite(n_instances=50, grid=20_000),
            expected_mi_suite(mc_samples=1_000_000),
            queue_law_suite(n_slots=3_000),
        ]
    return [
        rate_control_suite(),
        power_search_suite(),
        fixed_rate_suite(),
        expected_mi_suite(),
        queue_law_suite(),
    ]
