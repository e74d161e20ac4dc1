#!/usr/bin/env python3
"""Timing comparison of the numba-compiled kernels against the interpreted
numpy fallback (RATELESS_SIM_NUMBA=0).

Runs the same short simulations under both backends in subprocesses and
reports slots/second plus the per-primitive costs.  The fallback executes the
identical source; expect two to three orders of magnitude difference on the
slot loop.

Usage: python benchmarks/bench_kernels.py [--slots 20000] [--fallback-slots 400]
"""
import argparse
import json
import subprocess
import sys
import time


def _time_backend(numba_flag: str, n_slots: int) -> dict:
    code = f"""
import json, time
import numpy as np
from rateless_sim.engine import ExperimentConfig, run
from rateless_sim.channel import ComplexGain, ConditionalLaw
from rateless_sim import backend_name

# warm-up (JIT compile on the numba path)
run(ExperimentConfig(t_slots=32, seed=1))

out = {{"backend": backend_name()}}

t0 = time.perf_counter()
run(ExperimentConfig(t_slots={n_slots}, seed=1))
out["slot_loop_s"] = time.perf_counter() - t0
out["slots"] = {n_slots}

law = ConditionalLaw(ComplexGain(0.8, -0.4), 0.8, 4 * 10**1.2, 8.0)
n_eval = 2000 if backend_name() == "numba" else 200
t0 = time.perf_counter()
for i in range(n_eval):
    law.expected_mi(0.03 * (i % 2000) + 0.01)
out["expected_mi_us"] = (time.perf_counter() - t0) / n_eval * 1e6

n_srch = 200 if backend_name() == "numba" else 10
t0 = time.perf_counter()
for i in range(n_srch):
    law.best_power(1000.0 + i, 900.0, 10.0)
out["power_search_us"] = (time.perf_counter() - t0) / n_srch * 1e6

print(json.dumps(out))
"""
    env = dict(__import__("os").environ, RATELESS_SIM_NUMBA=numba_flag)
    res = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--slots", type=int, default=20_000,
                    help="slot count for the numba backend")
    ap.add_argument("--fallback-slots", type=int, default=400,
                    help="slot count for the numpy fallback")
    args = ap.parse_args()

    numba = _time_backend("1", args.slots)
    numpy_ = _time_backend("0", args.fallback_slots)

    def rate(d):
        return d["slots"] / d["slot_loop_s"]

    print(f"{'':24s}{'numba':>14s}{'numpy':>14s}{'speedup':>10s}")
    print(f"{'slot loop (slots/s)':24s}{rate(numba):>14.0f}{rate(numpy_):>14.1f}"
          f"{rate(numba) / rate(numpy_):>10.0f}x")
    print(f"{'expected_mi (us/call)':24s}{numba['expected_mi_us']:>14.2f}"
          f"{numpy_['expected_mi_us']:>14.1f}"
          f"{numpy_['expected_mi_us'] / numba['expected_mi_us']:>10.0f}x")
    print(f"{'power search (us/call)':24s}{numba['power_search_us']:>14.1f}"
          f"{numpy_['power_search_us']:>14.0f}"
          f"{numpy_['power_search_us'] / numba['power_search_us']:>10.0f}x")


if __name__ == "__main__":
    main()
