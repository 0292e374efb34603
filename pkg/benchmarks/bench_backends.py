"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the same workloads in subprocesses with ``BANDIT_BAKERY_BACKEND``
forced to each backend and reports throughput side by side. The two
backends are bitwise-identical; this script is about speed only.

Usage:  python3 benchmarks/bench_backends.py [--rounds N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json
import sys
import time

import numpy as np

import bandit_bakery
from bandit_bakery import backend
from bandit_bakery.explorers import ExplorerConfig, run
from bandit_bakery.synth import linear_multiclass, token_multiclass

rounds = int(sys.argv[1])
results = {"backend": backend.BACKEND}

# raw kernel throughput: repeated updates on a dense-ish state
dim = 32
w = np.zeros(dim)
g = np.zeros(dim)
s = np.zeros(dim)
gen = np.random.default_rng(0)
idx = np.arange(dim, dtype=np.int64)
vals = [gen.normal(size=dim) for _ in range(64)]
targets = gen.normal(size=64)
n_updates = rounds * 20
start = time.perf_counter()
for i in range(n_updates):
    backend.apply_update(w, g, s, idx, vals[i % 64], float(targets[i % 64]),
                         1.0, 0.5, 0.0)
results["kernel_updates_per_s"] = n_updates / (time.perf_counter() - start)

# end-to-end explorer throughput
for algo, data in (("greedy", "dense"), ("cover-nu", "dense"),
                   ("regcb-opt", "sparse")):
    if data == "dense":
        ds = linear_multiclass(rounds, n_actions=5, dim=20, seed=1)
    else:
        ds = token_multiclass(rounds, n_actions=5, seed=1)
    red = "dr" if algo == "cover-nu" else "iwr"
    cfg = ExplorerConfig(algo=algo, eta=0.5, reduction=red, seed=0)
    start = time.perf_counter()
    run(ds, cfg)
    results[f"{algo}_rounds_per_s"] = rounds / (time.perf_counter() - start)

print(json.dumps(results))
"""


def measure(backend_name: str, rounds: int) -> dict:
    env = dict(os.environ, BANDIT_BAKERY_BACKEND=backend_name)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(rounds)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=5000,
                        help="bandit rounds per end-to-end workload")
    args = parser.parse_args()

    from bandit_bakery.backend import available_backends

    names = available_backends()
    if "c" not in names:
        print("compiled kernels not built; benchmarking python only",
              file=sys.stderr)
    results = {name: measure(name, args.rounds) for name in names}

    metrics = [k for k in next(iter(results.values())) if k != "backend"]
    width = max(len(m) for m in metrics) + 2
    header = "metric".ljust(width) + "".join(n.rjust(14) for n in names)
    if len(names) == 2:
        header += "speedup".rjust(10)
    print(header)
    for metric in metrics:
        row = metric.ljust(width)
        for name in names:
            row += f"{results[name][metric]:14.0f}"
        if len(names) == 2:
            ratio = results[names[0]][metric] / results[names[1]][metric]
            row += f"{ratio:9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
