"""Time the simulation kernels under both backends.

    python benchmarks/bench_kernels.py [--repeat 3]

Each backend runs in its own interpreter (the backend is fixed at import),
first once to warm the JIT cache, then ``--repeat`` timed runs.  Prints one
CSV row per (case, backend) and checks both backends agree on the estimate.
"""
import argparse
import json
import os
import subprocess
import sys

CASES = {
    "tagged_2hop_n1000": dict(hops=[(1000, 615), (1000, 921)], cycles=100_000, mode="tagged_path"),
    "tagged_3hop_n200": dict(hops=[(200, 125), (200, 166), (200, 193)], cycles=100_000, mode="tagged_path"),
    "full_2hop_n10": dict(hops=[(10, 6), (10, 9)], cycles=5_000, mode="full_tree"),
}

_WORKER = r"""
import json, sys, time
from aoimcast import HopConfig, NetworkConfig, ShiftedExp, SimConfig, simulate, BACKEND
case = json.loads(sys.argv[1])
net = NetworkConfig(tuple(HopConfig(n, k, ShiftedExp(1, 1)) for n, k in case["hops"]))
cfg = SimConfig(net, cycles=case["cycles"], seed=1, mode=case["mode"])
simulate(SimConfig(net, cycles=200, seed=1, mode=case["mode"]))
times = []
for _ in range(case["repeat"]):
    t0 = time.perf_counter()
    res = simulate(cfg)
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": BACKEND, "best": min(times), "avg_age": res.avg_age}))
"""


def run_case(case, backend, repeat):
    env = dict(os.environ, AOIMCAST_BACKEND=backend)
    payload = json.dumps(dict(case, repeat=repeat))
    out = subprocess.run([sys.executable, "-c", _WORKER, payload], env=env, check=True,
                         capture_output=True, text=True).stdout
    return json.loads(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cases", nargs="*", default=list(CASES), choices=list(CASES))
    args = ap.parse_args()
    print("case,backend,seconds,speedup,avg_age")
    for name in args.cases:
        fast = run_case(CASES[name], "numba", args.repeat)
        slow = run_case(CASES[name], "numpy", args.repeat)
        if fast["avg_age"] != slow["avg_age"]:
            print(f"# {name}: backends disagree ({fast['avg_age']!r} vs {slow['avg_age']!r})", file=sys.stderr)
        print(f"{name},numba,{fast['best']:.4f},{slow['best'] / fast['best']:.1f},{fast['avg_age']:.6f}")
        print(f"{name},numpy,{slow['best']:.4f},1.0,{slow['avg_age']:.6f}")


if __name__ == "__main__":
    main()
