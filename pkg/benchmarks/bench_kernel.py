"""Compare the compiled and the pure-Python evaluation kernels.

Cycle detection is switched off so every workload runs the full step
budget.  Each kernel runs in its own interpreter, because the kernel is chosen when
``feh.evaluator`` is imported.  Usage::

    python3 benchmarks/bench_kernel.py [--steps N] [--repeat R]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    # a register that grows forever: long runs of let/app/return steps
    "inc_loop": "mm:inc_loop.mm",
    # ping-pong between registers: handlers, operations and cycle detection
    "ping_pong": "mm:ping_pong.mm",
    # state-passing handler from the corpus, started in a diverging state
    "c_ex1_div": "feh:c_ex1.feh",
}

CHILD = r"""
import json, sys, time
from feh import evaluator, library, minsky
kind, name = sys.argv[1].split(":")
steps, repeat = int(sys.argv[2]), int(sys.argv[3])
if kind == "mm":
    program = minsky.compile_mm(library.load_machine(name))
else:
    program = library.load_program(name)
    if name == "c_ex1.feh":
        from feh.sugar import SBool
        program = program.with_defs(s0=SBool(True), s1=SBool(True))
core = program.core()
best = None
for _ in range(repeat):
    t = time.perf_counter()
    outcome, stats = evaluator.evaluate(core, steps, detect_cycles=False)
    dt = time.perf_counter() - t
    best = dt if best is None else min(best, dt)
print(json.dumps({"kernel": evaluator.KERNEL, "seconds": best, "steps": stats.steps, "outcome": outcome.kind}))
"""


def run(workload: str, steps: int, repeat: int, pure: bool) -> dict:
    env = dict(os.environ)
    env["FEH_PURE_PYTHON"] = "1" if pure else "0"
    out = subprocess.run(
        [sys.executable, "-c", CHILD, workload, str(steps), str(repeat)],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    return json.loads(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'workload':<10} {'kernel':<8} {'steps':>8} {'seconds':>9} {'steps/s':>11}")
    for name, workload in WORKLOADS.items():
        rows = [run(workload, args.steps, args.repeat, pure) for pure in (True, False)]
        for r in rows:
            rate = r["steps"] / r["seconds"] if r["seconds"] else float("inf")
            print(f"{name:<10} {r['kernel']:<8} {r['steps']:>8} {r['seconds']:>9.3f} {rate:>11.0f}")
        if rows[1]["kernel"] == "cython" and rows[1]["seconds"] > 0:
            print(f"{name:<10} speedup  {rows[0]['seconds'] / rows[1]['seconds']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
