#!/usr/bin/env python3
"""Compare the compiled and pure-Python transition kernels on identical work.

Times the operations the engines actually lean on (full-sweep match,
match-set recording, stored-history sweeps, and a complete linear-engine
parse) over generated instances, and prints one table row per size.

    python benchmarks/kernel_benchmark.py [--repeat N]
"""

import argparse
import time

from reparse import kernel
from reparse.automata import as_symbols, build_tnfa
from reparse.engine import parse
from reparse.gen import gen_instance
from reparse.kernel import available_backends
from reparse.syntax import parse_pattern

SIZES = [(256, 16), (1024, 32), (4096, 64), (8192, 128)]


def time_backend(impl, prog, syms, theta, phi, repeat):
    start_mask = impl.closure(prog, 1 << theta)
    best = {}
    for name, fn in (
        ("match", lambda: impl.sweep_final(prog, syms, start_mask)),
        ("record", lambda: impl.sweep_record(prog, syms, start_mask, theta, phi)),
        ("history", lambda: impl.sweep_history(prog, syms, start_mask)),
    ):
        runs = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            runs.append(time.perf_counter() - t0)
        best[name] = min(runs)
    return best


def time_parse(backend_name, pattern, text, repeat):
    # Engine-level comparison: swap the kernel the facade dispatches to.
    saved = kernel.impl
    kernel.impl = available_backends()[backend_name]
    try:
        runs = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            parse(pattern, text, "linear")
            runs.append(time.perf_counter() - t0)
        return min(runs)
    finally:
        kernel.impl = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    if "c" not in backends:
        print("compiled kernel not built; nothing to compare")
        return

    print(f"{'n':>6} {'m':>5} {'op':>8} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for n_target, m_target in SIZES:
        inst = gen_instance(1, m_target, n_target, kind="walk")
        tnfa = build_tnfa(parse_pattern(inst.pattern))
        syms = as_symbols(inst.text)
        rows = {}
        for name in ("py", "c"):
            rows[name] = time_backend(
                backends[name], tnfa.prog(), syms, tnfa.theta, tnfa.phi,
                args.repeat,
            )
        for op in ("match", "record", "history"):
            py_t, c_t = rows["py"][op], rows["c"][op]
            print(
                f"{len(inst.text):>6} {m_target:>5} {op:>8} "
                f"{py_t * 1e3:>8.2f}ms {c_t * 1e3:>8.2f}ms {py_t / c_t:>7.1f}x"
            )
        py_p = time_parse("py", inst.pattern, inst.text, args.repeat)
        c_p = time_parse("c", inst.pattern, inst.text, args.repeat)
        print(
            f"{len(inst.text):>6} {m_target:>5} {'parse':>8} "
            f"{py_p * 1e3:>8.2f}ms {c_p * 1e3:>8.2f}ms {py_p / c_p:>7.1f}x"
        )


if __name__ == "__main__":
    main()
