#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-Python
fallback.

Two workloads: a micro-benchmark of the term-map kernels on polynomial
data shaped like the engine's coefficients, and an end-to-end normal
ordering of exchange words (run in subprocesses so each backend is
selected at import).
"""

import os
import random
import subprocess
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rhopf.kernels import _poly_py  # noqa: E402

try:
    from rhopf.kernels import _poly_c
except ImportError:
    _poly_c = None

REPEAT = 200


def _random_poly(rng, nterms, nvars=4, span=4):
    out = {}
    for _ in range(nterms):
        mono = tuple(sorted((v, rng.randint(-span, span))
                            for v in rng.sample(range(6), nvars)
                            if rng.random() < 0.8))
        mono = tuple((v, e) for v, e in mono if e)
        out[mono] = rng.randint(-999999, 999999) or 1
    return out


def bench_kernels(impl, polys):
    t0 = time.perf_counter()
    acc = {}
    for _ in range(REPEAT):
        for i in range(len(polys) - 1):
            prod = impl.poly_mul(polys[i], polys[i + 1])
            acc = impl.poly_add(acc, prod)
            acc = impl.poly_sub(acc, prod)
    return time.perf_counter() - t0


_E2E_SNIPPET = r"""
import time
from rhopf.instances import get_instance
from rhopf.algebra import RewriteSystem, braid_consistency
from rhopf import KERNEL_BACKEND
t0 = time.perf_counter()
for _ in range(5):
    braid_consistency(get_instance("example2-n2"))
    rs = RewriteSystem(get_instance("example2-n2"), "extended")
    from rhopf.algebra import relation_self_residual
    for rid in ("PhiPhi", "PhiL", "LL"):
        relation_self_residual(rs, rid)
print(f"{KERNEL_BACKEND} {time.perf_counter() - t0:.3f}")
"""


def bench_end_to_end(force_pure):
    env = dict(os.environ)
    if force_pure:
        env["RHOPF_PURE_PYTHON"] = "1"
    else:
        env.pop("RHOPF_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", _E2E_SNIPPET], env=env,
                         capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main():
    rng = random.Random(20240)
    polys = [_random_poly(rng, rng.randint(3, 12)) for _ in range(60)]

    print(f"{'workload':34} {'python':>10} {'c':>10} {'speedup':>8}")
    t_py = bench_kernels(_poly_py, polys)
    if _poly_c is not None:
        t_c = bench_kernels(_poly_c, polys)
        print(f"{'term-map mul/add/sub (micro)':34} {t_py:9.3f}s "
              f"{t_c:9.3f}s {t_py / t_c:7.2f}x")
    else:
        print(f"{'term-map mul/add/sub (micro)':34} {t_py:9.3f}s "
              f"{'n/a':>10} {'':>8}")

    b_py, e_py = bench_end_to_end(force_pure=True)
    assert b_py == "python"
    row = f"{'normal ordering, n=2 (end to end)':34} {e_py:9.3f}s "
    if _poly_c is not None:
        b_c, e_c = bench_end_to_end(force_pure=False)
        assert b_c == "c"
        row += f"{e_c:9.3f}s {e_py / e_c:7.2f}x"
    else:
        row += f"{'n/a':>10}"
    print(row)


if __name__ == "__main__":
    main()
