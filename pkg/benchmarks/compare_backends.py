#!/usr/bin/env python3
"""Time the compiled estimation kernels against the pure-Python reference.

Runs the multiscale map over one phantom envelope with both backends,
checks that every output array is bitwise identical, and prints a small
table.  Exits nonzero if the backends disagree.
"""

import argparse
import sys
import time

import numpy as np

from nakamap import _kernels_py
from nakamap.nakagami import NakagamiParams
from nakamap.phantom import Layout, PhantomSpec, generate_distribution_phantom

try:
    from nakamap import _kernels as _compiled
except ImportError:
    _compiled = None


def _run(mod, env, sizes, repeats):
    h, w = env.shape
    outs = None
    best = np.inf
    for _ in range(repeats):
        mu = np.zeros((h, w))
        omega = np.zeros((h, w))
        scale = np.zeros((h, w))
        fit = np.zeros((h, w))
        status = np.zeros((h, w), dtype=np.int8)
        t0 = time.perf_counter()
        mod.map_multiscale(env, sizes, 0, h, mu, omega, scale, fit, status)
        best = min(best, time.perf_counter() - t0)
        outs = (mu, omega, scale, fit, status)
    return best, outs


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=48)
    parser.add_argument("--sizes", default="3,5,7", help="kernel ladder")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    spec = PhantomSpec(
        width=args.size,
        height=args.size,
        layout=Layout.DISK,
        regions=(NakagamiParams(0.8, 1.0), NakagamiParams(1.5, 1.0)),
        seed=args.seed,
    )
    env = generate_distribution_phantom(spec).envelope.data
    sizes = np.array([int(s) for s in args.sizes.split(",")], dtype=np.int64)
    print(f"multiscale map, {args.size}x{args.size} disk phantom, "
          f"sizes {sizes.tolist()}, best of {args.repeats}")

    t_py, out_py = _run(_kernels_py, env, sizes, args.repeats)
    rows = [("python", t_py, 1.0)]
    if _compiled is None:
        print("compiled extension not built; timing the reference only")
    else:
        t_c, out_c = _run(_compiled, env, sizes, args.repeats)
        rows.insert(0, ("compiled", t_c, t_py / t_c))
        names = ("mu", "omega", "scale", "fit", "status")
        bad = [n for n, a, b in zip(names, out_c, out_py)
               if a.tobytes() != b.tobytes()]
        if bad:
            print(f"BACKEND MISMATCH in: {', '.join(bad)}")
            return 1
        print("all five output arrays bitwise identical")

    print(f"{'backend':<10} {'seconds':>9} {'speedup':>8}")
    for name, t, speedup in rows:
        print(f"{name:<10} {t:>9.3f} {speedup:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
