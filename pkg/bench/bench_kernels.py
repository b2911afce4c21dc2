"""Time the numba kernels against the pure-numpy fallback.

    python3 bench/bench_kernels.py --n 20 --batch 200 --repeat 5

Both kernel sets are imported side by side, so the environment flag is not
needed here.  The first numba call is made before timing so compilation is
not counted.
"""

import argparse
import time

import numpy as np

from lapcem import kernels
from lapcem.conjectures import CATALOG, BoundForm
from lapcem.graph import n_slots
from lapcem.policy import NetworkArchitecture, init_network


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--batch", type=int, default=200)
    p.add_argument("--conjecture", type=int, default=3)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    if kernels.numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    n, b, e = args.n, args.batch, n_slots(args.n)
    bits = (rng.random((b, e)) < 0.4).astype(np.uint8)
    vertex = CATALOG[args.conjecture].form is BoundForm.VERTEX_MAX
    net = init_network(NetworkArchitecture.for_vertices(n), args.seed)
    sizes = np.array(net.arch.sizes)
    init = np.zeros((b, e), dtype=np.uint8)
    u = rng.random((b, e))
    random_rows = np.zeros(b, dtype=bool)

    cases = {
        "score_conjecture_batch": lambda k: k.score_conjecture_batch(bits, n, args.conjecture, vertex, 60, 1e-10),
        "rollout_batch": lambda k: k.rollout_batch(init, u, random_rows, net.theta, sizes),
    }

    print(f"n={n} batch={b} edge slots={e} repeat={args.repeat} (best time shown)")
    print(f"{'kernel':<24}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, call in cases.items():
        nb_out = call(kernels.numba_kernels)  # compile
        np_out = call(kernels.numpy_kernels)
        for x, y in zip(nb_out, np_out):
            if not np.allclose(x, y, atol=1e-9):
                raise SystemExit(f"{name}: backends disagree")
        t_nb = best_of(lambda: call(kernels.numba_kernels), args.repeat)
        t_np = best_of(lambda: call(kernels.numpy_kernels), args.repeat)
        print(f"{name:<24}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
