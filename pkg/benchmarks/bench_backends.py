"""Compare the numba and pure numpy kernel backends.

    python3 benchmarks/bench_backends.py [--instances 200] [--n 64] [--seed 0]

Times each tracker (and the point solver) on the same seeded instances under
both backends after a warm-up pass, and checks the paths agree.
"""
import argparse
import time

import numpy as np

from relaxpath import _kernels, solve_mu_at, track_global, track_local, track_sparse, validate_instance


def instances(count, n_max, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, n_max + 1))
        m = rng.uniform(0.5, 3.0, n)
        u = rng.dirichlet(np.ones(n))
        q = rng.dirichlet(np.ones(n))
        out.append(validate_instance(u / (m @ u), q / (m @ q), m))
    return out


def solve_many(insts):
    return [solve_mu_at(inst, 5.0)[0] for inst in insts]


TASKS = {
    "track_local": lambda insts: [track_local(i) for i in insts],
    "track_sparse": lambda insts: [track_sparse(i) for i in insts],
    "track_global": lambda insts: [track_global(i) for i in insts],
    "solve_mu_at": solve_many,
}


def timed(fn, insts, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(insts)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--n", type=int, default=64, help="largest dimension")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    insts = instances(args.instances, args.n, args.seed)
    backends = _kernels.available_backends()
    prev = _kernels.backend()
    rows = []
    try:
        for task, fn in TASKS.items():
            times, results = {}, {}
            for name in backends:
                _kernels.set_backend(name)
                fn(insts[:5])  # warm-up, includes jit compilation or cache load
                times[name], results[name] = timed(fn, insts, args.repeats)
            agree = all(_same(results[backends[0]], results[b]) for b in backends[1:])
            rows.append((task, times, agree))
    finally:
        _kernels.set_backend(prev)

    head = f"{'task':<14}" + "".join(f"{b + ' (s)':>14}" for b in backends)
    if len(backends) > 1:
        head += f"{'speedup':>10}"
    print(f"{args.instances} instances, n <= {args.n}, best of {args.repeats}")
    print(head + f"{'agree':>8}")
    for task, times, agree in rows:
        line = f"{task:<14}" + "".join(f"{times[b]:>14.4f}" for b in backends)
        if len(backends) > 1:
            line += f"{times['numpy'] / times['numba']:>10.1f}"
        print(line + f"{str(agree):>8}")


def _same(a, b):
    for x, y in zip(a, b):
        if hasattr(x, "nus"):
            if x.kappa != y.kappa or not np.allclose(x.nus, y.nus, rtol=1e-9):
                return False
        elif abs(x - y) > 1e-9 * max(1.0, abs(x)):
            return False
    return True


if __name__ == "__main__":
    main()
