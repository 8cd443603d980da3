"""Command line interface: ``relaxpath {path,solve,select,sweep,cascade}``.

Exit codes: 0 success, 2 invalid input, 3 tracker not applicable to the
instance, 4 zero primal coordinate, 5 zero probability on validation data.
"""
import argparse
import math
import sys

import numpy as np

from . import io
from .cascade import run_cascade
from .config import TOL
from .core import dual_from, primal_from, signs_at, solve_mu_at, validate_instance
from .errors import (
    InvalidInstance,
    InvalidNu,
    NonUniformPrior,
    ZeroPrimal,
    ZeroProbability,
)
from .path import is_uniform_prior, track_local, track_sparse, track_uniform
from .selection import select_models
from .sqpath import sq_primal_from, sq_solve_mu_at, sq_track_local
from .sweepline import track_global

TRACKERS = {
    "local": track_local,
    "sparse": track_sparse,
    "uniform": track_uniform,
    "global": track_global,
}

GENERATOR = "numpy.random.PCG64"


class TrackerMismatch(Exception):
    pass


def choose_tracker(inst, name="auto"):
    if name != "auto":
        return name
    if is_uniform_prior(inst):
        return "uniform"
    if np.count_nonzero(inst.q) <= inst.n / 8:
        return "sparse"
    return "local"


def track(inst, tracker="auto", objective="entropy"):
    """Path of ``inst`` with the named tracker (``auto`` picks one)."""
    if objective == "squared":
        if tracker not in ("auto", "local"):
            raise TrackerMismatch(f"squared loss only supports the local tracker, not {tracker!r}")
        return sq_track_local(inst)
    try:
        return TRACKERS[choose_tracker(inst, tracker)](inst)
    except NonUniformPrior as exc:
        raise TrackerMismatch(str(exc)) from None


# --------------------------------------------------------------------------
# Zipf path-complexity experiment
# --------------------------------------------------------------------------

def zipf_distributions(n):
    j = np.arange(1, n + 1, dtype=np.float64)
    u = 1.0 / (2.0 + j)
    qbar = 1.0 / j
    return u / u.sum(), qbar / qbar.sum()


def zipf_sweep(n, sizes, repeats, seed, tracker="auto"):
    """Mean path complexity for multinomial samples of each size.

    Rows are ``(sample_size, mean_kappa, kappa_over_n)``.  One generator,
    seeded once, serves all sizes and repeats in order.
    """
    if n < 2 or repeats < 1 or any(s < 1 for s in sizes):
        raise InvalidInstance("need n >= 2, repeats >= 1 and positive sample sizes")
    rng = np.random.Generator(np.random.PCG64(seed))
    u, qbar = zipf_distributions(n)
    rows = []
    for size in sizes:
        kappas = []
        for _ in range(repeats):
            counts = rng.multinomial(size, qbar)
            inst = validate_instance(u, counts / size)
            kappas.append(track(inst, tracker).kappa)
        mean = float(np.mean(kappas))
        rows.append((int(size), mean, mean / n))
    return rows


def sweep_csv(rows, n, repeats, seed):
    lines = [f"# generator={GENERATOR} seed={seed} n={n} repeats={repeats} "
             "prior=1/(2+j) base=1/j",
             "sample_size,mean_kappa,kappa_over_n"]
    lines += [f"{s},{k:.17g},{r:.17g}" for s, k, r in rows]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _instance(args):
    return io.instance_from_dict(io.load_json(args.input))


def cmd_path(args):
    inst = _instance(args)
    path = track(inst, args.tracker, args.objective)
    io.write_text(io.dumps(io.path_to_dict(path)) + "\n", args.out)


def cmd_solve(args):
    doc = io.load_json(args.input)
    inst = io.instance_from_dict(doc)
    nu = args.nu
    if nu is None or not nu > 0 or not math.isfinite(nu):
        raise InvalidNu("--nu must be a positive finite number")
    if args.objective == "squared":
        mu = sq_solve_mu_at(inst, nu)
        p = sq_primal_from(inst, nu, mu)
        th = nu * (inst.u - inst.q) + mu
        s = np.where(th >= 1.0, 1, np.where(th <= -1.0, -1, 0))
        rec = {"nu": nu, "mu": mu, "p": p, "partition": s}
    else:
        mu, s = solve_mu_at(inst, nu)
        p = primal_from(inst, nu, mu)
        alpha, Z, _ = dual_from(inst, nu, mu)
        rec = {"nu": nu, "mu": mu, "p": p, "alpha": alpha, "Z": Z,
               "partition": signs_at(inst, nu, mu)}
    if "delta" in doc:
        rec["p_original"] = np.asarray(doc["delta"], dtype=np.float64) * p
    io.write_text(io.dumps({k: (v.tolist() if isinstance(v, np.ndarray) else v)
                            for k, v in rec.items()}) + "\n", args.out)


def cmd_select(args):
    doc = io.load_json(args.input)
    inst = io.instance_from_dict(doc)
    if "r" not in doc:
        raise InvalidInstance("input has no validation counts 'r'")
    path = io.path_from_dict(io.load_json(args.path)) if args.path else track(inst, args.tracker)
    if path.n != inst.n or path.objective != "entropy":
        raise InvalidInstance("path file does not belong to this instance")
    rows = select_models(inst, path, np.asarray(doc["r"], dtype=np.float64), args.lambda_min)
    table = [{"support": r.support, "nu_star": r.nu_star, "loss_star": r.loss_star,
              "flagged": r.flagged} for r in rows]
    io.write_text(io.dumps({"rows": table}) + "\n", args.out)


def cmd_sweep(args):
    n = args.n
    sizes = args.samples if args.samples is not None else [n // 4, n // 2, n, 2 * n]
    rows = zipf_sweep(n, sizes, args.repeats, args.seed, args.tracker)
    io.write_text(sweep_csv(rows, n, args.repeats, args.seed), args.out)


def cmd_cascade(args):
    doc = io.load_json(args.input)
    try:
        u = np.asarray(doc["u"], dtype=np.float64)
        stages = doc["stages"]
        qs = [np.asarray(st["q"], dtype=np.float64) for st in stages]
        nus = [float(st["nu"]) for st in stages]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInstance(f"bad cascade file: {exc}") from None
    m = np.asarray(doc.get("m", np.ones_like(u)), dtype=np.float64)
    ps, recs = run_cascade(u, qs, m, nus)
    out = {"stages": [r.to_dict() for r in recs], "p": (ps[-1] if ps else u).tolist()}
    io.write_text(io.dumps(out) + "\n", args.out)


def _parser():
    ap = argparse.ArgumentParser(prog="relaxpath",
                                 description="Relaxation paths for relaxed maximum entropy estimation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, tracker=True, objective=True):
        p.add_argument("--input", required=True, help="instance JSON file")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        if tracker:
            p.add_argument("--tracker", default="auto",
                           choices=["auto", *TRACKERS])
        if objective:
            p.add_argument("--objective", default="entropy", choices=["entropy", "squared"])

    p = sub.add_parser("path", help="compute the whole relaxation path")
    common(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("solve", help="solve at one value of nu")
    common(p, tracker=False)
    p.add_argument("--nu", type=float, required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("select", help="model table from validation counts 'r'")
    common(p, objective=False)
    p.add_argument("--path", default=None, help="precomputed path JSON")
    p.add_argument("--lambda-min", type=float, default=TOL.lambda_min)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("sweep", help="Zipf path-complexity experiment (CSV)")
    p.add_argument("--dist", default="zipf", choices=["zipf"])
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--samples", type=lambda s: [int(x) for x in s.split(",")], default=None,
                   help="comma separated sample sizes (default n/4,n/2,n,2n)")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tracker", default="auto", choices=["auto", *TRACKERS])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cascade", help="run a chain of stages described in a JSON file")
    common(p, tracker=False, objective=False)
    p.set_defaults(func=cmd_cascade)
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        args.func(args)
    except TrackerMismatch as exc:
        print(f"relaxpath: {exc}", file=sys.stderr)
        return 3
    except ZeroPrimal as exc:
        print(f"relaxpath: {exc}", file=sys.stderr)
        return 4
    except ZeroProbability as exc:
        print(f"relaxpath: {exc}", file=sys.stderr)
        return 5
    except (InvalidInstance, InvalidNu, OSError, ValueError) as exc:
        print(f"relaxpath: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
