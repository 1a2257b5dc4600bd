"""Command line driver: ``brwgibbs <subcommand> ...``.

Exit codes: 0 ok, 1 usage, 2 numerical or cap error, 3 a self-check in
an output epilogue failed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import prf
from .errors import BrwError, CapExceeded, DepthExceeded, ModelError, NumericalFailure
from .gibbs import entropy, gibbs_distribution
from .hardness import (
    calibrate_z,
    exceptional_statistics,
    fit_log_tail,
    geometric_domination,
    max_tail_probe,
    naive_search,
    sqrt_scaling_fit,
    ProbabilityEstimate,
)
from .increments import (
    critical_beta,
    free_energy,
    log_mgf,
    log_mgf_derivative,
    parse_model,
)
from .records import render_csv, render_json
from .sampler import default_block_depth, kl_algorithm_exact, recursive_sample, summarize
from .tree import DEFAULT_CAP, HARD_CAP, BrwInstance, vertex_value

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_EPILOGUE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- arg types

def float_list(text: str) -> list[float]:
    try:
        out = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def seed_range(text: str) -> list[int]:
    """``a:b`` (half open), ``a,b,c`` or a single seed."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            out = list(range(int(lo), int(hi)))
        else:
            out = int_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not out or min(out) < 0:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}")
    return out


def cap_value(text: str) -> int:
    value = int(text)
    if not 1 <= value <= HARD_CAP:
        raise argparse.ArgumentTypeError(f"cap must lie in [1, {HARD_CAP}]")
    return value


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BRWGIBBS_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def _pool_map(fn, items):
    """Map in a thread pool; results come back in input order."""
    items = list(items)
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def instance_seed(base_seed: int, N: int, index: int) -> int:
    """Environment seed from grid coordinates; independent of beta and M."""
    return prf.derive_seed(base_seed, N, index)


# ---------------------------------------------------------------- commands

def cmd_critical(args) -> int:
    model = _model(args)
    bc = critical_beta(model)
    lines = [f"model={model.spec()}"]
    if math.isinf(bc):
        lines.append("beta_c=inf")
    else:
        lines += [
            f"beta_c={bc!r}",
            f"phi(beta_c)={log_mgf(model, bc)!r}",
            f"phi'(beta_c)={log_mgf_derivative(model, bc)!r}",
        ]
    lines.append("beta,free_energy")
    for beta in args.beta or [0.25 * k for k in range(1, 9)]:
        lines.append(f"{beta!r},{free_energy(model, beta)!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_kl_scan(args) -> int:
    model = _model(args)
    grid = [(b, n, m) for b in args.beta for n in args.N for m in args.M]

    def point(coords):
        beta, N, M = coords
        try:
            if not 1 <= M <= N:
                raise DepthExceeded(f"need 1 <= M <= N, got M={M}, N={N}")
            values = []
            for i in args.seeds:
                inst = BrwInstance(model, N, instance_seed(args.base_seed, N, i), cap=args.cap)
                values.append(kl_algorithm_exact(inst, beta, M))
            return summarize(values, beta, N, M), None
        except (CapExceeded, DepthExceeded, NumericalFailure) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    results = _pool_map(point, grid)
    failed = False
    if args.format == "json":
        payload = []
        for (beta, N, M), (summary, err) in zip(grid, results):
            if err:
                failed = True
                payload.append({"beta": beta, "N": N, "M": M, "error": err})
            else:
                payload.append(summary.as_json())
        _emit(render_json(payload), args.out)
    else:
        rows = []
        for (beta, N, M), (s, err) in zip(grid, results):
            if err:
                failed = True
                rows.append((beta, N, M, len(args.seeds), None, None, None, None, None, err))
            else:
                rows.append((s.beta, s.N, s.M, s.num_seeds, s.mean, s.std, s.p1, s.p2, s.p4, ""))
        _emit(render_csv("kl-scan", rows, args.deterministic), args.out)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_sample(args) -> int:
    model = _model(args)
    N = args.N[0]
    M = args.M[0] if args.M else default_block_depth(N)
    beta = args.beta[0]
    runs = []
    for i in args.seeds:
        inst = BrwInstance(model, N, i, cap=args.cap)
        algo = args.algo_seed if args.algo_seed is not None else prf.derive_seed(args.base_seed, i)
        rec = recursive_sample(inst, beta, M, algo)
        runs.append((inst, algo, rec))
    if args.format == "csv":
        rows = []
        for inst, algo, rec in runs:
            try:
                kl = kl_algorithm_exact(inst, beta, M)
            except CapExceeded:
                kl = None
            rows.append((inst.seed, algo, beta, N, M, rec.tau, kl))
        _emit(render_csv("runs", rows, args.deterministic), args.out)
    else:
        lines = []
        for inst, algo, rec in runs:
            leaf = "".join(map(str, rec.output))
            x = vertex_value(inst, rec.output)
            lines.append(f"instance_seed={inst.seed} algo_seed={algo} leaf={leaf} X={x!r} tau={rec.tau}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_entropy_scan(args) -> int:
    model = _model(args)
    bc = critical_beta(model)
    grid = [(b, n) for b in args.beta for n in args.N]

    def point(coords):
        beta, N = coords
        hs = []
        for i in args.seeds:
            inst = BrwInstance(model, N, instance_seed(args.base_seed, N, i), cap=args.cap)
            hs.append(entropy(gibbs_distribution(inst, (), beta, N)))
        return np.array(hs)

    rows = []
    for (beta, N), hs in zip(grid, _pool_map(point, grid)):
        rate = log_mgf(model, beta) - beta * log_mgf_derivative(model, beta) if beta < bc else float("nan")
        std = float(np.std(hs, ddof=1)) if hs.size > 1 else 0.0
        rows.append((beta, N, int(hs.size), float(hs.mean()), std, float(hs.mean()) / N, rate))
    _emit(render_csv("entropy-scan", rows, args.deterministic), args.out)
    return EXIT_OK


def cmd_hardness(args) -> int:
    model = _model(args)
    if args.z:
        zs = sorted(args.z)
    else:
        zs = [calibrate_z(model, args.beta[0], args.pilot_N, seed=args.base_seed)]
    Ns = args.N
    trials = args.trials

    estimates = []
    exc_rows = []
    for N in Ns:
        stat = exceptional_statistics(model, N, trials, args.base_seed)
        for z in zs:
            est = ProbabilityEstimate(N, z, trials, int(np.sum(stat > z)))
            estimates.append(est)
            exc_rows.append((N, z, trials, est.successes, est.phat if trials else None,
                             est.stderr if trials else None))

    search_N = args.search_N or max(Ns)
    search_rows, probes, found = [], [], []
    for sid in range(args.searches):
        inst = BrwInstance(model, search_N, prf.derive_seed(args.base_seed, 7, search_N, sid), cap=args.cap)
        rec = naive_search(inst, zs[0], "random", order_seed=prf.derive_seed(args.base_seed, 8, sid))
        search_rows.append((search_N, zs[0], sid, rec.probes, rec.tau, rec.found))
        probes.append(rec.probes)
        found.append(rec.found)

    tail_N = args.tail_N or max(Ns)
    tail = max_tail_probe(model, tail_N, args.xs, args.tail_trials, args.base_seed) if args.tail_trials else []
    tail_rows = [(tail_N, x, args.tail_trials, p) for x, p in tail]

    summary = {"z": zs, "trials": trials, "N": Ns}
    status = EXIT_OK
    monotone = []
    for N in Ns:
        row = [e for e in estimates if e.N == N]
        for a, b in zip(row, row[1:]):
            slack = 3.0 * math.hypot(a.stderr, b.stderr) if trials else 0.0
            ok = (not trials) or a.phat + slack >= b.phat
            monotone.append({"N": N, "z_low": a.z, "z_high": b.z, "ok": ok})
            if not ok:
                status = EXIT_EPILOGUE
    summary["monotone_in_z"] = monotone
    summary["sqrt_fit"] = {repr(float(z)): sqrt_scaling_fit([e for e in estimates if e.z == z]) for z in zs}
    if probes:
        pz = [e for e in estimates if e.N == search_N and e.z == zs[0]]
        if pz and trials:
            q = min(1.0, pz[0].phat + 2.0 * pz[0].stderr)
            summary["domination"] = {"q": q, **geometric_domination(probes, q, found)}
    if tail:
        summary["max_tail_fit"] = fit_log_tail(tail)

    texts = {
        "exceptional.csv": render_csv("exceptional", exc_rows, args.deterministic),
        "search.csv": render_csv("search", search_rows, args.deterministic),
        "max_tail.csv": render_csv("max-tail", tail_rows, args.deterministic),
        "summary.json": render_json(summary),
    }
    if args.out is None:
        for name, text in texts.items():
            sys.stdout.write(f"== {name}\n{text}")
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in texts.items():
            (out / name).write_text(text)
    return status


# ---------------------------------------------------------------- parser

def _model(args):
    spec = args.model_pos or args.model
    if spec is None:
        raise UsageError("a model spec is required (e.g. gaussian:d=2)")
    return parse_model(spec)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brwgibbs", description="Branching random walk Gibbs measure experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, beta_default="0.8"):
        p.add_argument("model_pos", nargs="?", metavar="MODEL", help="model spec, e.g. gaussian:d=2")
        p.add_argument("--model", help="model spec (alternative to the positional)")
        p.add_argument("--beta", type=float_list, default=float_list(beta_default) if beta_default else None)
        p.add_argument("--seeds", type=seed_range, default=seed_range("0:10"))
        p.add_argument("--base-seed", type=int, default=0)
        p.add_argument("--cap", type=cap_value, default=DEFAULT_CAP)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
        p.add_argument("--deterministic", action="store_true", help="omit the timestamp from headers")
        return p

    p = common(sub.add_parser("critical", help="beta_c, phi(beta_c), phi'(beta_c), free energy"), None)
    p.set_defaults(func=cmd_critical)

    p = common(sub.add_parser("kl-scan", help="exact KL statistics over a (beta, N, M) grid"))
    p.add_argument("--N", type=int_list, default=int_list("12"))
    p.add_argument("--M", type=int_list, default=int_list("1,2,3,4,6,12"))
    p.set_defaults(func=cmd_kl_scan)

    p = common(sub.add_parser("sample", help="run the block sampler"))
    p.add_argument("--N", type=int_list, default=int_list("12"))
    p.add_argument("--M", type=int_list, default=None, help="block depth (default ceil(log2 N))")
    p.add_argument("--algo-seed", type=int, default=None)
    p.set_defaults(func=cmd_sample, format="text")

    p = common(sub.add_parser("entropy-scan", help="Gibbs entropy against N"), "0.5,2.0")
    p.add_argument("--N", type=int_list, default=int_list("12,16,20"))
    p.set_defaults(func=cmd_entropy_scan)

    p = common(sub.add_parser("hardness", help="z-exceptional search experiment"), "1.5")
    p.add_argument("--N", type=int_list, default=int_list("8,12,16,20"))
    p.add_argument("--z", type=float_list, default=None, help="thresholds (default: calibrate)")
    p.add_argument("--pilot-N", type=int, default=16)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--searches", type=int, default=200)
    p.add_argument("--search-N", type=int, default=None)
    p.add_argument("--xs", type=float_list, default=float_list("0,2,4,6"))
    p.add_argument("--tail-N", type=int, default=None)
    p.add_argument("--tail-trials", type=int, default=0)
    p.set_defaults(func=cmd_hardness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError) as exc:
        print(f"brwgibbs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BrwError, ArithmeticError) as exc:
        print(f"brwgibbs: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"brwgibbs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
