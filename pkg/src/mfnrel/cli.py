"""Command-line front end: ``run``, ``check``, ``bench`` and ``gen``.

Exit codes: 0 success, 1 validation or I/O error, 2 check failure,
3 budget or limit refusal.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from .model import (EdgeStateDistribution, Network, NetworkError, bridge_network,
                    network_document, parse_network, serialize_report,
                    uniform_distribution)
from .reliability import (BudgetExceeded, OracleLimitError, SweepTimeout,
                          all_levels_reliability, exhaustive_oracle, monte_carlo)

EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED, EXIT_REFUSED = 0, 1, 2, 3

ORACLE_TOL = 1e-9
MC_SIGMAS = 4.0
LOW_POWER_SAMPLES = 1000


@dataclass
class RunConfig:
    inputs: list[str]
    format: str = "csv"
    workers: int = 1
    budget_override: bool = False
    normalize: bool = False
    builtin: bool = False
    uniform: int | None = None
    samples: int = 100_000
    seed: int = 0
    limit: float | None = None
    native: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("--workers must be >= 1")
        if self.samples < 1:
            raise ValueError("--samples must be >= 1")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load(path: str, normalize: bool):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_network(text, normalize=True if normalize else None)


def _instances(cfg: RunConfig):
    """Yield ``(id, network, distribution)`` for every requested instance."""
    if cfg.builtin:
        net, dist = bridge_network()
        yield "bridge", net, dist
    for path in cfg.inputs:
        net, dist = _load(path, cfg.normalize)
        yield Path(path).stem if path != "-" else "stdin", net, dist


def _single(cfg: RunConfig):
    items = list(_instances(cfg))
    if len(items) != 1:
        raise NetworkError("expected exactly one input document (or --builtin)")
    _, net, dist = items[0]
    if cfg.uniform is not None:
        dist = uniform_distribution(net, cfg.uniform)
    return net, dist


def cmd_run(cfg: RunConfig) -> int:
    try:
        net, dist = _single(cfg)
        rep = all_levels_reliability(net, dist, workers=cfg.workers,
                                     budget_override=cfg.budget_override,
                                     time_limit=cfg.limit)
    except (NetworkError, OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    except (BudgetExceeded, SweepTimeout) as exc:
        _err(str(exc))
        return EXIT_REFUSED
    sys.stdout.write(serialize_report(rep, cfg.format))
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    try:
        net, dist = _single(cfg)
        oracle = exhaustive_oracle(net, dist)
        rep = all_levels_reliability(net, dist, workers=cfg.workers)
        mc = monte_carlo(net, dist, cfg.samples, cfg.seed)
    except (NetworkError, OSError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    except (OracleLimitError, BudgetExceeded) as exc:
        _err(f"instance too large for the exhaustive oracle: {exc}")
        return EXIT_REFUSED

    print(f"d_max engine={rep.d_max} oracle={oracle.d_max}")
    if rep.d_max != oracle.d_max:
        print("FAIL")
        return EXIT_CHECK_FAILED
    low_power = cfg.samples < LOW_POWER_SAMPLES
    mc_ok = True
    print("d,R_engine,R_oracle,delta,R_mc,std_err,mc_sigmas")
    max_delta = abs(rep.pr_disconnected - oracle.pr_disconnected)
    for d in range(1, rep.d_max + 1):
        R, R_or = rep.R[d - 1], oracle.R[d - 1]
        delta = max(abs(R - R_or), abs(rep.r[d - 1] - oracle.r[d - 1]))
        max_delta = max(max_delta, delta)
        est, se = mc.estimates[d - 1], mc.std_errors[d - 1]
        # exact-value binomial error guards the R_hat in {0, 1} case
        bound = max(se, math.sqrt(R * (1.0 - R) / cfg.samples))
        sig = abs(est - R) / bound if bound > 0 else (0.0 if est == R else math.inf)
        if sig > MC_SIGMAS:
            mc_ok = False
        print(f"{d},{R:.9f},{R_or:.9f},{delta:.3e},{est:.6f},{se:.3e},{sig:.2f}")
    ok = max_delta <= ORACLE_TOL
    print(f"oracle max delta {max_delta:.3e} ({'ok' if max_delta <= ORACLE_TOL else 'FAIL'})")
    if low_power:
        print(f"monte-carlo: LOW-POWER ({cfg.samples} samples < {LOW_POWER_SAMPLES}), "
              f"not used for the verdict")
    else:
        print(f"monte-carlo: {cfg.samples} samples, seed {cfg.seed}, {mc.generator} "
              f"({'ok' if mc_ok else 'FAIL'})")
        ok = ok and mc_ok
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


BENCH_FIELDS = ["id", "n", "m", "d_max", "x_fc", "elapsed_s", "n_total", "n_processed",
                "r_1", "r_2", "r_3", "r_4", "status"]


def cmd_bench(cfg: RunConfig) -> int:
    rows = []
    try:
        instances = list(_instances(cfg))
    except (NetworkError, OSError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    for ident, net, dist in instances:
        if not cfg.native:
            dist = uniform_distribution(net, cfg.uniform if cfg.uniform is not None else 4)
        row = dict.fromkeys(BENCH_FIELDS, "")
        row.update(id=ident, n=net.n, m=net.m, n_total=math.prod(dist.radices))
        try:
            rep = all_levels_reliability(net, dist, workers=cfg.workers,
                                         budget_override=cfg.budget_override,
                                         time_limit=cfg.limit)
        except SweepTimeout:
            row["status"] = "TIMEOUT"
        except BudgetExceeded:
            row["status"] = "BUDGET"
        else:
            row.update(d_max=rep.d_max, elapsed_s=f"{rep.elapsed:.3f}",
                       n_processed=rep.n_processed, status="OK",
                       x_fc="(" + ",".join(map(str, rep.x_fc)) + ")" if rep.x_fc else "")
            for d in range(1, 5):
                if d <= rep.d_max:
                    row[f"r_{d}"] = f"{rep.r[d - 1]:.9f}"
        rows.append(row)
    if cfg.format == "json":
        print(json.dumps(rows, indent=1))
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, BENCH_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def generate_network(n: int, m: int, max_state: int, seed: int,
                     dist_kind: str = "uniform") -> tuple[Network, EdgeStateDistribution]:
    """Random connected simple network, deterministic per seed."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    bound = n * (n - 1) // 2
    if m > bound:
        raise ValueError(f"m={m} exceeds the simple-graph bound {bound} for n={n}")
    if m < n - 1:
        raise ValueError(f"m={m} is too small to connect {n} vertices")
    if max_state < 1:
        raise ValueError(f"max_state must be >= 1, got {max_state}")
    rng = random.Random(seed)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    rest = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if (u, v) not in edges]
    edges.update(rng.sample(rest, m - len(edges)))
    net = Network(n, tuple(sorted(edges)))
    if dist_kind == "uniform":
        dist = uniform_distribution(net, max_state)
    elif dist_kind == "random":
        rows = []
        for _ in range(net.m):
            w = [rng.random() + 0.05 for _ in range(max_state + 1)]
            rows.append(tuple(x / math.fsum(w) for x in w))
        dist = EdgeStateDistribution(tuple(rows))
    else:
        raise ValueError(f"unknown distribution kind {dist_kind!r}")
    return net, dist


def cmd_gen(args) -> int:
    try:
        net, dist = generate_network(args.n, args.m, args.max_state, args.seed, args.dist)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INVALID
    print(network_document(net, dist))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mfnrel",
                                description="All-levels reliability of multistate flow networks")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, many=False):
        sp.add_argument("inputs", nargs="*" if many else "?", default=[],
                        help="network document(s); '-' reads stdin")
        sp.add_argument("--builtin", action="store_true", help="use the built-in bridge network")
        sp.add_argument("--format", choices=("json", "csv"), default="csv")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--uniform", type=int, metavar="MAX_STATE",
                        help="replace distributions by uniform states 0..MAX_STATE")
        sp.add_argument("--normalize", action="store_true",
                        help="rescale distributions that do not sum to 1")
        sp.add_argument("--budget-override", action="store_true")

    run = sub.add_parser("run", help="compute all-levels reliability")
    common(run)
    run.add_argument("--limit", type=float, help="wall-clock limit in seconds")

    check = sub.add_parser("check", help="compare engine with the oracle and Monte-Carlo")
    common(check)
    check.add_argument("--samples", type=int, default=100_000)
    check.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("bench", help="timing table over benchmark instances")
    common(bench, many=True)
    bench.add_argument("--limit", type=float, default=3600.0)
    bench.add_argument("--native", action="store_true",
                       help="keep document distributions instead of uniform states")

    gen = sub.add_parser("gen", help="emit a random connected network document")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--max-state", type=int, default=2)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--dist", choices=("uniform", "random"), default="uniform")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        return cmd_gen(args)
    inputs = args.inputs if isinstance(args.inputs, list) else [args.inputs] if args.inputs else []
    try:
        cfg = RunConfig(inputs=inputs, format=args.format, workers=args.workers,
                        budget_override=args.budget_override, normalize=args.normalize,
                        builtin=args.builtin, uniform=args.uniform,
                        samples=getattr(args, "samples", 100_000),
                        seed=getattr(args, "seed", 0), limit=getattr(args, "limit", None),
                        native=getattr(args, "native", False))
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INVALID
    if args.command == "bench" and not cfg.inputs:
        cfg.builtin = True
    handler = {"run": cmd_run, "check": cmd_check, "bench": cmd_bench}[args.command]
    return handler(cfg)


if __name__ == "__main__":
    sys.exit(main())
