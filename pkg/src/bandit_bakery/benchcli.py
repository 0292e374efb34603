"""Command-line benchmark harness (``bandit-bakery``).

Subcommands:

* ``run``    -- one algorithm on one dataset, one JSONL record out,
* ``sweep``  -- hyperparameter grid x datasets x seeds, parallel workers,
  deterministically sorted JSONL out,
* ``report`` -- win/loss matrices, best-learning-rate tables, or
  counterfactual-error summaries from result records.

Sweep output is a pure function of (datasets, grid, seeds): records are
sorted by config fingerprint and, unless ``--timing`` is given, carry a
null wall time, so re-runs and different worker counts are byte-identical.
``BANDIT_BAKERY_THREADS`` overrides ``--workers``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import evalkit
from .dataspace import COST_SENSITIVE, ADF, Encoding, parse_dataset, shuffle
from .explorers import ALGORITHMS, ExplorerConfig, run
from .evalkit import DatasetFilter, RunSummary, cf_ips_uniform, win_loss_matrix

SCHEMA_VERSION = 1
ENCODING_NAMES = ("0/1", "-1/0", "9/10")
CLI_ALGORITHMS = ALGORITHMS + ("oaa",)

# Grid defaults: a 9-point logarithmic learning-rate ladder (factor
# 10^(1/2)) and the per-algorithm hyperparameter choices swept by the
# harness. ``FIXED_DEFAULTS`` holds the recommended fixed choices.
LEARNING_RATES = (0.001, 0.00316, 0.01, 0.0316, 0.1, 0.316, 1.0, 3.16, 10.0)


@dataclass(frozen=True)
class SweepGrid:
    learning_rates: tuple = LEARNING_RATES
    reductions: tuple = ("ips", "dr", "iwr")
    epsilons: tuple = (0.02, 0.05, 0.1)
    active_epsilons: tuple = (0.02, 1.0)
    bag_sizes: tuple = (4, 8, 16)
    cover_sizes: tuple = (4, 8, 16)
    psis: tuple = (0.01, 0.1, 1.0)
    regcb_c0s: tuple = (1e-1, 1e-2, 1e-3)
    active_c0s: tuple = (1e-2, 1e-4, 1e-6)
    baselines: tuple = (False,)


FIXED_DEFAULTS = {
    "greedy": {"reduction": "iwr"},
    "egreedy": {"epsilon": 0.02, "reduction": "iwr"},
    "active": {"epsilon": 0.02, "c0": 1e-6, "reduction": "iwr"},
    "bag": {"n_policies": 4, "reduction": "iwr"},
    "bag-greedy": {"n_policies": 4, "reduction": "iwr"},
    "cover": {"n_policies": 4, "psi": 0.1, "reduction": "ips"},
    "cover-nu": {"n_policies": 4, "psi": 0.1, "reduction": "dr"},
    "regcb-opt": {"c0": 1e-3},
    "regcb-elim": {"c0": 1e-3},
    "oaa": {},
}


def algo_param_grid(algo: str, grid: SweepGrid, fixed: bool):
    """Hyperparameter combinations for one algorithm, in documented order.

    ``fixed`` restricts to the recommended fixed choices (the learning
    rate is always swept separately).
    """
    if fixed or algo in ("greedy", "oaa"):
        yield dict(FIXED_DEFAULTS[algo])
        return
    if algo == "egreedy":
        for eps in grid.epsilons:
            for red in grid.reductions:
                yield {"epsilon": eps, "reduction": red}
    elif algo == "active":
        for eps in grid.active_epsilons:
            for c0 in grid.active_c0s:
                for red in grid.reductions:
                    yield {"epsilon": eps, "c0": c0, "reduction": red}
    elif algo in ("bag", "bag-greedy"):
        for n in grid.bag_sizes:
            for red in grid.reductions:
                yield {"n_policies": n, "reduction": red}
    elif algo in ("cover", "cover-nu"):
        for n in grid.cover_sizes:
            for psi in grid.psis:
                for red in ("ips", "dr"):
                    yield {"n_policies": n, "psi": psi, "reduction": red}
    elif algo in ("regcb-opt", "regcb-elim"):
        for c0 in grid.regcb_c0s:
            yield {"c0": c0}
    else:
        raise ValueError(f"unknown algorithm {algo!r}")


def fingerprint(identity: dict) -> str:
    blob = json.dumps(identity, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode()).hexdigest()[:16]


def _load_dataset(path: str, shuffle_seed: int | None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise RuntimeError(f"cannot read dataset {path}: {exc}") from exc
    ds = parse_dataset(text, name=os.path.basename(path))
    if shuffle_seed is not None:
        ds = shuffle(ds, shuffle_seed)
    return ds


def best_oaa_loss(ds, learning_rates=LEARNING_RATES, seed: int = 0) -> float:
    """Supervised baseline PV at its best learning rate on this ordering."""
    return min(evalkit.oaa_run(ds, lr, seed=seed) for lr in learning_rates)


def execute_run(spec: dict) -> dict:
    """Run one configuration and build its result record.

    Any exception becomes an error record so sweeps keep going.
    """
    identity = {k: spec[k] for k in
                ("dataset", "algo", "params", "encoding", "lr", "seed",
                 "shuffle_seed", "baseline")}
    fp = fingerprint(identity)
    try:
        started = time.perf_counter()
        ds = _load_dataset(spec["path"], spec["shuffle_seed"])
        enc = Encoding.from_string(spec["encoding"])
        pv_oaa = spec.get("pv_oaa")
        if pv_oaa is None:
            pv_oaa = best_oaa_loss(ds)
        if spec["algo"] == "oaa":
            pv = evalkit.oaa_run(ds, spec["lr"], seed=spec["seed"])
            cf_reward = cf_loss = None
        else:
            cfg = ExplorerConfig(algo=spec["algo"], eta=spec["lr"],
                                 encoding=enc, baseline=spec["baseline"],
                                 seed=spec["seed"],
                                 **{k: v for k, v in spec["params"].items()})
            trace = run(ds, cfg)
            pv = evalkit.pv_loss(trace)
            if ds.binary_costs:
                cf_reward = cf_ips_uniform(trace, ds.n_actions, "reward").squared_error
                cf_loss = cf_ips_uniform(trace, ds.n_actions, "loss").squared_error
            else:
                cf_reward = cf_loss = None
        norm = evalkit.normalized_loss(pv, pv_oaa)
        elapsed = time.perf_counter() - started
        record = {
            "schema": SCHEMA_VERSION,
            "fingerprint": fp,
            "dataset": spec["dataset"],
            "kind": ds.kind,
            "algo": spec["algo"],
            "params": spec["params"],
            "reduction": spec["params"].get("reduction", "none"),
            "encoding": spec["encoding"],
            "baseline": spec["baseline"],
            "lr": spec["lr"],
            "seed": spec["seed"],
            "shuffle_seed": spec["shuffle_seed"],
            "n": len(ds),
            "K": ds.n_actions,
            "n_features": ds.n_features,
            "pv_loss": pv,
            "pv_oaa": pv_oaa,
            "normalized_loss": norm.value,
            "normalized_degenerate": norm.degenerate,
            "cf_sqerr_reward": cf_reward,
            "cf_sqerr_loss": cf_loss,
            "wall_time": elapsed if spec.get("timing") else None,
        }
        return record
    except Exception as exc:  # noqa: BLE001 - error records keep sweeps alive
        return {"schema": SCHEMA_VERSION, "fingerprint": fp, "error": str(exc),
                **identity}


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


# ---------------------------------------------------------------------------
# run subcommand
# ---------------------------------------------------------------------------


def _run_params_from_args(args) -> dict:
    algo = args.algo
    params = dict(FIXED_DEFAULTS[algo])
    if args.epsilon is not None and algo in ("egreedy", "active"):
        params["epsilon"] = args.epsilon
    if args.bag_size is not None and algo in ("bag", "bag-greedy"):
        params["n_policies"] = args.bag_size
    if args.cover_size is not None and algo in ("cover", "cover-nu"):
        params["n_policies"] = args.cover_size
    if args.psi is not None and algo in ("cover", "cover-nu"):
        params["psi"] = args.psi
    if args.c0 is not None and algo in ("active", "regcb-opt", "regcb-elim"):
        params["c0"] = args.c0
    if args.reduction is not None and "reduction" in params:
        params["reduction"] = args.reduction
    return params


def cmd_run(args) -> int:
    params = _run_params_from_args(args)
    spec = {
        "path": args.data,
        "dataset": os.path.basename(args.data),
        "algo": args.algo,
        "params": params,
        "encoding": args.encoding,
        "baseline": args.baseline,
        "lr": args.lr,
        "seed": args.seed,
        "shuffle_seed": args.shuffle_seed,
        "timing": True,
    }
    record = execute_run(spec)
    if "error" in record:
        print(f"error: {record['error']}", file=sys.stderr)
        return 1
    out = open(args.out, "a", encoding="utf-8") if args.out else sys.stdout
    try:
        print(_dump(record), file=out)
    finally:
        if args.out:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# sweep subcommand
# ---------------------------------------------------------------------------


def enumerate_sweep(args, grid: SweepGrid) -> list:
    """All run specs, nested loop order: dataset, shuffle, algo, encoding,
    hyperparameters, learning rate, seed."""
    specs = []
    fixed = args.grid == "fixed"
    for path in args.data:
        name = os.path.basename(path)
        with open(path, encoding="utf-8") as fh:
            kind = parse_dataset(fh.read()).kind
        if args.shuffle_seeds is not None:
            shuffles = args.shuffle_seeds
        elif kind in (COST_SENSITIVE, ADF):
            shuffles = list(range(10))
        else:
            shuffles = [0]
        for shuffle_seed in shuffles:
            for algo in args.algos:
                for encoding in args.encodings:
                    for params in algo_param_grid(algo, grid, fixed):
                        for baseline in grid.baselines:
                            for lr in grid.learning_rates:
                                for seed in args.seeds:
                                    specs.append({
                                        "path": path,
                                        "dataset": name,
                                        "algo": algo,
                                        "params": params,
                                        "encoding": encoding,
                                        "baseline": baseline,
                                        "lr": lr,
                                        "seed": seed,
                                        "shuffle_seed": shuffle_seed,
                                        "timing": args.timing,
                                    })
    return specs


def cmd_sweep(args) -> int:
    grid = SweepGrid(
        learning_rates=args.lr_grid or LEARNING_RATES,
        baselines=(False, True) if args.baseline_grid else (False,),
    )
    specs = enumerate_sweep(args, grid)

    # The supervised baseline is shared by every record of one ordering.
    oaa_cache = {}
    for spec in specs:
        key = (spec["path"], spec["shuffle_seed"])
        if key not in oaa_cache:
            try:
                ds = _load_dataset(spec["path"], spec["shuffle_seed"])
                oaa_cache[key] = best_oaa_loss(ds, grid.learning_rates)
            except Exception:  # noqa: BLE001 - recorded per run instead
                oaa_cache[key] = None
        spec["pv_oaa"] = oaa_cache[key]

    workers = int(os.environ.get("BANDIT_BAKERY_THREADS", args.workers))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(execute_run, specs, chunksize=1))
    else:
        records = [execute_run(spec) for spec in specs]

    records.sort(key=lambda r: (r["fingerprint"], _dump(r)))
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for record in records:
            print(_dump(record), file=out)
    finally:
        if args.out:
            out.close()
    failures = sum(1 for r in records if "error" in r)
    if failures:
        print(f"{failures}/{len(records)} runs failed; error records kept",
              file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# report subcommand
# ---------------------------------------------------------------------------


def load_records(paths) -> list:
    records = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    return [r for r in records if "error" not in r]


def parse_filter_expr(text: str) -> dict:
    """Parse ``actions>=5,examples>=1000,oaa<=0.1`` style filter strings."""
    ops = {}
    for clause in text.split(","):
        clause = clause.strip()
        if not clause:
            continue
        if ">=" in clause:
            key, value = clause.split(">=")
            ops[f"min_{key.strip()}"] = float(value)
        elif "<=" in clause:
            key, value = clause.split("<=")
            ops[f"max_{key.strip()}"] = float(value)
        else:
            raise SystemExit(f"bad filter clause {clause!r}")
    return ops


def build_filter(args) -> DatasetFilter:
    ops = {"min_actions": args.min_actions, "min_features": args.min_features,
           "min_examples": args.min_examples, "max_oaa": args.max_oaa}
    if args.filters:
        extra = parse_filter_expr(args.filters)
        rename = {"min_actions": "min_actions", "min_features": "min_features",
                  "min_examples": "min_examples", "max_oaa": "max_oaa"}
        for key, value in extra.items():
            if key not in rename:
                raise SystemExit(f"unknown filter key {key!r}")
            ops[key] = value
    return DatasetFilter(min_actions=int(ops["min_actions"]),
                         min_features=int(ops["min_features"]),
                         min_examples=int(ops["min_examples"]),
                         max_oaa=ops["max_oaa"])


def select_best_lr(records) -> list:
    """Keep, per (dataset, shuffle, method), the record with lowest PV
    (ties broken toward the smaller learning rate)."""
    best = {}
    for r in records:
        key = (r["dataset"], r["shuffle_seed"], _method_key(r))
        cur = best.get(key)
        if cur is None or (r["pv_loss"], r["lr"]) < (cur["pv_loss"], cur["lr"]):
            best[key] = r
    return list(best.values())


def _method_key(record: dict) -> str:
    return record["algo"]


def _summaries(records) -> list:
    return [RunSummary(dataset=r["dataset"], method=_method_key(r),
                       pv_loss=r["pv_loss"], n_rounds=r["n"],
                       n_actions=r["K"], n_features=r["n_features"],
                       pv_oaa=r["pv_oaa"]) for r in records]


def report_matrix(records, args, out) -> None:
    binary = [r for r in records if r["kind"] in ("multiclass", "multilabel")]
    real_valued = [r for r in records if r["kind"] not in
                   ("multiclass", "multilabel")]
    best = select_best_lr(binary)
    methods, matrix, skipped = win_loss_matrix(
        _summaries(best), dataset_filter=build_filter(args))
    if not methods and not real_valued:
        raise SystemExit("no datasets matched the filters")
    if args.format == "json":
        payload = {
            "methods": methods,
            "entries": {f"{a}|{b}": {"wins": e.wins, "losses": e.losses,
                                     "difference": e.difference}
                        for (a, b), e in matrix.items()},
            "skipped": [list(s) for s in sorted(set(skipped))],
            "cost_sensitive": _cs_summary(real_valued),
        }
        print(json.dumps(payload, sort_keys=True, indent=2), file=out)
        return
    if methods:
        print("method," + ",".join(methods), file=out)
        for a in methods:
            cells = []
            for b in methods:
                if a == b:
                    cells.append("-")
                else:
                    e = matrix[(a, b)]
                    cells.append(f"{e.wins}/{e.losses}")
            print(f"{a}," + ",".join(cells), file=out)
    cs = _cs_summary(real_valued)
    if cs:
        print("", file=out)
        print("# cost-sensitive datasets: mean pv +/- stderr over reshuffles",
              file=out)
        print("dataset,method,mean_pv,stderr,n_shuffles", file=out)
        for row in cs:
            print("{dataset},{method},{mean:.6f},{stderr:.6f},{count}"
                  .format(**row), file=out)
    for ds_name, a, b in sorted(set(skipped)):
        print(f"# skipped {ds_name} for pair {a} vs {b} (missing run)",
              file=sys.stderr)


def _cs_summary(records) -> list:
    """Mean +/- standard error over reshuffles, per real-valued dataset."""
    best = select_best_lr(records)
    grouped = {}
    for r in best:
        grouped.setdefault((r["dataset"], _method_key(r)), []).append(
            r["pv_loss"])
    rows = []
    for (ds_name, method), pvs in sorted(grouped.items()):
        arr = np.asarray(pvs)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        rows.append({"dataset": ds_name, "method": method,
                     "mean": float(arr.mean()), "stderr": stderr,
                     "count": len(arr)})
    return rows


def report_best_lr(records, args, out) -> None:
    best = select_best_lr(records)
    best.sort(key=lambda r: (r["dataset"], r["shuffle_seed"], r["algo"]))
    if not best:
        raise SystemExit("no datasets matched the filters")
    if args.format == "json":
        print(json.dumps(best, sort_keys=True, indent=2), file=out)
        return
    print("dataset,shuffle_seed,method,encoding,lr,pv_loss,pv_oaa,"
          "normalized_loss", file=out)
    for r in best:
        print(f"{r['dataset']},{r['shuffle_seed']},{r['algo']},"
              f"{r['encoding']},{r['lr']:g},{r['pv_loss']:.6f},"
              f"{r['pv_oaa']:.6f},{r['normalized_loss']:.6f}", file=out)


def report_cf_error(records, args, out) -> None:
    key = "cf_sqerr_reward" if args.cf_mode == "reward" else "cf_sqerr_loss"
    best = [r for r in select_best_lr(records) if r.get(key) is not None]
    if not best:
        raise SystemExit("no datasets matched the filters")
    grouped = {}
    for r in best:
        grouped.setdefault(_method_key(r), []).append(r[key])
    rows = []
    for method, errors in sorted(grouped.items()):
        q1, med, q3 = np.percentile(errors, [25, 50, 75])
        rows.append({"method": method, "q1": float(q1), "median": float(med),
                     "q3": float(q3), "n": len(errors)})
    if args.format == "json":
        print(json.dumps(rows, sort_keys=True, indent=2), file=out)
        return
    print("method,q1,median,q3,n", file=out)
    for row in rows:
        print(f"{row['method']},{row['q1']:.3e},{row['median']:.3e},"
              f"{row['q3']:.3e},{row['n']}", file=out)


def cmd_report(args) -> int:
    records = load_records(args.records)
    if not records:
        raise SystemExit("no records loaded")
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.mode == "matrix":
            report_matrix(records, args, out)
        elif args.mode == "best-lr":
            report_best_lr(records, args, out)
        else:
            report_cf_error(records, args, out)
    finally:
        if args.out:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _float_list(text: str) -> tuple:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("learning rates must be positive")
    return values


def _encoding_list(text: str) -> list:
    names = [tok.strip() for tok in text.split(",") if tok.strip()]
    for name in names:
        if name not in ENCODING_NAMES:
            raise argparse.ArgumentTypeError(f"unknown encoding {name!r}")
    if not names:
        raise argparse.ArgumentTypeError("need at least one encoding")
    return names


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--encoding", choices=ENCODING_NAMES, default="-1/0",
                   help="loss encoding offset (use --encoding=-1/0 form)")
    p.add_argument("--baseline", action="store_true",
                   help="enable the shared additive baseline term")
    p.add_argument("--seed", type=int, default=0, help="run seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandit-bakery",
        description="Contextual bandit algorithms on simulated bandit "
                    "feedback from supervised datasets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single run, one JSONL record")
    p_run.add_argument("--algo", required=True, choices=CLI_ALGORITHMS)
    p_run.add_argument("--data", required=True, help="dataset text file")
    p_run.add_argument("--lr", type=float, default=0.5, help="learning rate")
    p_run.add_argument("--reduction", choices=("ips", "dr", "iwr"))
    p_run.add_argument("--epsilon", type=float)
    p_run.add_argument("--bag-size", type=int)
    p_run.add_argument("--cover-size", type=int)
    p_run.add_argument("--psi", type=float)
    p_run.add_argument("--c0", type=float)
    p_run.add_argument("--shuffle-seed", type=int, default=0)
    p_run.add_argument("--out", help="append the record here instead of stdout")
    _add_common_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid sweep, sorted JSONL out")
    p_sweep.add_argument("--data", required=True, nargs="+",
                         help="dataset text files")
    p_sweep.add_argument("--algos", nargs="+", default=list(ALGORITHMS),
                         choices=CLI_ALGORITHMS)
    p_sweep.add_argument("--grid", choices=("full", "fixed"), default="full",
                         help="full per-algorithm grids, or the recommended "
                              "fixed hyperparameters (lr always swept)")
    p_sweep.add_argument("--encodings", type=_encoding_list,
                         default=["-1/0"],
                         help="comma-separated, e.g. --encodings=-1/0,0/1")
    p_sweep.add_argument("--lr-grid", type=_float_list, default=None,
                         help="comma-separated learning rates replacing the "
                              "default 9-point ladder")
    p_sweep.add_argument("--seeds", type=int, nargs="+", default=[0])
    p_sweep.add_argument("--shuffle-seeds", type=int, nargs="+", default=None,
                         help="default: one ordering for binary-cost data, "
                              "10 reshuffles for real-valued costs")
    p_sweep.add_argument("--baseline-grid", action="store_true",
                         help="sweep the baseline flag too (off and on)")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--timing", action="store_true",
                         help="record wall times (forfeits byte-identical "
                              "re-runs)")
    p_sweep.add_argument("--out", help="write JSONL here instead of stdout")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("report", help="tables from result records")
    p_rep.add_argument("records", nargs="+", help="JSONL result files")
    p_rep.add_argument("--mode", choices=("matrix", "best-lr", "cf-error"),
                       default="matrix")
    p_rep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_rep.add_argument("--cf-mode", choices=("reward", "loss"),
                       default="reward")
    p_rep.add_argument("--min-actions", type=int, default=0)
    p_rep.add_argument("--min-features", type=int, default=0)
    p_rep.add_argument("--min-examples", type=int, default=0)
    p_rep.add_argument("--max-oaa", type=float, default=math.inf)
    p_rep.add_argument("--filters",
                       help="compact form, e.g. 'actions>=5,oaa<=0.1'")
    p_rep.add_argument("--out")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
