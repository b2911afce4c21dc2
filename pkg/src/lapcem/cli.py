"""Command line entry point: ``lapcem {search,verify,plotdata,list-conjectures}``."""

import argparse
import csv
import datetime as dt
import json
import logging
import math
import os
import sys
import threading
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._backend import backend_name
from .config import config_from_dict, config_to_dict, dump_config
from .conjectures import (
    CONJECTURE_IDS,
    DEFAULT_STRICT_TOL,
    CertificationRejected,
    evaluate,
    get_conjecture,
    list_conjectures,
    verify_counterexample,
)
from .engine import GenerationStats
from .errors import ConfigError, LapcemError, ParseError
from .formats import GRAPH6_MAX_N, read_graph_text, to_graph6
from .graph import component_count
from .parallel import run_parallel
from .policy import save_checkpoint

EXIT_FOUND = 0
EXIT_EXHAUSTED = 1
EXIT_NOT_VIOLATED = 1
EXIT_USAGE = 2

RUNS_ENV = "LAPCEM_RUNS_DIR"

log = logging.getLogger("lapcem")


def _fail(msg):
    print(f"lapcem: error: {msg}", file=sys.stderr)
    return EXIT_USAGE


# -- search ------------------------------------------------------------------

_FLAG_TO_FIELD = {
    "n": "n",
    "conjecture": "conjecture",
    "batch": "total_batch",
    "instances": "instances",
    "generations": "max_generations",
    "seed": "master_seed",
    "eigen_tol": "eigen_tol",
    "reward": "reward",
}
_GEN_FLAGS = {
    "seed_fraction": "seed_fraction",
    "epsilon": "epsilon_random_frac",
    "lr": "learning_rate",
    "elite_frac": "elite_learn_frac",
    "survive_frac": "elite_survive_frac",
    "hidden": "hidden_sizes",
}


def _run_dir(root: Path) -> Path:
    stamp = dt.datetime.now(dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    root.mkdir(parents=True, exist_ok=True)
    k = 0
    while True:
        path = root / (stamp if k == 0 else f"{stamp}-{k}")
        try:
            path.mkdir()
            return path
        except FileExistsError:
            k += 1


def _write_atomic(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def build_search_config(args):
    raw = {}
    if args.config:
        try:
            raw = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping")
    for flag, key in _FLAG_TO_FIELD.items():
        val = getattr(args, flag)
        if val is not None:
            raw[key] = val
    if args.no_halt:
        raw["halt_on_counterexample"] = False
    gen = dict(raw.get("generation") or {})
    for flag, key in _GEN_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            gen[key] = val
    if gen:
        raw["generation"] = gen
    if raw.get("reward") == "edge_count":
        raw.setdefault("conjecture", CONJECTURE_IDS[0])
    return config_from_dict(raw)


def cmd_search(args) -> int:
    try:
        cfg = build_search_config(args)
    except ConfigError as exc:
        return _fail(str(exc))

    root = Path(args.out or os.environ.get(RUNS_ENV) or "runs")
    run_dir = _run_dir(root)
    started = dt.datetime.now(dt.timezone.utc)
    (run_dir / "config.yaml").write_text(dump_config(cfg))
    csv_path = run_dir / "generations.csv"
    lock = threading.Lock()
    fh = open(csv_path, "w", newline="")
    writer = csv.DictWriter(fh, fieldnames=GenerationStats.CSV_FIELDS)
    writer.writeheader()

    def on_generation(inst, st):
        with lock:
            writer.writerow(st.csv_row())
            fh.flush()
        if not args.quiet and (st.generation % args.log_every == 0 or st.counterexample_found):
            log.info("gen %d inst %d best %.6f global %.6f", st.generation, st.instance_id,
                     st.best_reward, st.global_best_reward)

    log.info("run directory %s (kernels: %s)", run_dir, backend_name())
    try:
        result = run_parallel(cfg, on_generation=on_generation)
    finally:
        fh.close()

    outputs = {"config": "config.yaml", "generations": "generations.csv"}
    ce_files = []
    for k, rec in enumerate(result.counterexamples):
        name = f"counterexample_c{rec.conjecture}_{k}.txt"
        (run_dir / name).write_text(rec.to_text())
        ce_files.append(name)
    outputs["counterexamples"] = ce_files
    if args.checkpoints:
        (run_dir / "checkpoints").mkdir()
        outputs["checkpoints"] = []
        for i, net in sorted(result.networks.items()):
            name = f"checkpoints/instance_{i}.bin"
            save_checkpoint(net, run_dir / name)
            outputs["checkpoints"].append(name)
    g6 = None
    if result.best_graph is not None and result.best_graph.n <= GRAPH6_MAX_N:
        g6 = to_graph6(result.best_graph)
        (run_dir / "best_graph.g6").write_text(g6 + "\n")
        outputs["best_graph"] = "best_graph.g6"

    status = "counterexample found" if result.found else "budget exhausted"
    summary = [
        f"status: {status}",
        f"conjecture: {cfg.conjecture}" if cfg.reward == "conjecture" else "reward: edge_count",
        f"n: {cfg.n}",
        f"instances: {cfg.instances}",
        f"generations: {max((len(v) for v in result.stats.values()), default=0)}",
        f"best_reward: {result.best_reward!r}",
        f"best_graph6: {g6 or '-'}",
        f"counterexamples: {len(result.counterexamples)}",
        f"wall_seconds: {result.wall_time:.3f}",
    ]
    for i, msg in sorted(result.failures.items()):
        summary.append(f"instance {i} failed: {msg}")
    (run_dir / "summary.txt").write_text("\n".join(summary) + "\n")
    outputs["summary"] = "summary.txt"

    manifest = {
        "version": __version__,
        "kernels": backend_name(),
        "started": started.isoformat(),
        "finished": dt.datetime.now(dt.timezone.utc).isoformat(),
        "config": config_to_dict(cfg),
        "outputs": outputs,
        "result": {
            "status": status,
            "best_reward": result.best_reward if math.isfinite(result.best_reward) else None,
            "counterexamples": len(result.counterexamples),
            "failures": {str(k): v for k, v in result.failures.items()},
            "wall_seconds": result.wall_time,
        },
    }
    _write_atomic(run_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(run_dir)
    print(status)
    return EXIT_FOUND if result.found else EXIT_EXHAUSTED


# -- verify ------------------------------------------------------------------

def _export_conjecture(text):
    for line in text.splitlines():
        if line.startswith("conjecture:"):
            return int(line.split(":", 1)[1])
    return None


def cmd_verify(args) -> int:
    try:
        text = Path(args.graph).read_text()
    except OSError as exc:
        return _fail(f"cannot read {args.graph}: {exc}")
    try:
        g = read_graph_text(text)
    except (ParseError, ValueError) as exc:
        return _fail(f"{args.graph}: {exc}")
    if args.all:
        ids = list(CONJECTURE_IDS)
    elif args.conjecture:
        ids = args.conjecture
    else:
        cid = _export_conjecture(text)
        if cid is None:
            return _fail("give --conjecture ID (repeatable) or --all")
        ids = [cid]
    try:
        ids = [get_conjecture(c).id for c in ids]
    except ConfigError as exc:
        return _fail(str(exc))

    print(f"graph: n={g.n} edges={g.num_edges} graph6={to_graph6(g) if g.n <= GRAPH6_MAX_N else '-'}")
    connected = g.n >= 2 and component_count(g) == 1
    certified = []
    for cid in ids:
        if not connected:
            print(f"conjecture {cid:>2}: rejected (graph is disconnected)")
            continue
        rep = evaluate(cid, g, 1e-12)
        try:
            verify_counterexample(g, cid, args.strict_tol)
            verdict = "CERTIFIED"
            certified.append(cid)
        except CertificationRejected as exc:
            verdict = "argmax clamped" if exc.argmax_clamped else "not violated"
        witness = "~".join(str(v) for v in rep.argmax_witness)
        flag = " clamped" if rep.clamped else ""
        print(f"conjecture {cid:>2}: mu={rep.mu:.12f} bound={rep.bound:.12f} "
              f"margin={rep.margin:+.3e} witness={witness}{flag} -> {verdict}")
    if args.all:
        print("violated: " + (" ".join(str(c) for c in certified) or "none"))
    return 0 if len(certified) == len(ids) else EXIT_NOT_VIOLATED


# -- plotdata ----------------------------------------------------------------

def read_run_csv(path):
    """Per-instance ``{generation: global_best_reward}`` maps from a run CSV."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        for col in GenerationStats.CSV_FIELDS:
            if col not in cols:
                raise ParseError(f"{path}: missing column '{col}'")
        for col in cols:
            if col not in GenerationStats.CSV_FIELDS:
                raise ParseError(f"{path}: unexpected column '{col}'")
        series = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                inst = int(row["instance_id"])
                gen = int(row["generation"])
                val = float(row["global_best_reward"])
            except (TypeError, ValueError):
                raise ParseError(f"{path}: line {lineno}: bad value in column "
                                 f"'generation', 'instance_id' or 'global_best_reward'") from None
            series.setdefault(inst, {})[gen] = val
    return series


def _carry_forward(points: dict, length: int) -> np.ndarray:
    out = np.full(length, np.nan)
    last = np.nan
    for g in range(length):
        last = points.get(g, last)
        out[g] = last
    return out


def plot_series(paths, per_instance=False):
    runs = [read_run_csv(p) for p in paths]
    length = max((max(pts) + 1 for run in runs for pts in run.values() if pts), default=0)
    if per_instance:
        ids = sorted({i for run in runs for i in run})
        table = {}
        for i in ids:
            cols = [_carry_forward(run[i], length) for run in runs if i in run]
            table[i] = np.nanmean(np.vstack(cols), axis=0)
        return length, table
    per_run = []
    for run in runs:
        cols = np.vstack([_carry_forward(pts, length) for pts in run.values()])
        per_run.append(np.nanmax(cols, axis=0))
    return length, np.nanmean(np.vstack(per_run), axis=0)


def cmd_plotdata(args) -> int:
    if not args.csv:
        return _fail("plotdata needs at least one run CSV")
    try:
        length, series = plot_series(args.csv, args.per_instance)
    except (OSError, ParseError) as exc:
        return _fail(str(exc))
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out)
        if args.per_instance:
            w.writerow(["generation", "instance_id", "mean_global_best_reward", "runs"])
            for i, vals in series.items():
                for g in range(length):
                    w.writerow([g, i, repr(float(vals[g])), len(args.csv)])
        else:
            w.writerow(["generation", "mean_global_best_reward", "runs"])
            for g in range(length):
                w.writerow([g, repr(float(series[g])), len(args.csv)])
    finally:
        if args.output:
            out.close()
    return 0


def cmd_list(args) -> int:
    for spec in list_conjectures():
        print(spec)
    return 0


# -- parser ------------------------------------------------------------------

def _hidden(text):
    try:
        sizes = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers, e.g. 72,12") from None
    return sizes


def build_parser():
    p = argparse.ArgumentParser(prog="lapcem", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", help="run a parallel cross-entropy counterexample search")
    s.add_argument("--config", help="YAML config file; flags override its values")
    s.add_argument("--conjecture", type=int)
    s.add_argument("--n", type=int, help="vertex count")
    s.add_argument("--batch", type=int, help="total batch size, split across instances")
    s.add_argument("--instances", type=int)
    s.add_argument("--generations", type=int)
    s.add_argument("--seed", type=int, help="master seed")
    s.add_argument("--seed-fraction", type=float, help="share of each batch started from the incumbent")
    s.add_argument("--epsilon", type=float, help="share of each batch built with uniform random actions")
    s.add_argument("--lr", type=float)
    s.add_argument("--elite-frac", type=float)
    s.add_argument("--survive-frac", type=float)
    s.add_argument("--hidden", type=_hidden, help="hidden layer widths, e.g. 72,12")
    s.add_argument("--eigen-tol", type=float)
    s.add_argument("--reward", choices=["conjecture", "edge_count"])
    s.add_argument("--no-halt", action="store_true", help="keep searching after a certified find")
    s.add_argument("--checkpoints", action="store_true", help="save final policy networks")
    s.add_argument("--out", help=f"output root (default: ${RUNS_ENV} or ./runs)")
    s.add_argument("--log-every", type=int, default=25)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", help="certify a graph against catalog conjectures")
    v.add_argument("graph", help="adjacency-text, graph6 or counterexample export file")
    v.add_argument("--conjecture", type=int, action="append")
    v.add_argument("--all", action="store_true")
    v.add_argument("--strict-tol", type=float, default=DEFAULT_STRICT_TOL)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("plotdata", help="average best-reward curves over run CSVs")
    d.add_argument("csv", nargs="*")
    d.add_argument("--per-instance", action="store_true")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_plotdata)

    c = sub.add_parser("list-conjectures", help="print the conjecture catalog")
    c.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LapcemError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
