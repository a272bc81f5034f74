"""Command-line front end: ``rcccd {generate,ensemble,consensus,evaluate,experiment}``.

Exit codes: 0 success, 1 input error (bad arguments, unreadable or
malformed files, invalid configuration), 2 runtime error (generation or
computation failure).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

from .benchgen import GenerationError, LfrConfig, generate_lfr
from .communities import Ensemble
from .consensus import K_STRATEGIES, ORPHAN_POLICIES, rc_ccd
from .experiments import (CONFIGS, MU_GRID, derive_seed, evaluate_partition, evaluate_rough_cover,
                          format_detector_spec, parse_detector_spec, rows_to_csv, run_ensemble, run_recipe)
from .formats import (atomic_write, read_cover, read_edge_list, read_lfr, read_rough_cover, write_cover, write_lfr,
                      write_rough_cover)

log = logging.getLogger("rcccd")

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _load_graph(path, index_base=None):
    path = Path(path)
    if path.is_dir():
        return read_lfr(path)[0]
    if path.name == "network.dat":
        return read_edge_list(path, index_base=1 if index_base is None else index_base)
    return read_edge_list(path, index_base=index_base)


def _load_ground_truth(path, node_count):
    path = Path(path)
    if path.is_dir():
        path = path / "community.dat"
    return read_cover(path, node_count)


# ---------------------------------------------------------------------------
# generate


def _read_config(spec) -> dict:
    if spec in CONFIGS:
        return {"base": spec}
    with open(spec, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{spec}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InputError(f"{spec}: expected a JSON object")
    return data


def cmd_generate(args) -> int:
    data = _read_config(args.config)
    base = data.pop("base", "small")
    if base not in CONFIGS:
        raise InputError(f"unknown base config {base!r}")
    grid = data.pop("mu_grid", None)
    known = {f.name for f in fields(LfrConfig)}
    unknown = set(data) - known
    if unknown:
        raise InputError(f"unknown config fields {sorted(unknown)}")
    cfg = CONFIGS[base].replace(**data)
    if args.mu:
        grid = args.mu
    elif grid is None:
        grid = [cfg.mu] if "mu" in data else list(MU_GRID)
    out = Path(args.out)
    nets = []
    for i, mu in enumerate(grid, start=1):
        seed = derive_seed(args.seed, "generate", i)
        c = cfg.replace(mu=float(mu), seed=seed)
        try:
            c.validate()
        except ValueError as exc:
            raise InputError(f"net{i}: {exc}") from None
        res = generate_lfr(c)
        write_lfr(out / f"net{i}", res.graph, res.ground_truth)
        meta = {"network": f"net{i}", "config": asdict(c), "realized_mu": res.realized_mu,
                "edges": res.graph.edge_count, "communities": len(res.ground_truth)}
        atomic_write(out / f"net{i}" / "meta.json", json.dumps(meta, indent=1, sort_keys=True) + "\n")
        nets.append(meta)
        log.info("net%d: mu=%.2f realized=%.3f m=%d", i, mu, res.realized_mu, res.graph.edge_count)
    atomic_write(out / "networks.json", json.dumps(nets, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ensemble


def cmd_ensemble(args) -> int:
    g = _load_graph(args.graph, args.index_base)
    detectors = parse_detector_spec(args.detectors)
    ens = run_ensemble(g, detectors, args.seed, args.workers)
    out = Path(args.out)
    dropped = {id(r) for r in ens.dropped(args.keep_trivial)}
    members = []
    for run in ens.runs:
        name = f"{run.detector}_{run.index:03d}.txt"
        write_cover(out / name, run.partition)
        members.append({"file": name, "detector": run.detector, "run": run.index, "seed": run.seed,
                        "communities": len(run.partition), "converged": run.converged, "sweeps": run.sweeps,
                        "modularity": run.modularity, "used": id(run) not in dropped})
    manifest = {
        "graph": str(Path(args.graph)),
        "node_count": g.node_count,
        "master_seed": args.seed,
        "detectors": format_detector_spec(detectors),
        "members": members,
        "dropped_trivial": [m["file"] for m in members if not m["used"]],
        "nonconverged": [m["file"] for m in members if not m["converged"]],
    }
    atomic_write(out / "manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    if manifest["nonconverged"]:
        log.warning("%d label propagation runs hit the sweep cap", len(manifest["nonconverged"]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# consensus


def _load_manifest(path, node_count, keep_trivial):
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})") from None
    members = manifest.get("members")
    if not members:
        raise InputError(f"{path}: manifest lists no members")
    covers = []
    for m in members:
        if not keep_trivial and not m.get("used", True):
            continue
        f = path.parent / m["file"]
        if not f.exists():
            raise InputError(f"manifest entry {m['file']} is missing")
        covers.append(read_cover(f, node_count))
    return Ensemble(covers)


def cmd_consensus(args) -> int:
    g = _load_graph(args.graph, args.index_base)
    ens = _load_manifest(args.manifest, g.node_count, args.keep_trivial)
    out = Path(args.out)
    for gamma in args.gamma:
        rc = rc_ccd(g, ens, beta=args.beta, gamma=gamma, coverage=args.coverage, k=args.k_override,
                    orphan_policy=args.orphan_policy, k_strategy=args.k_strategy)
        target = out if len(args.gamma) == 1 and out.suffix == ".json" else out / f"rough_cover_gamma{gamma:g}.json"
        write_rough_cover(target, rc)
        log.info("gamma=%g: k=%d q=%d -> %s", gamma, rc.params["k"], rc.params["q"], target)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate

METRICS = ("nmi", "k", "q", "core_accuracy", "overlap_tp", "overlap_fp", "pc_mean_predicted", "pc_mean_gt",
           "modularity")


def cmd_evaluate(args) -> int:
    g = _load_graph(args.graph, args.index_base)
    gt = _load_ground_truth(args.ground_truth, g.node_count)
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = set(wanted) - set(METRICS)
    if bad:
        raise InputError(f"unknown metrics {sorted(bad)}; choose from {list(METRICS)}")
    result = Path(args.result)
    if result.suffix == ".json":
        rc = read_rough_cover(result)
        if rc.node_count != g.node_count:
            raise InputError("rough cover and graph disagree on node count")
        scores = evaluate_rough_cover(rc, gt, g)
        params = rc.params
        algorithm = args.algorithm or "rc-ccd"
    else:
        scores = evaluate_partition(read_cover(result, g.node_count), gt, g)
        params = {}
        algorithm = args.algorithm or result.stem
    rows = [{"network": args.network, "algorithm": algorithm, "metric": m, "value": scores[m], "seed": args.seed,
             "beta": params.get("beta", ""), "gamma": params.get("gamma", ""), "mu": "" if args.mu is None else args.mu}
            for m in wanted if m in scores]
    text = rows_to_csv(rows)
    if args.out:
        out = Path(args.out)
        if out.exists() and args.append:
            text = out.read_text(encoding="utf-8") + text.split("\n", 1)[1]
        atomic_write(out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment


def cmd_experiment(args) -> int:
    report = run_recipe(args.recipe, args.out, args.seed, args.workers)
    for f in report.failures:
        log.warning("failed: %s %s seed=%s: %s", f["step"], f["network"], f["seed"], f["error"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rcccd", description="Rough-clustering consensus community detection.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--index-base", type=int, choices=(0, 1), default=None,
                        help="id base of edge-list input (default: file header, 1 for network.dat, else 0)")

    sp = sub.add_parser("generate", help="generate LFR-style benchmark networks")
    sp.add_argument("config", help="'small', 'large' or a JSON file of config fields (optional 'base', 'mu_grid')")
    sp.add_argument("--out", required=True, help="output directory (net1, net2, ... inside)")
    sp.add_argument("--mu", type=float, nargs="+", help="mixing values; overrides the config grid")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("ensemble", help="run base detectors and write a partition manifest")
    sp.add_argument("graph", help="edge list, network.dat or LFR directory")
    sp.add_argument("--detectors", default="lpa:10,louvain:10,greedy:1")
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--keep-trivial", action="store_true",
                    help="mark single-community runs as used (they are excluded by default)")
    common(sp)
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("consensus", help="compute the rough-cover consensus of an ensemble")
    sp.add_argument("graph")
    sp.add_argument("manifest")
    sp.add_argument("--beta", type=float, default=0.75)
    sp.add_argument("--gamma", type=float, nargs="+", default=[0.8])
    sp.add_argument("--coverage", type=float, default=0.9)
    sp.add_argument("--orphan-policy", choices=ORPHAN_POLICIES, default="argmax")
    sp.add_argument("--k-override", type=int, default=None)
    sp.add_argument("--k-strategy", choices=sorted(K_STRATEGIES), default="community-count")
    sp.add_argument("--keep-trivial", action="store_true", help="also use members marked unused")
    sp.add_argument("--out", required=True, help="a .json file (single gamma) or a directory")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_consensus)

    sp = sub.add_parser("evaluate", help="score a rough cover or partition against ground truth")
    sp.add_argument("result", help="rough-cover .json or partition file")
    sp.add_argument("ground_truth", help="community file or LFR directory")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--metrics", default="nmi,k,core_accuracy,overlap_tp,overlap_fp")
    sp.add_argument("--network", default="")
    sp.add_argument("--algorithm", default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--out", default=None, help="CSV file (default stdout)")
    sp.add_argument("--append", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("experiment", help="run a recipe and write a report directory")
    sp.add_argument("recipe", help="built-in recipe name or JSON recipe file")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("rcccd: error: --workers must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, ValueError, FileNotFoundError, IsADirectoryError, KeyError) as exc:
        print(f"rcccd: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GenerationError, RuntimeError, MemoryError) as exc:
        print(f"rcccd: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
