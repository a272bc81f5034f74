"""Seeded ensembles, evaluation rows and batch recipes.

Every random quantity is derived from one master seed through
:class:`numpy.random.SeedSequence` spawn keys, so rerunning a recipe with the
same master seed reproduces every CSV byte for byte, with or without worker
processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
import zlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .benchgen import LARGE_CONFIG, SMALL_CONFIG, LfrConfig, generate_lfr
from .communities import Cover, Ensemble, Partition, RoughCover, crisp_projection, overlapping_nodes
from .consensus import rc_ccd
from .detectors import greedy_modularity, label_propagation, louvain, modularity
from .formats import atomic_write, read_cover
from .graph import Graph
from .metrics import core_accuracy, mean_participation, overlap_confusion, overlapping_nmi

__all__ = [
    "CSV_COLUMNS",
    "DEFAULT_DETECTORS",
    "MU_GRID",
    "BUILTIN_RECIPES",
    "DetectorRun",
    "EnsembleRun",
    "derive_seed",
    "parse_detector_spec",
    "format_detector_spec",
    "run_ensemble",
    "evaluate_rough_cover",
    "evaluate_partition",
    "load_recipe",
    "run_recipe",
    "rows_to_csv",
]

CSV_COLUMNS = ("network", "algorithm", "metric", "value", "seed", "beta", "gamma", "mu", "runs", "replication")
DEFAULT_DETECTORS = (("lpa", 10), ("louvain", 10), ("greedy", 1))
MU_GRID = tuple(round(0.1 + 0.05 * i, 2) for i in range(11))
BASE_ALGORITHMS = ("lpa", "greedy", "louvain")
CONFIGS = {"small": SMALL_CONFIG, "large": LARGE_CONFIG}


def derive_seed(master: int, *key) -> int:
    """32-bit seed for the stream named by ``key`` under ``master``.

    Key parts may be ints or strings; strings are hashed with CRC32.
    """
    spawn = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in key)
    return int(np.random.SeedSequence(int(master), spawn_key=spawn).generate_state(1)[0])


def parse_detector_spec(spec: str) -> tuple[tuple[str, int], ...]:
    """Parse ``"lpa:10,louvain:10,greedy:1"``; a bare name means one run."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, count = part.partition(":")
        name = name.strip()
        if name not in _RUNNERS:
            raise ValueError(f"unknown detector {name!r}; choose from {sorted(_RUNNERS)}")
        try:
            runs = int(count) if count else 1
        except ValueError:
            raise ValueError(f"bad run count in {part!r}") from None
        if runs < 0:
            raise ValueError(f"negative run count in {part!r}")
        out.append((name, runs))
    return tuple(out)


def format_detector_spec(detectors) -> str:
    return ",".join(f"{name}:{runs}" for name, runs in detectors)


@dataclass(frozen=True)
class DetectorRun:
    detector: str
    index: int
    seed: int
    partition: Partition
    converged: bool = True
    sweeps: int | None = None
    modularity: float | None = None

    @property
    def trivial(self) -> bool:
        """A single community carries no co-membership information."""
        return len(self.partition) <= 1


def _run_lpa(g, seed):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        part, info = label_propagation(g, seed, full_output=True)
    return part, info.converged, info.sweeps


_RUNNERS = {
    "lpa": _run_lpa,
    "louvain": lambda g, seed: (louvain(g, seed), True, None),
    "greedy": lambda g, seed: (greedy_modularity(g), True, None),
}


def _detect(args) -> DetectorRun:
    g, name, index, seed = args
    part, converged, sweeps = _RUNNERS[name](g, seed)
    q = modularity(g, part) if g.edge_count else None
    return DetectorRun(name, index, seed, part, converged, sweeps, q)


def _map(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


@dataclass(frozen=True)
class EnsembleRun:
    """All detector runs on one graph, in spec order."""

    runs: tuple[DetectorRun, ...]

    def members(self, keep_trivial: bool = False) -> list[DetectorRun]:
        """Runs entering the consensus; single-community runs are left out unless all runs are."""
        if keep_trivial:
            return list(self.runs)
        kept = [r for r in self.runs if not r.trivial]
        return kept or list(self.runs)

    def ensemble(self, keep_trivial: bool = False) -> Ensemble:
        return Ensemble([r.partition for r in self.members(keep_trivial)])

    def dropped(self, keep_trivial: bool = False) -> list[DetectorRun]:
        kept = {id(r) for r in self.members(keep_trivial)}
        return [r for r in self.runs if id(r) not in kept]

    def best(self, detector: str) -> DetectorRun | None:
        """The run of ``detector`` with the highest modularity, earliest on ties."""
        runs = [r for r in self.runs if r.detector == detector]
        if not runs:
            return None
        return max(runs, key=lambda r: (r.modularity if r.modularity is not None else -math.inf, -r.index))


def run_ensemble(g: Graph, detectors=DEFAULT_DETECTORS, seed: int = 0, workers: int = 1) -> EnsembleRun:
    """Run every detector the requested number of times with derived seeds."""
    if isinstance(detectors, str):
        detectors = parse_detector_spec(detectors)
    tasks = [(g, name, i, derive_seed(seed, name, i)) for name, runs in detectors for i in range(runs)]
    if not tasks:
        raise ValueError("the detector spec requests no runs")
    return EnsembleRun(tuple(_map(_detect, tasks, workers)))


def evaluate_rough_cover(rc: RoughCover, gt: Cover, g: Graph) -> dict[str, float]:
    """Quality of a consensus rough cover against a ground-truth cover."""
    tp, fp = overlap_confusion(rc, gt)
    gt_overlap = np.flatnonzero(gt.membership_counts() >= 2).tolist()
    crisp = crisp_projection(rc)
    return {
        "nmi": overlapping_nmi(crisp, gt),
        "k": len(rc),
        "q": rc.params.get("q", math.nan),
        "core_accuracy": core_accuracy(rc, gt) if any(rc.lowers) else math.nan,
        "overlap_tp": tp,
        "overlap_fp": fp,
        "pc_mean_predicted": mean_participation(g, crisp, overlapping_nodes(rc)),
        "pc_mean_gt": mean_participation(g, crisp, gt_overlap),
    }


def evaluate_partition(p: Cover, gt: Cover, g: Graph) -> dict[str, float]:
    out = {"nmi": overlapping_nmi(p, gt), "k": len(p)}
    if isinstance(p, Partition) and g.edge_count:
        out["modularity"] = modularity(g, p)
    return out


# ---------------------------------------------------------------------------
# recipes


BUILTIN_RECIPES = {
    "small-nmi-sweep": {"steps": [{"kind": "sweep", "name": "small-nmi-sweep", "config": "small",
                                   "mu": list(MU_GRID), "seeds": 5}]},
    "gamma-sweep-small": {"steps": [{"kind": "sweep", "name": "gamma-sweep-small", "config": "small",
                                     "mu": list(MU_GRID), "seeds": 5, "gamma": [0.5, 0.6, 0.7, 0.8]}]},
    "stability-small": {"steps": [{"kind": "stability", "name": "stability-small", "config": "small", "mu": 0.6,
                                   "runs": [10, 50, 100], "replications": 20}]},
    "large-nmi-sweep": {"steps": [{"kind": "sweep", "name": "large-nmi-sweep", "config": "large",
                                   "mu": list(MU_GRID), "seeds": 1}]},
}

_SWEEP_DEFAULTS = {"config": "small", "mu": list(MU_GRID), "seeds": 5, "detectors": format_detector_spec(DEFAULT_DETECTORS),
                   "beta": 0.75, "gamma": [0.8], "coverage": 0.9, "k_strategy": "community-count", "k": None,
                   "orphan_policy": "argmax", "keep_trivial": False, "imported": {}, "config_overrides": {}}
_STABILITY_DEFAULTS = {"config": "small", "mu": 0.6, "network_seed": 0, "runs": [10, 50, 100], "replications": 20,
                       "detectors": ["lpa", "louvain"], "greedy_runs": 1, "beta": 0.75, "gamma": 0.8,
                       "coverage": 0.9, "k_strategy": "community-count", "k": None, "orphan_policy": "argmax",
                       "keep_trivial": False, "config_overrides": {}}


def load_recipe(source) -> dict:
    """A built-in recipe by name, or a JSON recipe file.

    A recipe is ``{"steps": [step, ...]}``; each step has a ``kind``
    (``"sweep"`` or ``"stability"``) and optional settings overriding the
    defaults of that kind.
    """
    if isinstance(source, dict):
        recipe = source
    elif str(source) in BUILTIN_RECIPES:
        recipe = json.loads(json.dumps(BUILTIN_RECIPES[str(source)]))
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                recipe = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{source}: not valid JSON ({exc})") from None
    steps = recipe.get("steps")
    if not isinstance(steps, list):
        raise ValueError("a recipe needs a 'steps' list")
    out = []
    for i, step in enumerate(steps):
        kind = step.get("kind")
        defaults = {"sweep": _SWEEP_DEFAULTS, "stability": _STABILITY_DEFAULTS}.get(kind)
        if defaults is None:
            raise ValueError(f"step {i}: unknown kind {kind!r}")
        unknown = set(step) - set(defaults) - {"kind", "name"}
        if unknown:
            raise ValueError(f"step {i}: unknown settings {sorted(unknown)}")
        merged = {**json.loads(json.dumps(defaults)), **step}
        merged.setdefault("name", f"{kind}-{i + 1}")
        if merged["config"] not in CONFIGS:
            raise ValueError(f"step {i}: unknown config {merged['config']!r}")
        if kind == "sweep":
            if isinstance(merged["gamma"], (int, float)):
                merged["gamma"] = [merged["gamma"]]
            if isinstance(merged["mu"], (int, float)):
                merged["mu"] = [merged["mu"]]
            parse_detector_spec(merged["detectors"])
        out.append(merged)
    return {"steps": out}


def _config(step, mu, seed) -> LfrConfig:
    return CONFIGS[step["config"]].replace(**step["config_overrides"], mu=float(mu), seed=int(seed))


def _row(network, algorithm, metric, value, seed, beta="", gamma="", mu="", runs="", replication=""):
    return {"network": network, "algorithm": algorithm, "metric": metric, "value": value, "seed": seed,
            "beta": beta, "gamma": gamma, "mu": mu, "runs": runs, "replication": replication}


def _consensus_rows(step, g, gt, ens_run, net, seed, mu, gammas, runs="", replication=""):
    rows = []
    ens = ens_run.ensemble(step["keep_trivial"])
    for gamma in gammas:
        rc = rc_ccd(g, ens, beta=step["beta"], gamma=gamma, coverage=step["coverage"], k=step["k"],
                    orphan_policy=step["orphan_policy"], k_strategy=step["k_strategy"])
        scores = evaluate_rough_cover(rc, gt, g)
        scores["ensemble_size"] = len(ens)
        for metric, value in scores.items():
            rows.append(_row(net, "rc-ccd", metric, value, seed, step["beta"], gamma, mu, runs, replication))
    return rows


def _base_rows(ens_run, g, gt, net, seed, mu, runs="", replication=""):
    rows = []
    for alg in BASE_ALGORITHMS:
        best = ens_run.best(alg)
        if best is None:
            continue
        for metric, value in evaluate_partition(best.partition, gt, g).items():
            rows.append(_row(net, alg, metric, value, seed, mu=mu, runs=runs, replication=replication))
    return rows


def _sweep_task(args):
    step, master, mu_index, rep = args
    mu = step["mu"][mu_index]
    net = f"net{mu_index + 1}"
    seed = derive_seed(master, step["name"], "network", mu_index, rep)
    try:
        res = generate_lfr(_config(step, mu, seed))
        g, gt = res.graph, res.ground_truth
        ens_run = run_ensemble(g, parse_detector_spec(step["detectors"]), derive_seed(master, step["name"],
                                                                                       "ensemble", mu_index, rep))
        rows = [_row(net, "ground-truth", "k", len(gt), seed, mu=mu),
                _row(net, "ground-truth", "realized_mu", res.realized_mu, seed, mu=mu),
                _row(net, "ensemble", "dropped_trivial", len(ens_run.dropped(step["keep_trivial"])), seed, mu=mu),
                _row(net, "ensemble", "nonconverged", sum(not r.converged for r in ens_run.runs), seed, mu=mu)]
        rows += _base_rows(ens_run, g, gt, net, seed, mu)
        for alg, template in sorted(step["imported"].items()):
            path = template.format(network=net, seed=seed, replicate=rep, mu=mu)
            for metric, value in evaluate_partition(read_cover(path, g.node_count), gt, g).items():
                rows.append(_row(net, alg, metric, value, seed, mu=mu))
        rows += _consensus_rows(step, g, gt, ens_run, net, seed, mu, step["gamma"])
        return rows, None
    except Exception as exc:  # recorded, the recipe continues
        return [], {"step": step["name"], "network": net, "seed": seed, "error": f"{type(exc).__name__}: {exc}"}


def _stability_task(args):
    step, master, runs, rep, g, gt = args
    net = f"mu{step['mu']}"
    seed = derive_seed(master, step["name"], "ensemble", runs, rep)
    try:
        detectors = [(d, runs) for d in step["detectors"]] + [("greedy", step["greedy_runs"])]
        ens_run = run_ensemble(g, detectors, seed)
        rows = _base_rows(ens_run, g, gt, net, seed, step["mu"], runs, rep)
        rows += _consensus_rows(step, g, gt, ens_run, net, seed, step["mu"], [step["gamma"]], runs, rep)
        return rows, None
    except Exception as exc:
        return [], {"step": step["name"], "network": net, "seed": seed, "error": f"{type(exc).__name__}: {exc}"}


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "nan" if math.isnan(value) else repr(round(value, 12))


def rows_to_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


SUMMARY_COLUMNS = ("network", "mu", "algorithm", "metric", "gamma", "runs", "mean", "std", "count")


def summarize(rows) -> list[dict]:
    """Mean and sample standard deviation per (network, algorithm, metric, gamma, runs) cell."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    for r in rows:
        key = (r["network"], r["mu"], r["algorithm"], r["metric"], r["gamma"], r["runs"])
        groups[key].append(float(r["value"]))
    out = []
    for key, vals in groups.items():
        arr = np.array(vals, dtype=np.float64)
        arr = arr[~np.isnan(arr)]
        mean = float(arr.mean()) if len(arr) else math.nan
        std = float(arr.std(ddof=1)) if len(arr) > 1 else (0.0 if len(arr) else math.nan)
        out.append(dict(zip(SUMMARY_COLUMNS, (*key, mean, std, len(arr)))))
    return out


def _markdown_table(header, body) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(row) + " |" for row in body]
    return "\n".join(lines)


def _sweep_markdown(step, summary) -> str:
    cells = {(s["network"], s["algorithm"], s["gamma"]): s for s in summary if s["metric"] == "nmi"}
    algs = list(BASE_ALGORITHMS) + ["infomap"] + sorted(set(step["imported"]) - {"infomap"})
    header = ["network", "mu"] + algs + [f"rc-ccd (gamma={gm})" if len(step["gamma"]) > 1 else "rc-ccd"
                                         for gm in step["gamma"]]
    body = []
    for i, mu in enumerate(step["mu"]):
        net = f"net{i + 1}"
        row = [net, f"{mu:g}"]
        for alg in algs:
            s = cells.get((net, alg, ""))
            row.append(f"{s['mean']:.3f}" if s else "n/a")
        for gm in step["gamma"]:
            s = cells.get((net, "rc-ccd", gm))
            row.append(f"{s['mean']:.3f}" if s else "n/a")
        body.append(row)
    return f"## {step['name']}: mean NMI against ground truth\n\n" + _markdown_table(header, body) + "\n"


def _stability_markdown(step, summary) -> str:
    cells = {(s["algorithm"], s["runs"]): s for s in summary if s["metric"] == "nmi"}
    algs = list(BASE_ALGORITHMS) + ["rc-ccd"]
    header = ["algorithm"] + [str(r) for r in step["runs"]]
    body = []
    for alg in algs:
        row = [alg]
        for runs in step["runs"]:
            s = cells.get((alg, runs))
            row.append(f"{s['mean']:.2f} ± {s['std']:.2f}" if s else "n/a")
        body.append(row)
    return (f"## {step['name']}: NMI mean ± std over {step['replications']} replications, mu={step['mu']}\n\n"
            + _markdown_table(header, body) + "\n")


@dataclass
class RecipeReport:
    rows: dict[str, list[dict]] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)


def run_recipe(recipe, out_dir, master_seed: int = 0, workers: int = 1) -> RecipeReport:
    """Run every step of ``recipe`` and write CSVs plus ``summary.md`` into ``out_dir``.

    Per step ``<name>.csv`` holds raw rows and ``<name>-summary.csv`` the
    per-cell mean and standard deviation. Failed tasks are listed in
    ``failures.csv`` and do not stop the run.
    """
    recipe = load_recipe(recipe)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RecipeReport()
    sections = []
    for step in recipe["steps"]:
        if step["kind"] == "sweep":
            tasks = [(step, master_seed, i, rep) for i in range(len(step["mu"])) for rep in range(step["seeds"])]
            results = _map(_sweep_task, tasks, workers)
        else:
            gseed = derive_seed(master_seed, step["name"], "network", step["network_seed"])
            res = generate_lfr(_config(step, step["mu"], gseed))
            tasks = [(step, master_seed, runs, rep, res.graph, res.ground_truth)
                     for runs in step["runs"] for rep in range(step["replications"])]
            results = _map(_stability_task, tasks, workers)
        rows = [r for rs, _ in results for r in rs]
        report.failures += [f for _, f in results if f is not None]
        report.rows[step["name"]] = rows
        summary = summarize(rows)
        atomic_write(out_dir / f"{step['name']}.csv", rows_to_csv(rows))
        atomic_write(out_dir / f"{step['name']}-summary.csv", rows_to_csv(summary, SUMMARY_COLUMNS))
        sections.append(_sweep_markdown(step, summary) if step["kind"] == "sweep" else _stability_markdown(step, summary))
    if report.failures:
        atomic_write(out_dir / "failures.csv", rows_to_csv(report.failures, ("step", "network", "seed", "error")))
    atomic_write(out_dir / "summary.md", "# Experiment summary\n\n" + "\n".join(sections))
    return report
