"""Cached end-to-end runs on generated small-config networks, shared by the slow tests."""

import time
from functools import lru_cache

from rcccd.benchgen import SMALL_CONFIG, generate_lfr
from rcccd.consensus import rc_ccd
from rcccd.experiments import DEFAULT_DETECTORS, evaluate_partition, evaluate_rough_cover, run_ensemble

SEEDS = (1, 2, 3, 4, 5)


@lru_cache(maxsize=None)
def pipeline(mu: float, seed: int):
    """Generated network, default ensemble and default consensus, scored against the ground truth."""
    t0 = time.perf_counter()
    res = generate_lfr(SMALL_CONFIG.replace(mu=mu, seed=seed))
    g, gt = res.graph, res.ground_truth
    ens_run = run_ensemble(g, DEFAULT_DETECTORS, seed=seed)
    rc = rc_ccd(g, ens_run.ensemble())
    scores = {"rc-ccd": evaluate_rough_cover(rc, gt, g)}
    for alg in ("lpa", "greedy", "louvain"):
        scores[alg] = evaluate_partition(ens_run.best(alg).partition, gt, g)
    return {"res": res, "ensemble": ens_run, "rc": rc, "scores": scores, "k_gt": len(gt),
            "seconds": time.perf_counter() - t0}
