"""Experiment campaigns: one trial function per kind, run over n and trials."""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig

SCHEMA = 1
WORKERS_ENV = "QUERYLAB_WORKERS"


def trial_seed(seed, n, trial):
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1)[0])


def _record(cfg, n, trial, seed, queries, success, extra, violation=False, t0=None):
    return {
        "schema": SCHEMA, "kind": cfg.kind, "n": n, "trial": trial, "seed": seed,
        "queries": int(queries), "success": bool(success), "violation": bool(violation),
        "extra": extra, "wall_time": None if t0 is None else time.perf_counter() - t0,
    }


# ---------------------------------------------------------------------------
# trial functions (top level so worker processes can pickle them)


def trial_walk_cycles(cfg, n, trial):
    from ..paths import cut_cycles, max_cycle_length, random_walk
    t0 = time.perf_counter()
    s = trial_seed(cfg.seed, n, trial)
    w = random_walk(n, cfg.steps or 2 ** 16, s)
    mcl = max_cycle_length(w)
    p = cut_cycles(w)
    ok = len(set(p.vertices)) == len(p) and p.end == int(w.vertices[-1])
    return _record(cfg, n, trial, s, 0, mcl <= n * n, {"max_cycle": mcl, "L": len(p)},
                   violation=not ok, t0=t0)


def trial_htp(cfg, n, trial):
    from ..paths import cut_cycles, htp_play, random_walk, uniform_guess_win_probability
    t0 = time.perf_counter()
    s = trial_seed(cfg.seed, n, trial)
    T = cfg.T or 16
    path = cut_cycles(random_walk(n, cfg.steps or 2 ** 16, s))
    rng = np.random.default_rng([s, 1])
    guess = lambda revealed, t: int(rng.integers(0, 2 ** n))
    out = htp_play(path, guess, n, T)
    p = uniform_guess_win_probability(len(path), n, T)
    return _record(cfg, n, trial, s, out.queries_used, out.winner == "algorithm",
                   {"L": len(path), "hit_step": out.hit_step, "p_uniform": p}, t0=t0)


def trial_sampling(cfg, n, trial):
    from ..games import ExplicitGame
    from ..reductions import sample_count, sample_dist_query
    from ..query import QueryTranscript
    t0 = time.perf_counter()
    s = trial_seed(cfg.seed, n, trial)
    delta = cfg.delta or 0.2
    pay = np.zeros((2,) * n + (n,))
    pay[(1,) * n] = 1.0
    game = ExplicitGame(pay)
    mix = [(0.5, (0,) * n), (0.5, (1,) * n)]
    tr = QueryTranscript()
    est = sample_dist_query(game, mix, delta, s, tr)
    err = float(np.max(np.abs(est - 0.5)))
    ok = tr.count == sample_count(n, delta)
    return _record(cfg, n, trial, s, tr.count, err <= delta, {"max_error": err},
                   violation=not ok, t0=t0)


def trial_dynamics(cfg, n, trial):
    from ..dynamics import RegretMatching, empirical_swap_regret, matching_pennies, run_dynamic
    from ..games import ExplicitGame
    t0 = time.perf_counter()
    s = trial_seed(cfg.seed, n, trial)
    T = cfg.T or 2000
    if n == 2:
        game = matching_pennies()
    else:
        game = ExplicitGame(np.random.default_rng(s).random((2,) * n + (n,)))
    dyn = RegretMatching(game.sizes)
    h = run_dynamic(game, dyn, T, s)
    reg = empirical_swap_regret(game, h.realized)
    ok = h.transcript.count == dyn.k * T
    return _record(cfg, n, trial, s, h.transcript.count, reg <= (cfg.eps or 0.05),
                   {"swap_regret": reg}, violation=not ok, t0=t0)


def _seed_path(n, s, steps):
    from ..paths import cut_cycles, random_walk
    return cut_cycles(random_walk(n, steps or 4 * 2 ** n, s))


def trial_certify(cfg, n, trial):
    from ..fixpoint import build_path_function, certify_displacement
    t0 = time.perf_counter()
    s = trial_seed(cfg.seed, n, trial)
    path = _seed_path(n, s, cfg.steps)
    c = certify_displacement(build_path_function(path))
    return _record(cfg, n, trial, s, 0, c.certified,
                   {"lambda_star": c.lambda_star, "eps_star": c.eps_star, "h": c.h,
                    "path_hash": c.path_hash, "L": len(path)},
                   violation=not c.certified, t0=t0)


def trial_chain(cfg, n, trial):
    from ..fixpoint import build_path_function, certify_displacement, game_parameters, is_eps_fixed_point
    from ..games import FunctionGame, pure
    from ..paths import ESPOracle, decode
    from ..reductions import (cell_vertex_of_point, grid_scan_afp_solver, pure_wsne_profiles,
                              solve_esp_via_afp, wsne_to_fixed_point)
    t0 = time.perf_counter()
    s = trial_seed(cfg.seed, n, trial)
    path = _seed_path(n, s, cfg.steps)
    f = build_path_function(path)
    cert = certify_displacement(f)
    k, eps = game_parameters(cert)
    game = FunctionGame(f, cert.lambda_star, eps)
    sols = pure_wsne_profiles(game)
    x = wsne_to_fixed_point(game, pure(sols[0], game.sizes)) if sols else None
    ok_wsn = x is not None and is_eps_fixed_point(f, x, eps) and cell_vertex_of_point(x) == path.end
    esp = solve_esp_via_afp(n, ESPOracle(path), grid_scan_afp_solver)
    ok_esp = esp.vertex == decode(path.end, n)
    counts_ok = esp.esp_queries.count <= esp.afp_queries.count
    return _record(cfg, n, trial, s, esp.esp_queries.count, ok_wsn and ok_esp,
                   {"k": k, "eps_game": eps, "lambda_star": cert.lambda_star,
                    "eps_star": cert.eps_star, "fixed_point": None if x is None else x.tolist(),
                    "afp_queries": esp.afp_queries.count, "L": len(path)},
                   violation=not (ok_wsn and ok_esp and counts_ok), t0=t0)


TRIALS = {
    "walk-cycles": trial_walk_cycles, "htp": trial_htp, "sampling": trial_sampling,
    "dynamics": trial_dynamics, "certify": trial_certify, "chain-e2e": trial_chain,
}


def _run_one(args):
    cfg, n, trial = args
    return TRIALS[cfg.kind](cfg, n, trial)


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list:
    """Run every (n, trial) of the config; append records to ``cfg.out`` if set.

    Trials already recorded in the campaign directory are skipped, so an
    interrupted campaign resumes where it stopped.
    """
    cfg.validate()
    workers = default_workers() if workers is None else workers
    done = {}
    out_dir = Path(cfg.out) if cfg.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for rec in read_records(out_dir):
            if rec["kind"] == cfg.kind:
                done[(rec["n"], rec["trial"])] = rec
        manifest = out_dir / "manifest.txt"
        with open(manifest, "a") as fh:
            fh.write(f"# schema {SCHEMA}\n" + cfg.to_text())
    todo = [(cfg, n, t) for n in cfg.n for t in range(cfg.trials) if (n, t) not in done]
    records = dict(done)
    sink = open(out_dir / "records.jsonl", "a") if out_dir is not None else None
    try:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(workers) as pool:
                for rec in pool.map(_run_one, todo):
                    records[(rec["n"], rec["trial"])] = rec
                    if sink:
                        sink.write(json.dumps(rec) + "\n")
                        sink.flush()
        else:
            for job in todo:
                rec = _run_one(job)
                records[(rec["n"], rec["trial"])] = rec
                if sink:
                    sink.write(json.dumps(rec) + "\n")
                    sink.flush()
    finally:
        if sink:
            sink.close()
    return [records[key] for key in sorted(records)]


def read_records(out_dir) -> list:
    path = Path(out_dir) / "records.jsonl"
    if not path.exists():
        return []
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def comparable(record):
    """Record without timing, for reproducibility checks."""
    return {k: v for k, v in record.items() if k != "wall_time"}
