"""Command line: ``querylab generate|certify|run|report``.

Worker count for ``run`` defaults to the QUERYLAB_WORKERS environment variable.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, InvalidConfig, load_config, parse_range
from .experiments import read_records, run_experiment, trial_seed
from .io import load_path, save_certificate, save_game, save_path
from .report import write_report


def _add_common(p):
    p.add_argument("--n", help="dimension or range, e.g. 3, 1..4, 2,5")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--out")


def build_parser():
    ap = argparse.ArgumentParser(prog="querylab")
    sub = ap.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="write random instances (.path or .game files)")
    g.add_argument("what", choices=["path", "game"])
    g.add_argument("--players-actions", default="2", help="actions per player for games")
    g.add_argument("--steps", type=int, help="random walk length for paths")
    _add_common(g)

    c = sub.add_parser("certify", help="certify the path function of a .path file or a random path")
    c.add_argument("path", nargs="?")
    c.add_argument("--method", choices=["exact", "scan"], default="exact")
    _add_common(c)

    r = sub.add_parser("run", help="run an experiment campaign")
    r.add_argument("config", nargs="?", help="flat key = value config file")
    r.add_argument("--kind")
    r.add_argument("--T", type=int)
    r.add_argument("--steps", type=int)
    r.add_argument("--workers", type=int)
    _add_common(r)

    s = sub.add_parser("report", help="summarize records.jsonl of a campaign directory")
    s.add_argument("dir")
    s.add_argument("--p", type=float, default=0.5)
    return ap


def _generate(args):
    from ..games import ExplicitGame
    from ..paths import cut_cycles, random_walk
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    ns = parse_range(args.n or "2")
    seed = args.seed or 0
    written = []
    for n in ns:
        for t in range(args.trials or 1):
            s = trial_seed(seed, n, t)
            if args.what == "path":
                obj = cut_cycles(random_walk(n, args.steps or 4 * 2 ** n, s))
                name = out / f"n{n}_t{t}.path"
                save_path(obj, name)
            else:
                m = int(args.players_actions)
                obj = ExplicitGame(np.random.default_rng(s).random((m,) * n + (n,)))
                name = out / f"n{n}_t{t}.game"
                save_game(obj, name)
            written.append(str(name))
    print("\n".join(written))
    return 0


def _certify(args):
    from ..fixpoint import build_path_function, certify_displacement
    from ..paths import cut_cycles, random_walk
    if args.path:
        paths = [load_path(args.path)]
    else:
        seed = args.seed or 0
        paths = [cut_cycles(random_walk(n, 4 * 2 ** n, trial_seed(seed, n, 0)))
                 for n in parse_range(args.n or "1..4")]
    bad = 0
    for i, path in enumerate(paths):
        cert = certify_displacement(build_path_function(path), method=args.method)
        print(cert.export())
        bad += not cert.certified
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            save_certificate(cert, Path(args.out) / f"n{path.n}_{i}.cert")
    return 1 if bad else 0


def _run(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig(args.kind or "")
    cfg = cfg.with_overrides(kind=args.kind, n=args.n, seed=args.seed, trials=args.trials,
                             eps=args.eps, delta=args.delta, out=args.out, T=args.T,
                             steps=args.steps)
    records = run_experiment(cfg, workers=args.workers)
    if cfg.out:
        write_report(records, cfg.out)
    for rec in records:
        print(json.dumps({k: rec[k] for k in ("kind", "n", "trial", "queries", "success", "violation")}))
    violations = sum(r["violation"] for r in records)
    if violations:
        print(f"{violations} invariant violation(s)", file=sys.stderr)
        return 1
    return 0


def _report(args):
    records = read_records(args.dir)
    if not records:
        print(f"no records in {args.dir}", file=sys.stderr)
        return 2
    text, _ = write_report(records, args.dir, p=args.p)
    print(text, end="")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return {"generate": _generate, "certify": _certify, "run": _run, "report": _report}[args.verb](args)
    except InvalidConfig as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
