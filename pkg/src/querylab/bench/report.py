"""Summaries of run records: CSV rows plus a JSON digest per (kind, n)."""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict

import numpy as np

from ..query import UndefinedQuantile, summarize

CERT_KEYS = ("lambda_star", "eps_star", "h", "k")


def report(records, p=0.5):
    """Return (csv_text, summary_dict).  Requires at least one record."""
    if not records:
        raise ValueError("report needs at least one record")
    groups = defaultdict(list)
    for r in records:
        groups[(r["kind"], r["n"])].append(r)
    rows = []
    summary = {}
    for (kind, n), recs in sorted(groups.items()):
        counts = [r["queries"] for r in recs]
        stats = summarize([(r["queries"], r["success"]) for r in recs], p=p, strict=False)
        row = {
            "kind": kind, "n": n, "trials": len(recs),
            "success_fraction": stats.success_fraction,
            "violations": sum(r.get("violation", False) for r in recs),
            "queries_mean": stats.qc_e,
            "queries_q50": float(np.quantile(counts, 0.5)),
            "queries_q90": float(np.quantile(counts, 0.9)),
            f"qc_p{p}": stats.qc_p,
        }
        for key in CERT_KEYS:
            vals = [r["extra"][key] for r in recs if key in r.get("extra", {})]
            if vals:
                row[f"{key}_max" if key in ("lambda_star", "k") else f"{key}_min"] = (
                    max(vals) if key in ("lambda_star", "k") else min(vals))
        rows.append(row)
        summary[f"{kind}/n={n}"] = row
    keys = []
    for row in rows:
        keys += [k for k in row if k not in keys]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue(), summary


def write_report(records, out_dir, p=0.5):
    from pathlib import Path
    text, summary = report(records, p)
    out = Path(out_dir)
    (out / "summary.csv").write_text(text)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return text, summary


__all__ = ["report", "write_report", "UndefinedQuantile"]
