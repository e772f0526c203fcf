"""Query channels, budgets, transcripts and query-count statistics.

Every oracle in the package funnels its answers through :func:`record`, so a
transcript is the single source of truth for "how many queries were asked".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class BudgetExhausted(RuntimeError):
    """Raised when a query would exceed the transcript's budget."""


class UndefinedQuantile(ValueError):
    """Raised when QC_p is requested but fewer than a p-fraction of trials succeeded."""


@dataclass
class QueryBudget:
    limit: int | None = None  # None means unlimited

    def allows(self, count: int) -> bool:
        return self.limit is None or count < self.limit


@dataclass
class QueryTranscript:
    entries: list = field(default_factory=list)
    budget: QueryBudget = field(default_factory=QueryBudget)

    @property
    def count(self) -> int:
        return len(self.entries)

    def kinds(self, kind: str) -> list:
        return [e for e in self.entries if e[0] == kind]

    def __len__(self):
        return len(self.entries)


def record(transcript: QueryTranscript, budget: QueryBudget | None, kind: str, query: Any, answer: Any):
    """Append one (kind, query, answer) entry, enforcing the budget first."""
    budget = transcript.budget if budget is None else budget
    if not budget.allows(transcript.count):
        raise BudgetExhausted(f"query budget of {budget.limit} exhausted")
    transcript.entries.append((kind, query, answer))
    return transcript


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, dict):
        return ";".join(f"{k}={_fmt(v)}" for k, v in x.items())
    if x is None:
        return "-"
    if hasattr(x, "__iter__") and not isinstance(x, str):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def export_transcript(transcript: QueryTranscript) -> str:
    """Line-delimited ``kind<TAB>query<TAB>answer`` records."""
    return "".join(f"{k}\t{_fmt(q)}\t{_fmt(a)}\n" for k, q, a in transcript.entries)


# ---------------------------------------------------------------------------
# precision policies

MODES = ("exact", "grid-rounding", "seeded-uniform-noise")


@dataclass(frozen=True)
class PrecisionPolicy:
    delta: float = 0.0
    mode: str = "grid-rounding"

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"unknown precision mode {self.mode!r}")


def perturb(policy: PrecisionPolicy, true_value, seed: int = 0) -> np.ndarray:
    """Return an answer within ``policy.delta`` (sup-norm) of ``true_value``.

    grid-rounding snaps each entry to the nearest multiple of delta, which is
    always within delta/2; the noise mode draws uniformly from [-delta, delta].
    """
    v = np.asarray(true_value, dtype=float)
    d = policy.delta
    if policy.mode == "exact" or d == 0.0:
        return v.copy()
    if policy.mode == "grid-rounding":
        w = np.round(v / d) * d
        # guard against floating error pushing us past the bound
        return np.clip(w, v - d, v + d)
    rng = np.random.default_rng(seed)
    return v + rng.uniform(-d, d, size=v.shape)


# ---------------------------------------------------------------------------
# statistics


@dataclass
class QueryStats:
    counts: list
    successes: list
    p: float
    qc_e: float
    qc_p: float | None
    success_fraction: float


def summarize(trials, p: float = 0.5, strict: bool = True) -> QueryStats:
    """QC_E (mean count) and QC_p (smallest c with P[success and count<=c] >= p).

    With ``strict`` an undefined quantile raises; otherwise qc_p is None.
    """
    trials = list(trials)
    if not trials:
        raise ValueError("summarize needs at least one trial")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    counts = [int(c) for c, _ in trials]
    ok = [bool(s) for _, s in trials]
    n = len(trials)
    frac = sum(ok) / n
    qc_e = float(np.mean(counts))
    qc_p = None
    if frac + 1e-12 >= p:
        need = math.ceil(p * n - 1e-9)
        good = sorted(c for c, s in zip(counts, ok) if s)
        qc_p = good[max(need, 1) - 1]
    elif strict:
        raise UndefinedQuantile(f"success fraction {frac:.3g} is below p={p}")
    return QueryStats(counts, ok, p, qc_e, qc_p, frac)
