"""Generic operations on maps of the unit cube."""
from __future__ import annotations

import numpy as np

from ..query import PrecisionPolicy, QueryTranscript, perturb, record


class InvalidMixture(ValueError):
    pass


def displacement(f, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(np.asarray(f(x)) - x)))


def is_eps_fixed_point(f, x, eps: float) -> bool:
    return displacement(f, x) <= eps


def estimate_lipschitz(f, samples: int, seed: int, n: int | None = None) -> float:
    """Largest observed ||f(x)-f(y)|| / ||x-y|| (sup norms) over random pairs.

    Half the pairs are independent uniform points; the other half are close
    pairs (distance ~1e-3), which see local slopes that far pairs average out.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    if n is None:
        n = getattr(f, "n")
    rng = np.random.default_rng(seed)
    m = samples // 2
    x = rng.random((m, n))
    y = rng.random((m, n))
    near = rng.random((samples - m, n))
    near2 = np.clip(near + rng.uniform(-1e-3, 1e-3, near.shape), 0.0, 1.0)
    X = np.vstack([x, near])
    Y = np.vstack([y, near2])
    fx = _eval_rows(f, X)
    fy = _eval_rows(f, Y)
    dx = np.abs(X - Y).max(axis=1)
    ok = dx > 0
    if not ok.any():
        return 0.0
    return float((np.abs(fx - fy).max(axis=1)[ok] / dx[ok]).max())


def _eval_rows(f, X):
    try:
        out = np.asarray(f(X), dtype=float)
        if out.shape == X.shape:
            return out
    except Exception:
        pass
    return np.array([np.asarray(f(x), dtype=float) for x in X])


def afp_dist_query(f, mixture, policy: PrecisionPolicy, seed: int = 0,
                   transcript: QueryTranscript | None = None):
    """Expectation of f under a finite mixture [(weight, point), ...], answered within delta."""
    weights = np.array([w for w, _ in mixture], dtype=float)
    if len(weights) == 0 or np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise InvalidMixture("weights must be positive and sum to 1")
    pts = np.array([np.asarray(x, dtype=float) for _, x in mixture])
    vals = _eval_rows(f, pts)
    answer = perturb(policy, weights @ vals, seed)
    if transcript is not None:
        record(transcript, None, "afp-dist", [tuple(p) for p in pts], tuple(answer))
    return answer
