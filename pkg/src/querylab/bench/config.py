"""Flat key = value experiment configs."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

KINDS = ("chain-e2e", "htp", "walk-cycles", "sampling", "dynamics", "certify")


class InvalidConfig(ValueError):
    pass


def parse_range(text: str) -> list:
    """'3' -> [3]; '1..4' -> [1,2,3,4]; '2,5,7' -> [2,5,7]."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(x) for x in text.split(",")]
    except ValueError:
        raise InvalidConfig(f"bad integer range {text!r}") from None
    if not out:
        raise InvalidConfig(f"empty range {text!r}")
    return out


@dataclass
class ExperimentConfig:
    kind: str
    n: list = field(default_factory=lambda: [2])
    seed: int = 0
    trials: int = 1
    T: int | None = None
    delta: float | None = None
    eps: float | None = None
    lam: float | None = None
    p: float = 0.5
    steps: int | None = None
    out: str | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.n or min(self.n) < 1:
            raise InvalidConfig("n range must be nonempty and positive")
        if self.trials < 1:
            raise InvalidConfig("trials must be at least 1")
        if self.delta is not None and not 0 < self.delta <= 1:
            raise InvalidConfig("delta must lie in (0, 1]")
        if self.eps is not None and self.eps <= 0:
            raise InvalidConfig("eps must be positive")
        if not 0 < self.p < 1:
            raise InvalidConfig("p must lie in (0, 1)")
        if self.kind in ("chain-e2e", "certify") and max(self.n) > 4:
            raise InvalidConfig("path functions are available for n <= 4")
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "n":
                v = ",".join(map(str, v))
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        if "n" in kw and isinstance(kw["n"], str):
            kw["n"] = parse_range(kw["n"])
        return replace(self, **kw).validate()


_CASTS = {"seed": int, "trials": int, "T": int, "steps": int, "delta": float, "eps": float,
          "lam": float, "p": float, "out": str, "kind": str}


def loads_config(text: str) -> ExperimentConfig:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "n":
            kv["n"] = parse_range(val)
        elif key in _CASTS:
            try:
                kv[key] = _CASTS[key](val)
            except ValueError:
                raise InvalidConfig(f"line {lineno}: bad value for {key}") from None
        else:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
    if "kind" not in kv:
        raise InvalidConfig("config needs a 'kind'")
    return ExperimentConfig(**kv).validate()


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return loads_config(fh.read())
