"""Initial wealth configurations and labelled random sub-streams.

All randomness comes from numpy's Philox counter-based generator. A sub-stream
is keyed by (master seed, label, indices...), so drawing more numbers for one
purpose (say, topology) never shifts the numbers used for another (wealth).
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import critical_wealth

STREAM_LABELS = ("wealth", "topology", "experiment")


def substream(seed: int, label: str, *indices: int) -> np.random.Generator:
    if label not in STREAM_LABELS:
        raise ValueError(f"unknown stream label {label!r}")
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode()), *map(int, indices)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


class WealthKind(str, Enum):
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"
    CONSTANT = "constant"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class WealthDistSpec:
    kind: WealthKind
    seed: int = 0
    rate: float | None = None
    lo: float | None = None
    hi: float | None = None
    value: float | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        k = self.kind
        if k == WealthKind.EXPONENTIAL and not (self.rate is not None and self.rate > 0):
            raise ValueError("exponential rate must be > 0")
        if k == WealthKind.UNIFORM and not (self.lo is not None and self.hi is not None
                                            and 0 < self.lo < self.hi):
            raise ValueError("uniform bounds need 0 < lo < hi")
        if k == WealthKind.CONSTANT and not (self.value is not None and self.value > 0):
            raise ValueError("constant value must be > 0")
        if k == WealthKind.EXPLICIT:
            if not self.values or any(not (v > 0) for v in self.values):
                raise ValueError("explicit wealth values must all be > 0")

    @classmethod
    def exponential(cls, rate: float, seed: int = 0) -> "WealthDistSpec":
        return cls(WealthKind.EXPONENTIAL, seed=seed, rate=rate)

    @classmethod
    def uniform(cls, lo: float, hi: float, seed: int = 0) -> "WealthDistSpec":
        return cls(WealthKind.UNIFORM, seed=seed, lo=lo, hi=hi)

    @classmethod
    def constant(cls, value: float) -> "WealthDistSpec":
        return cls(WealthKind.CONSTANT, value=value)

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "WealthDistSpec":
        return cls(WealthKind.EXPLICIT, values=tuple(float(v) for v in values))


def exponential_rate_for_s1(s1_target: float, alpha: float) -> float:
    """Rate mu such that P(X > critical wealth) = s1_target for X ~ Exp(mu)."""
    if not 0.0 < s1_target < 1.0:
        raise ValueError(f"s1_target must lie in (0, 1), got {s1_target}")
    return -math.log(s1_target) / critical_wealth(alpha)


def sample_initial_wealth(n: int, spec: WealthDistSpec, index: int = 0,
                          floor: float | None = None) -> np.ndarray:
    """Draw ``n`` positive initial wealths.

    ``index`` selects an independent wealth sub-stream (one per ensemble
    member). Draws below ``floor`` are raised to ``2 * floor``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = spec.kind
    if k == WealthKind.CONSTANT:
        x = np.full(n, float(spec.value))
    elif k == WealthKind.EXPLICIT:
        if len(spec.values) != n:
            raise ValueError(f"explicit wealth has {len(spec.values)} values, need {n}")
        x = np.asarray(spec.values, dtype=float)
    else:
        u = substream(spec.seed, "wealth", index).random(n)
        if k == WealthKind.EXPONENTIAL:
            x = -np.log1p(-u) / spec.rate
        else:
            x = spec.lo + (spec.hi - spec.lo) * u
    if floor is not None:
        x = np.where(x < floor, 2.0 * floor, x)
    return x


def read_wealth_file(path: str | Path) -> list[float]:
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    return values
