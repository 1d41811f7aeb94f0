"""Adversarial tampering: random and targeted bit-flip channels applied to
measured-bit distributions, plus the error-masking arithmetic a rogue
provider uses to hide the extra flip probability inside quoted readout
error figures.

Line indices count from the right of a bitstring key: line 0 is the
rightmost character (q0 under the q_{n-1}...q_0 convention).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class TamperError(ValueError):
    pass


class DegenerateCounts(TamperError):
    """Only one outcome observed; no wrong bitstring to target."""


class UnresolvedTamperSpec(TamperError):
    """Channel applied before the target lines were resolved."""


class InvalidLineCount(TamperError):
    pass


class TamperMode(Enum):
    RANDOM_ALL = "random_all"
    RANDOM_SUBSET = "random_subset"
    TARGETED = "targeted"


@dataclass(frozen=True)
class TamperSpec:
    """Static tampering configuration of a rogue backend.

    ``lines`` is filled once per backend instance: by the targeted planner
    for TARGETED mode, by a seeded draw for RANDOM_SUBSET.
    """

    mode: TamperMode
    t: float
    k: int | None = None
    lines: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise TamperError(f"tampering coefficient {self.t} outside [0, 1]")
        if self.mode is TamperMode.RANDOM_SUBSET and self.lines is None:
            if self.k is None or self.k < 1:
                raise TamperError("random_subset needs a positive subset size k")

    @property
    def needs_resolution(self) -> bool:
        return self.mode is not TamperMode.RANDOM_ALL and self.lines is None

    def with_lines(self, lines) -> "TamperSpec":
        return replace(self, lines=tuple(sorted(lines)))

    def resolved_lines(self, num_lines: int) -> tuple[int, ...]:
        if self.mode is TamperMode.RANDOM_ALL:
            return tuple(range(num_lines))
        if self.lines is None:
            raise UnresolvedTamperSpec(f"{self.mode.value} spec has no target lines")
        if any(not 0 <= i < num_lines for i in self.lines):
            raise TamperError(f"target lines {self.lines} outside [0, {num_lines})")
        return self.lines


@dataclass(frozen=True)
class MaskingReport:
    """Net readout error a user would see once tampering is folded in."""

    base_rae: float
    t: float
    n: int
    delta_tampering: float
    net_rae: float


def _top_two(counts: dict[str, int]) -> tuple[str, str]:
    # ties broken toward the lexicographically smallest key, for determinism
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(ranked) < 2:
        raise DegenerateCounts("need at least two distinct outcomes to plan")
    return ranked[0][0], ranked[1][0]


def plan_targeted(untampered: dict[str, int]) -> tuple[int, ...]:
    """Lines where the most frequent outcome and the runner-up differ.

    The counts come from a clean execution the rogue provider runs
    privately; no ground truth is needed.
    """
    a, b = _top_two(untampered)
    width = len(a)
    lines = tuple(i for i in range(width) if a[width - 1 - i] != b[width - 1 - i])
    return lines


def tamper_channel(dist: dict[str, float], spec: TamperSpec) -> dict[str, float]:
    """Symmetric bit-flip with probability t on every targeted line."""
    if not dist:
        return {}
    width = len(next(iter(dist)))
    lines = spec.resolved_lines(width)
    if spec.t == 0.0 or not lines:
        return dict(dist)
    out: dict[str, float] = dict(dist)
    for line in lines:
        pos = width - 1 - line
        flipped: dict[str, float] = {}
        t = spec.t
        for key, p in out.items():
            other = key[:pos] + ("1" if key[pos] == "0" else "0") + key[pos + 1 :]
            flipped[key] = flipped.get(key, 0.0) + p * (1.0 - t)
            flipped[other] = flipped.get(other, 0.0) + p * t
        out = flipped
    return out


def masked_rae(
    base_rae: float, t: float, total_lines: int, tampered_lines: int
) -> MaskingReport:
    """Combine native readout error with diluted tampering in quadrature."""
    if tampered_lines < 1 or tampered_lines > total_lines:
        raise InvalidLineCount(
            f"tampered lines {tampered_lines} outside [1, {total_lines}]"
        )
    n = total_lines - tampered_lines + 1
    delta = t / n
    net = math.sqrt(base_rae**2 + delta**2)
    return MaskingReport(base_rae, t, n, delta, net)
