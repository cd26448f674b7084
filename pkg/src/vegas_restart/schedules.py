"""Restart schedules: deterministic streams of positive step budgets.

Every schedule is a pure function of its parameters.  Budgets are kept as
real numbers; any integer rounding needed by integer-step runtime laws
happens at the engine boundary, never here.  Schedules expose both a
per-attempt budget stream and a grouped (count, budget) run-length stream;
the grouped form is what the exact cost oracle consumes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from . import starfn

# Threshold guards keep every materialized budget a finite positive double.
MAX_SINGLE_THRESHOLD = 290.0
MAX_MEAN_PARAM = 280.0
MAX_BLOCK_PARAM = 280.0
_MIN_THRESHOLD = -700.0


class ScheduleRangeError(ValueError):
    """A schedule parameter or materialized budget fell outside the guards."""


@dataclass(frozen=True)
class BudgetBlock:
    """One round of the known-bound schedule: (count, budget) entries in order."""

    entries: tuple[tuple[int, float], ...]

    def num_attempts(self) -> int:
        return sum(c for c, _ in self.entries)

    def total_cost(self) -> float:
        return math.fsum(c * b for c, b in self.entries)

    def budgets(self) -> Iterator[float]:
        for count, budget in self.entries:
            for _ in range(count):
                yield budget


@dataclass(frozen=True)
class Schedule:
    """Deterministic, lazily generated stream of positive budgets.

    cycle holds the repeating (count, budget) block for cyclic kinds and is
    None for the unbounded kinds ("universal", "luby").
    """

    kind: str
    params: tuple[tuple[str, float], ...] = ()
    cycle: tuple[tuple[int, float], ...] | None = None

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}({inner})"

    def _param(self, name: str) -> float:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    def groups(self) -> Iterator[tuple[int, float]]:
        """Run-length encoded budget stream: (count, budget) pairs."""
        if self.cycle is not None:
            while True:
                yield from self.cycle
        elif self.kind == "universal":
            for e in itertools.count(5):
                if e > MAX_BLOCK_PARAM:
                    raise ScheduleRangeError(
                        f"universal schedule materialized past the E <= {MAX_BLOCK_PARAM} guard"
                    )
                yield from budget_block(float(e)).entries
        elif self.kind == "luby":
            unit = self._param("unit")
            for i in itertools.count(1):
                yield 1, unit * luby_value(i)
        else:  # pragma: no cover - constructors only build known kinds
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def budgets(self) -> Iterator[float]:
        for count, budget in self.groups():
            for _ in range(count):
                yield budget

    def budget(self, i: int) -> float:
        """The i-th budget, 1-indexed."""
        i = int(i)
        if i < 1:
            raise ValueError(f"budget index is 1-based, got {i}")
        if self.cycle is not None:
            cycle_len = sum(c for c, _ in self.cycle)
            i = (i - 1) % cycle_len + 1
        seen = 0
        for count, budget in self.groups():
            seen += count
            if i <= seen:
                return budget
        raise RuntimeError("unreachable: schedules are infinite")


def _checked_exp_budget(t: float) -> float:
    budget = 2.0 * math.exp(t)
    if not (budget > 0.0 and math.isfinite(budget)):  # pragma: no cover - guarded earlier
        raise ScheduleRangeError(f"budget 2*exp({t}) is not a positive finite double")
    return budget


def single_threshold_schedule(t: float) -> Schedule:
    """Constant stream of budgets 2*exp(t)."""
    t = float(t)
    if not math.isfinite(t) or t > MAX_SINGLE_THRESHOLD or t < _MIN_THRESHOLD:
        raise ScheduleRangeError(
            f"threshold must be finite and in [{_MIN_THRESHOLD}, {MAX_SINGLE_THRESHOLD}], got {t!r}"
        )
    return Schedule(
        kind="single_threshold", params=(("t", t),), cycle=((1, _checked_exp_budget(t)),)
    )


def fixed_schedule(ex: float) -> Schedule:
    """Constant stream of budgets 2*exp(ex + 1), the mean-plus-one threshold."""
    ex = float(ex)
    if not math.isfinite(ex) or ex + 1.0 > MAX_SINGLE_THRESHOLD or ex < 0.0:
        raise ScheduleRangeError(
            f"mean parameter must lie in [0, {MAX_SINGLE_THRESHOLD - 1}], got {ex!r}"
        )
    return Schedule(
        kind="fixed", params=(("EX", ex),), cycle=((1, _checked_exp_budget(ex + 1.0)),)
    )


def two_threshold_schedule(ex: float) -> Schedule:
    """Alternating rounds of a low and a high threshold keyed to the mean ex.

    Each cycle runs ceil(ex+1) budgets of 2*exp(ex - ln ex) followed by
    ceil(ln ex + 2) budgets of 2*exp(ex + 2).
    """
    ex = float(ex)
    if not math.isfinite(ex) or ex < 1.0 or ex > MAX_MEAN_PARAM:
        raise ScheduleRangeError(
            f"two_threshold requires 1 <= EX <= {MAX_MEAN_PARAM}, got {ex!r}"
        )
    log_ex = math.log(ex)
    cycle = (
        (math.ceil(ex + 1.0), _checked_exp_budget(ex - log_ex)),
        (math.ceil(log_ex + 2.0), _checked_exp_budget(ex + 2.0)),
    )
    return Schedule(kind="two_threshold", params=(("EX", ex),), cycle=cycle)


def budget_block(e: float) -> BudgetBlock:
    """One escalation round for a known bound e >= 5 on the mean of X.

    For each step k of the shrink trace of e the block runs
    2*ceil((v[k-1]+2)^2 + 1) budgets of 2*exp(e - v[k]), then finishes with
    two budgets of 2*exp(e + 10).
    """
    e = float(e)
    if not math.isfinite(e) or e < 5.0 or e > MAX_BLOCK_PARAM:
        raise ScheduleRangeError(f"budget_block requires 5 <= E <= {MAX_BLOCK_PARAM}, got {e!r}")
    values = starfn.shrink_trace(e).values
    entries = []
    for k in range(1, len(values)):
        count = 2 * math.ceil((values[k - 1] + 2.0) ** 2 + 1.0)
        entries.append((count, _checked_exp_budget(e - values[k])))
    entries.append((2, _checked_exp_budget(e + 10.0)))
    return BudgetBlock(entries=tuple(entries))


def specific_e_schedule(e: float) -> Schedule:
    """Endless repetition of the budget block for a known bound e."""
    block = budget_block(e)
    return Schedule(kind="specific_E", params=(("E", float(e)),), cycle=block.entries)


def universal_schedule() -> Schedule:
    """Distribution-free escalation: blocks for e = 5, 6, 7, ... concatenated.

    One block per integer e, no per-e repetition; budgets are unbounded.
    """
    return Schedule(kind="universal")


def luby_value(i: int) -> int:
    """The i-th term (1-indexed) of the reluctant-doubling sequence 1,1,2,1,1,2,4,..."""
    i = int(i)
    if i < 1:
        raise ValueError(f"luby index is 1-based, got {i}")
    while True:
        if (i + 1) & i == 0:  # i == 2**k - 1
            return (i + 1) >> 1
        i = i - (1 << (i.bit_length() - 1)) + 1


def luby_schedule(unit: float) -> Schedule:
    """Budgets unit * L_i where L is the reluctant-doubling sequence."""
    unit = float(unit)
    if not (unit > 0.0 and math.isfinite(unit)):
        raise ScheduleRangeError(f"luby unit must be positive and finite, got {unit!r}")
    return Schedule(kind="luby", params=(("unit", unit),))


_SCHEDULE_KIND_FIELDS = {
    "single_threshold": {"t"},
    "fixed": {"EX"},
    "two_threshold": {"EX"},
    "specific_E": {"E"},
    "universal": set(),
    "luby": {"unit"},
}


def build_schedule(spec: dict, default_ex: float | None = None) -> Schedule:
    """Build a schedule from a JSON-style spec dict.

    Kinds: single_threshold(t), fixed(EX), two_threshold(EX), specific_E(E),
    universal, luby(unit).  For the mean-keyed kinds the parameter may be
    omitted when default_ex (the configured distribution's expectation) is
    supplied; specific_E then defaults to max(default_ex, 5).
    """
    if not isinstance(spec, dict):
        raise ValueError(f"schedule spec must be a dict, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind not in _SCHEDULE_KIND_FIELDS:
        raise ValueError(f"unknown schedule kind {kind!r}")
    unknown = set(spec) - {"kind"} - _SCHEDULE_KIND_FIELDS[kind]
    if unknown:
        raise ValueError(f"schedule kind {kind!r} does not take fields {sorted(unknown)}")

    def mean_param(name: str):
        if name in spec:
            return spec[name]
        if default_ex is None:
            raise ValueError(f"schedule kind {kind!r} needs field {name!r}")
        return default_ex

    if kind == "single_threshold":
        if "t" not in spec:
            raise ValueError("single_threshold needs field 't'")
        return single_threshold_schedule(spec["t"])
    if kind == "fixed":
        return fixed_schedule(mean_param("EX"))
    if kind == "two_threshold":
        return two_threshold_schedule(mean_param("EX"))
    if kind == "specific_E":
        if "E" in spec:
            return specific_e_schedule(spec["E"])
        if default_ex is None:
            raise ValueError("specific_E needs field 'E'")
        return specific_e_schedule(max(default_ex, 5.0))
    if kind == "universal":
        return universal_schedule()
    if "unit" not in spec:
        raise ValueError("luby needs field 'unit'")
    return luby_schedule(spec["unit"])
