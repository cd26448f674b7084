"""Drives a simulated or resumable long-running randomized process through a
schedule of truncated attempts, with fresh randomness per attempt, and
estimates expected total cost by Monte Carlo.

Sampler processes use virtual-cost accounting: an attempt with budget b on a
run of total cost T charges min(T, b) without stepping, which keeps budgets
of size exp(290) tractable.  Resumable processes actually consume steps and
exist to prove the attempt interface against the sampler algebra.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import distx
from .distx import DistX, RuntimeModel
from .schedules import Schedule
from .streams import CounterStream, stream_key

_CHUNK = 4096


@dataclass(frozen=True)
class Caps:
    """Safety limits for one schedule execution."""

    max_attempts: int = 10_000_000
    max_total_cost: float = 1e300


def default_caps(e_hint: float | None = None) -> Caps:
    """Default caps; with a hint on E[X] the cost cap becomes exp(hint + 20)."""
    if e_hint is None:
        return Caps()
    exponent = float(e_hint) + 20.0
    return Caps(max_total_cost=1e300 if exponent >= 690.0 else math.exp(exponent))


class CapExceeded(RuntimeError):
    """An execution tripped a cap before finishing; .which names the cap."""

    def __init__(self, which: str, report: "ExecutionReport"):
        super().__init__(f"execution cap {which} exceeded after {report.attempts} attempts")
        self.which = which
        self.report = report


@dataclass(frozen=True)
class AttemptOutcome:
    """Result of one truncated attempt: completion flag and charged cost."""

    success: bool
    cost: float


@dataclass(frozen=True)
class ExecutionReport:
    """Outcome of driving one process through a schedule until first success."""

    success: bool
    total_cost: float
    attempts: int
    succeeding_index: int | None = None
    per_attempt: tuple[AttemptOutcome, ...] | None = None


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean of total cost with its standard error."""

    mean: float
    std_error: float
    trials: int
    seed: int
    n_capped: int = 0


# ---------------------------------------------------------------------------
# Processes.


@dataclass(frozen=True)
class SamplerProcess:
    """Virtual process: each fresh attempt draws an independent run cost T."""

    model: RuntimeModel

    @property
    def label(self) -> str:
        return f"sampler[{self.model.label}]"


@dataclass(frozen=True)
class ResumableProcess:
    """Step-budgeted process: factory builds a fresh instance per attempt.

    An instance's advance(n) consumes up to n whole steps and returns
    (done, steps_consumed).
    """

    factory: object
    label: str = "resumable"


class GeometricCoinRun:
    """Stepped run that succeeds each step with probability exp(-X).

    X is drawn once at instance creation, so a sequence of fresh instances
    realizes the memoryless runtime law as an actual computation.
    """

    def __init__(self, dist: DistX, rng: CounterStream):
        self._p = math.exp(-distx.sample_x(dist, rng))
        self._rng = rng

    def advance(self, n: int) -> tuple[bool, int]:
        consumed = 0
        remaining = int(n)
        while remaining > 0:
            take = min(_CHUNK, remaining)
            flips = self._rng.random(take) < self._p
            hit = int(np.argmax(flips)) if flips.any() else -1
            if hit >= 0:
                return True, consumed + hit + 1
            consumed += take
            remaining -= take
        return False, consumed


def geometric_coin_process(dist: DistX) -> ResumableProcess:
    return ResumableProcess(
        factory=lambda rng: GeometricCoinRun(dist, rng),
        label=f"geometric_coin[{dist.label}]",
    )


class BitstringGuessRun:
    """Guesses a planted k-bit string uniformly once per step.

    A genuine always-correct randomized search; per-step success probability
    is 2**-k, so X is identically k*ln(2).
    """

    def __init__(self, k: int, rng: CounterStream):
        self._space = 1 << int(k)
        self._target = int(rng.random() * self._space)
        self._rng = rng

    def advance(self, n: int) -> tuple[bool, int]:
        consumed = 0
        remaining = int(n)
        while remaining > 0:
            take = min(_CHUNK, remaining)
            guesses = (self._rng.random(take) * self._space).astype(np.int64)
            hits = guesses == self._target
            hit = int(np.argmax(hits)) if hits.any() else -1
            if hit >= 0:
                return True, consumed + hit + 1
            consumed += take
            remaining -= take
        return False, consumed


def bitstring_guess_process(k: int) -> ResumableProcess:
    return ResumableProcess(
        factory=lambda rng: BitstringGuessRun(k, rng),
        label=f"bitstring_guess[k={int(k)}]",
    )


def bitstring_guess_model(k: int, law: str = "geometric") -> RuntimeModel:
    """The runtime model matching bitstring_guess_process(k): X = k*ln(2)."""
    return RuntimeModel(distx.constant(int(k) * math.log(2.0)), law)


# ---------------------------------------------------------------------------
# Randomness plumbing: one stream per (seed, trial, attempt).


@dataclass(frozen=True)
class TrialRng:
    """Per-trial randomness: attempt j gets the stream keyed (seed, trial, j)."""

    seed: int
    trial: int = 0

    def attempt(self, index: int) -> CounterStream:
        return CounterStream(stream_key(self.seed, self.trial, index))


# ---------------------------------------------------------------------------
# Attempt and schedule execution.


def run_once_truncated(process, budget: float, rng: CounterStream) -> AttemptOutcome:
    """One truncated attempt with the given budget and its own randomness."""
    budget = float(budget)
    if budget <= 0.0:
        raise ValueError(f"budget must be positive, got {budget!r}")
    if isinstance(process, SamplerProcess):
        model = process.model
        effective = budget if model.law == "deterministic" else math.floor(budget)
        if effective < 1.0 and model.law == "geometric":
            return AttemptOutcome(success=False, cost=0.0)
        t_run = distx.sample_t(model, rng)
        if t_run <= effective:
            return AttemptOutcome(success=True, cost=t_run)
        return AttemptOutcome(success=False, cost=effective)
    if isinstance(process, ResumableProcess):
        instance = process.factory(rng)
        done, consumed = instance.advance(int(math.floor(budget)))
        return AttemptOutcome(success=done, cost=float(consumed))
    raise TypeError(f"unknown process type {type(process).__name__}")


def run_with_schedule(
    process,
    schedule: Schedule,
    rng: TrialRng,
    caps: Caps | None = None,
    record: bool = False,
) -> ExecutionReport:
    """Run attempts at schedule budgets until first success or a cap trips.

    Attempt j draws from the stream keyed (rng.seed, rng.trial, j).  Raises
    CapExceeded (carrying the partial report) when a cap trips.
    """
    caps = caps or Caps()
    total = 0.0
    attempts = 0
    trace = [] if record else None
    for budget in schedule.budgets():
        if attempts + 1 > caps.max_attempts:
            report = ExecutionReport(False, total, attempts, None, _trace(trace))
            raise CapExceeded("max_attempts", report)
        attempts += 1
        outcome = run_once_truncated(process, budget, rng.attempt(attempts))
        total += outcome.cost
        if record:
            trace.append(outcome)
        if outcome.success:
            return ExecutionReport(True, total, attempts, attempts, _trace(trace))
        if total > caps.max_total_cost:
            report = ExecutionReport(False, total, attempts, None, _trace(trace))
            raise CapExceeded("max_total_cost", report)
    raise RuntimeError("unreachable: schedules are infinite")


def _trace(trace):
    return tuple(trace) if trace is not None else None


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("VEGAS_RESTART_THREADS", "1") or "1")
    return max(1, int(workers))


def mc_expected_cost(
    process,
    schedule: Schedule,
    trials: int,
    seed: int,
    caps: Caps | None = None,
    on_cap: str = "raise",
    workers: int | None = None,
) -> MCEstimate:
    """Monte Carlo estimate of expected total cost over independent trials.

    Trial i uses streams keyed (seed, i, attempt), so the result is identical
    for any worker count and bit-for-bit reproducible for a fixed seed.  With
    on_cap="count", trials that trip a cap contribute their accrued cost and
    are tallied in n_capped instead of raising.
    """
    trials = int(trials)
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    if on_cap not in ("raise", "count"):
        raise ValueError(f"on_cap must be 'raise' or 'count', got {on_cap!r}")
    caps = caps or Caps()
    costs = np.empty(trials, dtype=np.float64)
    capped = np.zeros(trials, dtype=bool)

    def run_range(lo: int, hi: int):
        for trial in range(lo, hi):
            rng = TrialRng(seed, trial)
            try:
                report = run_with_schedule(process, schedule, rng, caps)
                costs[trial] = report.total_cost
            except CapExceeded as exc:
                if on_cap == "raise":
                    raise
                costs[trial] = exc.report.total_cost
                capped[trial] = True

    n_workers = _resolve_workers(workers)
    if n_workers == 1:
        run_range(0, trials)
    else:
        chunk = -(-trials // n_workers)
        spans = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(run_range, lo, hi) for lo, hi in spans]
            for fut in futures:
                fut.result()

    mean = float(np.mean(costs))
    std_error = float(np.std(costs, ddof=1) / math.sqrt(trials))
    return MCEstimate(
        mean=mean,
        std_error=std_error,
        trials=trials,
        seed=int(seed),
        n_capped=int(capped.sum()),
    )
