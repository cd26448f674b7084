"""Exact expected-cost oracle for (model, schedule) pairs plus the checkers
behind the verification suite.

The oracle uses renewal summation over independent attempts: with
(q_i, m_i) = runtime_stats at budget i, expected total cost is
sum_i (prod_{j<i} q_j) * m_i.  Cyclic schedules admit an exact closed-form
remainder; the unbounded escalating schedule gets a certified geometric tail
bound; anything else is scanned until the survival product hits exact zero.
Expected-cost claims are reported as [expected_cost, expected_cost +
tail_bound] enclosures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distx, schedules, starfn
from .distx import DistX, RuntimeModel, cdf, cdf_strict, expectation, runtime_stats
from .schedules import Schedule, budget_block

# Bound constants for the cost guarantees of the four strategies, used by the
# verification suite.  ALG1/ALG4 come from the construction itself; ALG3 and
# ALG5 are measured over the built-in zoo (both laws, E[X] in [1, 30]) and
# frozen with headroom.
ALG1_BOUND_CONSTANT = 16.0
ALG3_BOUND_CONSTANT = 2.0
ALG4_BOUND_CONSTANT = 12.0 * math.exp(10.0)
ALG5_BOUND_CONSTANT = 400.0

# Any single escalation block for bound E costs at most this factor times
# exp(E): the closing pair contributes 4*exp(10)*exp(E), and the k-th entry
# costs 4*ceil((v+2)^2+1)*exp(E)/v'^3 <= 8.4*exp(E)/v for trace values
# v >= 4.8 whose reciprocals sum to < 2.
_BLOCK_COST_FACTOR = 4.0 * math.exp(10.0) + 17.0


class TailNotConvergent(RuntimeError):
    """The oracle could not certify a tail bound within the attempt cap."""


@dataclass(frozen=True)
class CostEstimate:
    """Expected total cost with a certified truncation remainder.

    When finite, the true expected cost lies in
    [expected_cost, expected_cost + tail_bound].
    """

    expected_cost: float
    tail_bound: float
    attempts_summed: int

    @property
    def upper(self) -> float:
        return self.expected_cost + self.tail_bound


@dataclass(frozen=True)
class LemmaVerdict:
    """Outcome of one analytic check; margin is the slack of the inequality."""

    check: str
    holds: bool
    witness: object = None
    margin: float = math.nan
    detail: str = ""


def _group_partial(q: float, count: int, m: float) -> float:
    """sum_{j<count} q**j * m, stable for q near 0 and 1."""
    if q >= 1.0:
        return m * count
    if q <= 0.0:
        return m
    return m * (-math.expm1(count * math.log(q))) / (1.0 - q)


def _eval_group(model: RuntimeModel, count: int, budget: float):
    if distx.success_impossible(model, budget):
        q, m = runtime_stats(model, budget)
        return count, budget, 1.0, m, True
    q, m = runtime_stats(model, budget)
    return count, budget, q, m, False


def analytic_cost(
    model: RuntimeModel,
    schedule: Schedule,
    eps_tail: float = 1e-10,
    attempt_cap: int = 10_000_000,
) -> CostEstimate:
    """Exact expected total cost of running the schedule on the model.

    Returns +infinity only on a support argument (no budget the schedule ever
    issues can complete a run); raises TailNotConvergent when the series
    cannot be certified within attempt_cap attempts.
    """
    if eps_tail <= 0.0:
        raise ValueError(f"eps_tail must be positive, got {eps_tail!r}")
    if schedule.cycle is not None:
        return _cyclic_cost(model, schedule, eps_tail, attempt_cap)
    if schedule.kind == "universal":
        return _universal_cost(model, eps_tail, attempt_cap)
    return _scan_cost(model, schedule, eps_tail, attempt_cap)


def _cyclic_cost(model, schedule, eps_tail, attempt_cap) -> CostEstimate:
    stats = [_eval_group(model, c, b) for c, b in schedule.cycle]
    cycle_attempts = sum(c for c, *_ in stats)
    if all(hopeless for *_, hopeless in stats):
        return CostEstimate(math.inf, 0.0, cycle_attempts)

    cycle_cost = 0.0  # expected cost accrued over one cycle started fresh
    survival = 1.0
    for count, _budget, q, m, _hopeless in stats:
        cycle_cost += survival * _group_partial(q, count, m)
        survival *= q**count
    cycle_survival = survival
    if cycle_survival >= 1.0:
        raise TailNotConvergent(
            "cycle survival is numerically 1 although success has positive probability"
        )

    if cycle_survival <= 0.0:
        n_cycles = 1
    else:
        n_cycles = max(1, math.ceil(math.log(eps_tail) / math.log(cycle_survival)))
        n_cycles = min(n_cycles, max(1, attempt_cap // cycle_attempts))
    remaining = cycle_survival**n_cycles
    # total over k cycles is cycle_cost * (1 - Q**k) / (1 - Q); the remainder
    # after k cycles is exactly Q**k times the full total.
    full_total = cycle_cost / (1.0 - cycle_survival)
    partial = full_total * -math.expm1(n_cycles * math.log(cycle_survival)) if remaining else full_total
    tail = full_total * remaining
    return CostEstimate(partial, tail, n_cycles * cycle_attempts)


def _universal_cost(model, eps_tail, attempt_cap) -> CostEstimate:
    survival = 1.0
    total = 0.0
    attempts = 0
    for e in range(5, int(schedules.MAX_BLOCK_PARAM) + 1):
        if survival <= eps_tail:
            closing_budget = 2.0 * math.exp(e + 10.0)
            q_close, _ = runtime_stats(model, closing_budget)
            if q_close <= 0.5:
                # Every later block for bound e' >= e has survival factor at
                # most q_close**2 (its two closing attempts, and q is
                # nonincreasing in the budget) and costs at most
                # _BLOCK_COST_FACTOR * exp(e'), so the remainder is a
                # geometric series with ratio exp(1) * q_close**2 <= e/4.
                ratio = math.e * q_close * q_close
                tail = survival * _BLOCK_COST_FACTOR * math.exp(e) / (1.0 - ratio)
                return CostEstimate(total, tail, attempts)
        for count, budget in budget_block(float(e)).entries:
            count, budget, q, m, _hopeless = _eval_group(model, count, budget)
            total += survival * _group_partial(q, count, m)
            survival *= q**count
            attempts += count
            if survival <= 0.0:
                return CostEstimate(total, 0.0, attempts)
        if attempts > attempt_cap:
            raise TailNotConvergent(
                f"no tail certificate after {attempts} attempts of the escalating schedule"
            )
    raise schedules.ScheduleRangeError(
        "universal cost scan would need blocks past the E <= 280 guard"
    )


def _scan_cost(model, schedule, eps_tail, attempt_cap) -> CostEstimate:
    survival = 1.0
    total = 0.0
    attempts = 0
    position = 0
    peak_budget = 0.0
    is_luby = schedule.kind == "luby"
    unit = dict(schedule.params).get("unit", 1.0) if is_luby else None
    for count, budget in schedule.groups():
        count, budget, q, m, _hopeless = _eval_group(model, count, budget)
        total += survival * _group_partial(q, count, m)
        survival *= q**count
        attempts += count
        position += count
        peak_budget = max(peak_budget, budget)
        if survival <= 0.0:
            return CostEstimate(total, 0.0, attempts)
        if is_luby and survival <= eps_tail:
            q_peak, _ = runtime_stats(model, peak_budget)
            if q_peak <= 0.5:
                # Peaks of height >= peak_budget recur with index gaps at most
                # twice the peak multiplier; between the k-th and (k+1)-th
                # future peak every budget is at most unit times the position,
                # so the span costs at most unit * position**2 and the
                # position grows linearly in k.  With survival shrinking by
                # q_peak per peak, sum_k (k+1)^2 x^k = (1+x)/(1-x)^3 closes
                # the bound.
                mult = peak_budget / unit
                span = position + 4.0 * mult
                tail = (
                    survival
                    * unit
                    * span
                    * span
                    * (1.0 + q_peak)
                    / (1.0 - q_peak) ** 3
                )
                return CostEstimate(total, tail, attempts)
        if attempts > attempt_cap:
            raise TailNotConvergent(
                f"no tail certificate after {attempts} attempts of schedule {schedule.label}"
            )
    raise RuntimeError("unreachable: schedules are infinite")


def renewal_partial_cost(model: RuntimeModel, budgets) -> float:
    """Expected cost accrued over the given finite budget prefix.

    sum_i (prod_{j<i} q_j) * m_i; survivors of the last attempt pay their
    accrued cost, which matches exhaustive outcome-tree enumeration.
    """
    survival = 1.0
    total = 0.0
    for budget in budgets:
        q, m = runtime_stats(model, float(budget))
        total += survival * m
        survival *= q
    return total


def expected_runtime(model: RuntimeModel) -> float:
    """E[T], the expected cost of one untruncated fresh run."""
    return distx.expectation_exp(model.dist)


# ---------------------------------------------------------------------------
# Threshold-witness machinery.

_GRID_POINTS = 10_001


def _cdf_strict_vec(dist: DistX, ts: np.ndarray) -> np.ndarray:
    if dist.family == "adversarial_density":
        a = math.exp(-(dist.E + 1.0))
        t_max = dist.E + 1.0 + math.log1p(a)
        out = np.clip(np.exp(ts - (dist.E + 1.0)) - a, 0.0, 1.0)
        out[ts <= 0.0] = 0.0
        out[ts >= t_max] = 1.0
        return out
    xs = np.array([x for x, _ in dist.atoms])
    cum = np.concatenate([[0.0], np.cumsum([p for _, p in dist.atoms])])
    return cum[np.searchsorted(xs, ts, side="left")]


def _threshold_candidates(dist: DistX, t_lo: float, t_hi: float) -> np.ndarray:
    """Grid plus just-above-atom (and support-edge) probe points in [t_lo, t_hi]."""
    delta = 1e-9 * (1.0 + expectation(dist))
    pts = [np.linspace(t_lo, t_hi, _GRID_POINTS)]
    if dist.family == "adversarial_density":
        t_max = distx.support_max(dist)
        knots = np.array([delta, t_max - delta, t_max, t_max + delta])
    else:
        knots = np.array([x + delta for x, _ in dist.atoms])
    pts.append(knots[(knots >= t_lo) & (knots <= t_hi)])
    cands = np.unique(np.concatenate(pts))
    return cands


def _min_log_ratio(dist: DistX, t_lo: float, t_hi: float):
    """Minimize t - ln Pr(X < t) over the candidate set; None if Pr is 0 throughout."""
    ts = _threshold_candidates(dist, t_lo, t_hi)
    probs = _cdf_strict_vec(dist, ts)
    mask = probs > 0.0
    if not mask.any():
        return None
    log_ratio = ts[mask] - np.log(probs[mask])
    idx = int(np.argmin(log_ratio))
    return float(ts[mask][idx]), float(log_ratio[idx])


def find_threshold_witness(dist: DistX) -> LemmaVerdict:
    """Is there t in [0, E[X]+1] with exp(t)/Pr(X < t) <= exp(E[X]+1)?

    Checked in non-strict form; margin is the log-space slack
    (E[X]+1) - min_t (t - ln Pr(X < t)).
    """
    ex = expectation(dist)
    found = _min_log_ratio(dist, 0.0, ex + 1.0)
    if found is None:
        return LemmaVerdict("lemma3", False, None, -math.inf, "Pr(X < t) = 0 on the interval")
    witness, log_ratio = found
    margin = (ex + 1.0) - log_ratio
    return LemmaVerdict("lemma3", margin >= 0.0, witness, margin)


def min_threshold_ratio(dist: DistX, t_lo: float, t_hi: float) -> tuple[float, float]:
    """Minimum of exp(t)/Pr(X < t) over [t_lo, t_hi] and its witness t."""
    if not (t_lo < t_hi):
        raise ValueError(f"need t_lo < t_hi, got {t_lo!r} >= {t_hi!r}")
    found = _min_log_ratio(dist, float(t_lo), float(t_hi))
    if found is None:
        return float(t_lo), math.inf
    witness, log_ratio = found
    return witness, math.exp(log_ratio) if log_ratio < 709.0 else math.inf


def check_two_phase_coverage(dist: DistX) -> LemmaVerdict:
    """Either Pr(X <= m - ln m) > 1/(m+1) or Pr(X <= m + 2) > 1/(ln m + 2), m = E[X].

    Inner comparisons are non-strict (<=), outer ones strict (>), exactly as
    the two-threshold schedule's analysis needs them.
    """
    ex = expectation(dist)
    if ex < 1.0:
        raise ValueError(f"two-phase coverage needs E[X] >= 1, got {ex!r}")
    log_ex = math.log(ex)
    lhs_low = cdf(dist, ex - log_ex)
    rhs_low = 1.0 / (ex + 1.0)
    lhs_high = cdf(dist, ex + 2.0)
    rhs_high = 1.0 / (log_ex + 2.0)
    low_ok = lhs_low > rhs_low
    high_ok = lhs_high > rhs_high
    witness = "low" if low_ok else ("high" if high_ok else None)
    margin = max(lhs_low - rhs_low, lhs_high - rhs_high)
    return LemmaVerdict("lemma5", low_ok or high_ok, witness, margin)


def _require_upper_bound(dist: DistX, e: float) -> float:
    e = float(e)
    ex = expectation(dist)
    if e < 5.0 or e < ex - 1e-12:
        raise ValueError(f"need E >= max(E[X], 5) = {max(ex, 5.0)!r}, got {e!r}")
    return e


def check_block_coverage(dist: DistX, e: float) -> LemmaVerdict:
    """For a bound e >= max(E[X], 5): some shrink step k has
    Pr(X < e - v[k]) >= 1/((v[k-1]+2)^2 + 1), or else Pr(X < e + 10) >= 1/2.

    This holds for every valid input; a failed verdict indicates a bug and is
    treated as a hard error by the verify command.
    """
    e = _require_upper_bound(dist, e)
    values = starfn.shrink_trace(e).values
    for k in range(1, len(values)):
        lhs = cdf_strict(dist, e - values[k])
        rhs = 1.0 / ((values[k - 1] + 2.0) ** 2 + 1.0)
        if lhs >= rhs:
            return LemmaVerdict("lemma9", True, k, lhs - rhs)
    lhs = cdf_strict(dist, e + 10.0)
    return LemmaVerdict("lemma9", lhs >= 0.5, "tail", lhs - 0.5)


def block_success_prob(model: RuntimeModel, e: float) -> float:
    """Probability that one escalation block for bound e completes a run."""
    e = _require_upper_bound(model.dist, e)
    log_fail = 0.0
    for count, budget in budget_block(e).entries:
        q, _ = runtime_stats(model, budget)
        if q <= 0.0:
            return 1.0
        log_fail += count * math.log(q)
    return -math.expm1(log_fail)
