"""Comparative statistics: finite-population sampling, resolution times,
and the one-sided Wilcoxon rank-sum (Mann-Whitney U) test with effect sizes.
"""

import math
import random
from dataclasses import dataclass
from itertools import combinations, groupby
from statistics import NormalDist
from typing import Optional, Sequence

from .errors import EmptySample, InvalidConfidence, SampleTooLarge, Unresolved

_EXACT_LIMIT = 12  # total sample size at or below which the exact test runs


@dataclass(frozen=True)
class RankSumResult:
    u_x: float
    u_y: float
    z: float
    p_value: float
    tail: str
    rbc: float
    cles: float
    n_x: int
    n_y: int
    method: str

    def as_dict(self) -> dict:
        return {
            "u_x": self.u_x, "u_y": self.u_y, "z": self.z,
            "p_value": self.p_value, "tail": self.tail,
            "rbc": self.rbc, "cles": self.cles,
            "n_x": self.n_x, "n_y": self.n_y, "method": self.method,
        }


@dataclass(frozen=True)
class SamplePlan:
    population: int
    confidence: float
    interval: float
    sample_size: int
    seed: int


def sample_size(population: int, confidence: float, interval: float) -> int:
    """Sample size for a proportion at the given confidence level and
    confidence interval (in percentage points), with finite-population
    correction and rounding to the nearest integer.
    """
    if population < 1:
        raise InvalidConfidence(f"population must be >= 1, got {population}")
    if not 0.0 < confidence < 1.0:
        raise InvalidConfidence(f"confidence must be in (0, 1), got {confidence}")
    if interval <= 0:
        raise InvalidConfidence(f"interval must be positive, got {interval}")
    z = NormalDist().inv_cdf((1.0 + confidence) / 2.0)
    ss = z * z * 0.25 / (interval / 100.0) ** 2
    adjusted = ss / (1.0 + (ss - 1.0) / population)
    n = round(adjusted)
    return min(n, population)


def make_plan(population: int, confidence: float, interval: float, seed: int) -> SamplePlan:
    return SamplePlan(
        population=population, confidence=confidence, interval=interval,
        sample_size=sample_size(population, confidence, interval), seed=seed,
    )


def draw_sample(keys: Sequence, n: int, seed: int) -> list:
    """Uniform sample without replacement, deterministic for a given seed,
    returned in the keys' original relative order."""
    if n > len(keys):
        raise SampleTooLarge(f"sample of {n} from population of {len(keys)}")
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(keys)), n))
    return [keys[i] for i in picked]


def resolution_days(issue) -> int:
    """Whole days between an issue's creation and resolution timestamps."""
    if issue.resolved_at is None:
        raise Unresolved(f"issue {issue.external_id} has no resolution date")
    return (issue.resolved_at - issue.created_at).days


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def rank_sum_test(x: Sequence[float], y: Sequence[float], tail: str = "two-sided") -> RankSumResult:
    """Wilcoxon rank-sum / Mann-Whitney U test.

    U_x counts pairs where x beats y, ties at half weight.  The p-value is
    exact (full enumeration of rank assignments) when n_x + n_y <= 12 and
    the pooled data has no ties; otherwise a normal approximation with
    tie-corrected variance and a 0.5 continuity correction is used.

    tail="less" tests whether x tends below y; "greater" the opposite.
    """
    if tail not in ("less", "greater", "two-sided"):
        raise EmptySample(f"unknown tail {tail!r}")
    n_x, n_y = len(x), len(y)
    if n_x < 1 or n_y < 1:
        raise EmptySample("both samples must be non-empty")

    pooled = list(x) + list(y)
    ranks = _midranks(pooled)
    rank_sum_x = sum(ranks[:n_x])
    u_x = rank_sum_x - n_x * (n_x + 1) / 2.0
    u_y = n_x * n_y - u_x

    has_ties = len(set(pooled)) < len(pooled)
    n = n_x + n_y

    if n <= _EXACT_LIMIT and not has_ties:
        method = "exact"
        # every way of choosing which pooled ranks belong to x
        total = math.comb(n, n_x)
        rank_base = n_x * (n_x + 1) / 2.0
        le = ge = 0
        for combo in combinations(range(1, n + 1), n_x):
            u = sum(combo) - rank_base
            if u <= u_x:
                le += 1
            if u >= u_x:
                ge += 1
        p_less = le / total
        p_greater = ge / total
        if tail == "less":
            p = p_less
        elif tail == "greater":
            p = p_greater
        else:
            p = min(1.0, 2.0 * min(p_less, p_greater))
        mean = n_x * n_y / 2.0
        sd = math.sqrt(n_x * n_y * (n + 1) / 12.0)
        z = (u_x - mean) / sd if sd > 0 else 0.0
    else:
        method = "normal-approx"
        mean = n_x * n_y / 2.0
        tie_term = 0.0
        for _, grp in groupby(sorted(pooled)):
            t = len(list(grp))
            tie_term += t ** 3 - t
        var = n_x * n_y / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
        if var <= 0:
            # all pooled values identical: U is constant, so P(U <= u) = P(U >= u) = 1
            z = 0.0
            p = 1.0
            return RankSumResult(
                u_x=u_x, u_y=u_y, z=z, p_value=p, tail=tail,
                rbc=2.0 * (u_x / (n_x * n_y)) - 1.0, cles=u_x / (n_x * n_y),
                n_x=n_x, n_y=n_y, method=method,
            )
        sd = math.sqrt(var)
        if tail == "less":
            z = (u_x - mean + 0.5) / sd
            p = _normal_cdf(z)
        elif tail == "greater":
            z = (u_x - mean - 0.5) / sd
            p = _normal_sf(z)
        else:
            diff = u_x - mean
            cc = 0.5 if diff > 0 else (-0.5 if diff < 0 else 0.0)
            z = (diff - cc) / sd
            p = min(1.0, 2.0 * _normal_sf(abs(z)))

    cles = u_x / (n_x * n_y)
    rbc = 2.0 * cles - 1.0
    return RankSumResult(
        u_x=u_x, u_y=u_y, z=z, p_value=p, tail=tail,
        rbc=rbc, cles=cles, n_x=n_x, n_y=n_y, method=method,
    )
