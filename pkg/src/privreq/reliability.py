"""Inter-rater reliability statistics.

Implements the MASI distance for set-valued labels, Krippendorff's alpha
with a pluggable distance function, and Fleiss' kappa for fixed-rater
categorical data.  All functions are pure and reentrant.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Optional, Sequence

from .errors import DegenerateAgreement, InsufficientData, NoVariation, RaggedMatrix

LabelSet = frozenset
Distance = Callable[[frozenset, frozenset], float]


@dataclass(frozen=True)
class IRRResult:
    metric: str
    value: float
    n_items: int
    n_coders: int
    distance: Optional[str] = None
    excluded_items: int = 0

    def as_dict(self) -> dict:
        d = {
            "metric": self.metric,
            "value": self.value,
            "n_items": self.n_items,
            "n_coders": self.n_coders,
        }
        if self.distance is not None:
            d["distance"] = self.distance
        d["excluded_items"] = self.excluded_items
        return d


def masi_distance(a, b) -> float:
    """MASI distance between two label sets.

    distance = 1 - J * M where J is the Jaccard similarity and M is the
    monotonicity factor: 1 when the sets are equal, 2/3 when one strictly
    contains the other, 1/3 when they overlap without containment, and 0
    when they are disjoint.  Two empty sets count as equal.

    Computed in exact rational arithmetic and converted to float once, so
    spot values like 2/3 and 8/9 come out bit-equal to the obvious float
    literals.
    """
    a, b = frozenset(a), frozenset(b)
    if a == b:
        return 0.0
    inter = a & b
    union = a | b
    if not inter:
        return 1.0
    if a < b or b < a:
        m = Fraction(2, 3)
    else:
        m = Fraction(1, 3)
    j = Fraction(len(inter), len(union))
    return float(1 - j * m)


def nominal_distance(a, b) -> float:
    """0 when the two values are equal, 1 otherwise."""
    return 0.0 if frozenset(a) == frozenset(b) else 1.0


_DISTANCES = {"masi": masi_distance, "nominal": nominal_distance}


def get_distance(name: str) -> Distance:
    try:
        return _DISTANCES[name]
    except KeyError:
        raise InsufficientData(f"unknown distance {name!r}") from None


def krippendorff_alpha(
    units: Mapping[Hashable, Mapping[Hashable, frozenset]],
    distance: Distance = masi_distance,
    distance_name: Optional[str] = None,
) -> IRRResult:
    """Krippendorff's alpha over multi-coder units with missing data allowed.

    ``units`` maps item -> coder -> label set.  Items with fewer than two
    annotations carry no pairable values and are excluded (their count is
    reported in ``excluded_items``).

    alpha = 1 - D_o/D_e where D_o averages within-unit pair distances
    weighted by 1/(m_u - 1) and D_e averages distances over all pairs of
    pooled pairable values.
    """
    usable: list[list[frozenset]] = []
    excluded = 0
    coders: set = set()
    for item in units:
        ratings = units[item]
        coders.update(ratings.keys())
        values = [frozenset(v) for v in ratings.values()]
        if len(values) >= 2:
            usable.append(values)
        else:
            excluded += 1
    if len(usable) < 2:
        raise InsufficientData(
            f"need at least 2 items with 2+ annotations, have {len(usable)}"
        )

    # distances repeat heavily across units: memoize per unordered set pair
    cache: dict[frozenset, float] = {}

    def d(x: frozenset, y: frozenset) -> float:
        key = frozenset((x, y))
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = distance(x, y)
        return hit

    n_pairable = sum(len(v) for v in usable)

    observed = 0.0
    for values in usable:
        m = len(values)
        within = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                within += d(values[i], values[j])
        observed += 2.0 * within / (m - 1)
    observed /= n_pairable

    # expected disagreement from the pooled value frequencies
    freq: dict[frozenset, int] = {}
    for values in usable:
        for v in values:
            freq[v] = freq.get(v, 0) + 1
    distinct = list(freq)
    expected = 0.0
    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            expected += 2.0 * freq[distinct[i]] * freq[distinct[j]] * d(distinct[i], distinct[j])
    expected /= n_pairable * (n_pairable - 1)

    if expected == 0.0:
        raise NoVariation("all pairable values are identical; alpha is undefined")

    alpha = 1.0 - observed / expected
    return IRRResult(
        metric="krippendorff_alpha",
        value=alpha,
        n_items=len(usable),
        n_coders=len(coders),
        distance=distance_name or getattr(distance, "__name__", "custom").replace("_distance", ""),
        excluded_items=excluded,
    )


def fleiss_kappa(counts: Sequence[Sequence[int]]) -> IRRResult:
    """Fleiss' kappa from an items x categories matrix of rating counts.

    Every row must sum to the same number of raters n >= 2.  Uses integer
    accumulation so the result is exactly invariant under row and column
    permutations.
    """
    if not counts or len(counts[0]) < 2:
        raise RaggedMatrix("need at least one item and two categories")
    n_cat = len(counts[0])
    n = sum(counts[0])
    for row in counts:
        if len(row) != n_cat or sum(row) != n:
            raise RaggedMatrix("rows must share one category set and rater count")
    if n < 2:
        raise RaggedMatrix(f"need at least 2 raters per item, have {n}")

    n_items = len(counts)
    within = sum(c * c for row in counts for c in row) - n_items * n
    p_bar = within / (n_items * n * (n - 1))

    col = [0] * n_cat
    for row in counts:
        for j, c in enumerate(row):
            col[j] += c
    pe_num = sum(c * c for c in col)
    p_e = pe_num / (n_items * n) ** 2

    if p_e == 1.0:
        raise DegenerateAgreement("all ratings fall in one category; kappa is undefined")

    kappa = (p_bar - p_e) / (1.0 - p_e)
    return IRRResult(metric="fleiss_kappa", value=kappa, n_items=n_items, n_coders=n)
