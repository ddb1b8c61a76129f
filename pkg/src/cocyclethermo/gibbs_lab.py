"""Empirical Gibbs cylinder measures and the diagnostics built on them:
shift-invariance defects, Gibbs-ratio scans, correlation/mixing tables,
and the product- and power-pressure consistency checks.

The equilibrium state of a general subadditive potential is not exactly
computable, so the lab commits to the Gibbs-inverted approximant (cylinder
weights proportional to the word weights) and measures its defects instead
of hiding them: the Gibbs inequality pins the approximant within a uniform
constant of the truth, which is exactly what the scans quantify.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import LogSumAccumulator
from .sft_core import enumerate_words, product_shift, require_primitive
from .cocycle_algebra import block_cocycle
from .pressure_engine import (
    ProductPotential,
    SingularValuePotential,
    as_potential,
    pressure_estimate,
)


class BudgetExceededError(ValueError):
    """A requested table would exceed the word budget."""


@dataclass
class CylinderTable:
    """Normalized weights on the length-``n`` cylinders."""

    n: int
    weights: dict
    p_hat: float
    log_normalizer: float

    def total(self):
        return sum(self.weights.values())

    def weight(self, word):
        return self.weights.get(tuple(word), 0.0)


def empirical_equilibrium(subshift, cocycle, n, p_hat=0.0):
    """Gibbs-inverted cylinder table: weights proportional to word weights.

    The normalization makes the pressure estimate ``p_hat`` drop out of
    the weights; it is retained on the table for the Gibbs-ratio
    diagnostic.
    """
    potential = as_potential(cocycle)
    logs = {}
    acc = LogSumAccumulator()
    for w in enumerate_words(subshift, n):
        state = potential.initial_state()
        for sym in w:
            state = potential.extend(state, sym)
        value = potential.log_value(state)
        logs[w] = value
        acc.add(value)
    log_z = acc.log_total()
    weights = {w: math.exp(v - log_z) for w, v in logs.items()}
    return CylinderTable(n=n, weights=weights, p_hat=p_hat, log_normalizer=log_z)


def shift_invariance_defect(table):
    """max over (n-1)-words of |left-extension mass - right-extension mass|.

    Exact equilibrium states are shift invariant, so both marginals of a
    length-``n`` table agree; the defect measures how far the approximant
    is from that.
    """
    if table.n < 2:
        raise ValueError("defect needs tables of length >= 2")
    left = {}
    right = {}
    for w, p in table.weights.items():
        left[w[1:]] = left.get(w[1:], 0.0) + p
        right[w[:-1]] = right.get(w[:-1], 0.0) + p
    keys = set(left) | set(right)
    return max(abs(left.get(k, 0.0) - right.get(k, 0.0)) for k in keys)


@dataclass
class GibbsScan:
    min_ratio: float
    max_ratio: float
    c_hat: float
    per_n: dict
    drift_slope: float

    def to_dict(self):
        return {
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "c_hat": self.c_hat,
            "per_n": {str(k): v for k, v in self.per_n.items()},
            "drift_slope": self.drift_slope,
        }


def gibbs_ratio_scan(subshift, cocycle, tables, p_hat):
    """Extremes of ``weight(I) / (e^{-n p_hat} * word_weight(I))`` over all
    tables, plus the empirical Gibbs constant and the drift slope.

    With exact weights and the true pressure every ratio is 1; an offset
    ``delta`` in ``p_hat`` makes ratios drift like ``e^{n delta}``, so the
    fitted slope of the log-ratios against ``n`` estimates the offset.
    """
    potential = as_potential(cocycle)
    per_n = {}
    min_ratio, max_ratio = math.inf, -math.inf
    for table in tables:
        lo, hi = math.inf, -math.inf
        for w, p in table.weights.items():
            state = potential.initial_state()
            for sym in w:
                state = potential.extend(state, sym)
            log_ratio = math.log(p) - (potential.log_value(state) - table.n * p_hat)
            lo = min(lo, log_ratio)
            hi = max(hi, log_ratio)
        per_n[table.n] = (math.exp(lo), math.exp(hi))
        min_ratio = min(min_ratio, math.exp(lo))
        max_ratio = max(max_ratio, math.exp(hi))
    c_hat = max(max_ratio, 1.0 / min_ratio)
    lengths = sorted(per_n)
    if len(lengths) >= 2:
        xs = np.array(lengths, dtype=float)
        ys = np.array([0.5 * (math.log(per_n[n][0]) + math.log(per_n[n][1])) for n in lengths])
        drift = float(np.polyfit(xs, ys, 1)[0])
    else:
        drift = 0.0
    return GibbsScan(
        min_ratio=min_ratio,
        max_ratio=max_ratio,
        c_hat=c_hat,
        per_n=per_n,
        drift_slope=drift,
    )


@dataclass
class BoundedDistortion:
    constant: float
    justification: str

    def to_dict(self):
        return {"constant": self.constant, "justification": self.justification}


def bounded_distortion_constant(cocycle, n_max=None):
    """Distortion constant of a one-step cocycle's weights across cylinders.

    Word weights of a one-step cocycle are constant on every cylinder of
    the word's length, so the constant is exactly 1.  Kept as an operation
    so potentials with longer memory have a seam to report more.
    """
    return BoundedDistortion(
        constant=1.0,
        justification=(
            "one-step generators: the word weight is constant on each "
            "cylinder, so the distortion ratio is identically 1"
        ),
    )


def correlation(subshift, cocycle, word_i, word_j, k, table_cache=None, budget=None):
    """Mass of ``[I] intersect shift^{-k}[J]`` under the length-``(k+|J|)``
    empirical table: the sum of table weights over ``I K J`` with ``K``
    running over admissible connectors of length ``k - |I|``.
    """
    word_i, word_j = tuple(word_i), tuple(word_j)
    if k < len(word_i):
        raise ValueError("gap must be at least the length of the first word")
    n_table = k + len(word_j)
    if budget is not None:
        from .sft_core import word_count

        if word_count(subshift, n_table) > budget:
            raise BudgetExceededError(
                f"table of length {n_table} exceeds the word budget"
            )
    if table_cache is not None and n_table in table_cache:
        table = table_cache[n_table]
    else:
        table = empirical_equilibrium(subshift, cocycle, n_table)
        if table_cache is not None:
            table_cache[n_table] = table
    gap = k - len(word_i)
    total = 0.0
    if gap == 0:
        if subshift.allows(word_i[-1], word_j[0]) or len(word_i) == 0:
            total = table.weight(word_i + word_j)
    else:
        for conn in enumerate_words(subshift, gap):
            if not subshift.allows(word_i[-1], conn[0]):
                continue
            if not subshift.allows(conn[-1], word_j[0]):
                continue
            total += table.weight(word_i + conn + word_j)
    return total


@dataclass
class MixingRow:
    word_i: tuple
    word_j: tuple
    k: int
    correlation: float
    defect: float
    ratio_bound: float
    violation: bool

    def to_dict(self):
        return {
            "word_i": list(self.word_i),
            "word_j": list(self.word_j),
            "k": self.k,
            "correlation": self.correlation,
            "defect": self.defect,
            "ratio_bound": self.ratio_bound,
            "violation": self.violation,
        }


@dataclass
class MixingReport:
    rows: list
    c_hat: float
    tolerance: float

    @property
    def violations(self):
        return [r for r in self.rows if r.violation]

    def to_dict(self):
        return {
            "rows": [r.to_dict() for r in self.rows],
            "c_hat": self.c_hat,
            "tolerance": self.tolerance,
        }


def mixing_report(subshift, cocycle, pair_list, k_list, p_hat=None, tol=1e-6):
    """Correlation defects and ratio bounds for the given cylinder pairs.

    For each pair and gap the row reports the raw correlation, the defect
    against the product of marginal weights, and their ratio.  The ratio
    is flagged when it exceeds ``c_hat**4`` (the one-step distortion
    constant is 1, so no extra factor) beyond the tolerance.
    """
    pair_list = [(tuple(a), tuple(b)) for a, b in pair_list]
    k_list = sorted(set(int(k) for k in k_list))
    max_len = max(max(len(a), len(b)) for a, b in pair_list)
    max_table = max(k_list) + max(len(b) for _, b in pair_list)

    if p_hat is None:
        est = pressure_estimate(subshift, cocycle, budget=10**5)
        p_hat = est.midpoint

    cache = {}
    for n in range(1, max_table + 1):
        cache[n] = empirical_equilibrium(subshift, cocycle, n, p_hat=p_hat)
    scan = gibbs_ratio_scan(
        subshift, cocycle, [cache[n] for n in range(1, max_table + 1)], p_hat
    )
    bound = scan.c_hat**4

    rows = []
    for word_i, word_j in pair_list:
        mu_i = cache[len(word_i)].weight(word_i)
        mu_j = cache[len(word_j)].weight(word_j)
        for k in k_list:
            if k < len(word_i):
                continue
            corr = correlation(subshift, cocycle, word_i, word_j, k, table_cache=cache)
            product = mu_i * mu_j
            defect = abs(corr - product)
            ratio = corr / product if product > 0 else math.inf
            rows.append(
                MixingRow(
                    word_i=word_i,
                    word_j=word_j,
                    k=k,
                    correlation=corr,
                    defect=defect,
                    ratio_bound=ratio,
                    violation=ratio > bound * (1.0 + tol),
                )
            )
    return MixingReport(rows=rows, c_hat=scan.c_hat, tolerance=tol)


@dataclass
class PressureCheck:
    """Outcome of a pressure identity check between two bracket intervals."""

    reference: tuple
    derived: tuple
    passed: bool
    factor: float
    reference_estimate: dict = field(default_factory=dict)
    derived_estimate: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "reference_interval": list(self.reference),
            "derived_interval": list(self.derived),
            "passed": self.passed,
            "factor": self.factor,
            "reference_estimate": self.reference_estimate,
            "derived_estimate": self.derived_estimate,
        }


def _intervals_intersect(a, b):
    return a[0] <= b[1] + 1e-12 and b[0] <= a[1] + 1e-12


def product_pressure_check(subshift, cocycle, budget=10**6, threads=1):
    """Verify that the product system's pressure doubles the base pressure.

    The product shift runs on pair symbols with componentwise transitions;
    the pair potential multiplies the two factor weights.  The check
    passes when twice the base bracket intersects the product bracket.
    """
    require_primitive(subshift)
    single = pressure_estimate(subshift, cocycle, budget=budget, threads=threads)
    pair_spec = product_shift(subshift, subshift)
    base = as_potential(cocycle)
    pair_potential = ProductPotential(base, base, subshift.q)
    product = pressure_estimate(pair_spec, pair_potential, budget=budget, threads=threads)
    reference = (2 * single.lower, 2 * single.upper)
    derived = (product.lower, product.upper)
    return PressureCheck(
        reference=reference,
        derived=derived,
        passed=_intervals_intersect(reference, derived),
        factor=2.0,
        reference_estimate=single.to_dict(),
        derived_estimate=product.to_dict(),
    )


def power_pressure_check(subshift, cocycle, n, budget=10**6, threads=1):
    """Verify that the ``n``-block system's pressure is ``n`` times the base.

    The block system is the power system: non-overlapping ``n``-blocks
    with concatenation transitions and the block product as generator, so
    its partition sums coincide with the base sums at multiples of ``n``.
    """
    if n < 2:
        raise ValueError("power must be >= 2")
    require_primitive(subshift)
    single = pressure_estimate(subshift, cocycle, budget=budget, threads=threads)
    spec_n, cocycle_n, _ = block_cocycle(subshift, cocycle, n)
    power = pressure_estimate(spec_n, cocycle_n, budget=budget, threads=threads)
    reference = (n * single.lower, n * single.upper)
    derived = (power.lower, power.upper)
    return PressureCheck(
        reference=reference,
        derived=derived,
        passed=_intervals_intersect(reference, derived),
        factor=float(n),
        reference_estimate=single.to_dict(),
        derived_estimate=power.to_dict(),
    )
