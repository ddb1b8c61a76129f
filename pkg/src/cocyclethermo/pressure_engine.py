"""Certified two-sided bounds on subadditive pressure.

Upper bounds come from partition sums: submultiplicativity of the word
weights makes ``(1/n) log Z_n`` an upper bound for every ``n`` (Fekete), so
the minimum over a schedule is reported with no extrapolation.  Lower
bounds come from periodic orbits (spectral growth rates) and, when a
quasi-multiplicativity certificate is available, from chaining the best
word of the certified length.

All sums accumulate in log space with compensated summation; the raw
partition sum is never formed, so nothing overflows at any word length.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .numerics import LogSumAccumulator
from .sft_core import (
    enumerate_words,
    pair_decode,
    periodic_words,
    require_primitive,
    word_count,
)
from .cocycle_algebra import (
    CocycleSpec,
    log_profile,
    log_singular_value_function,
    log_spectral_value_function,
)


class MissingCertificateError(ValueError):
    """The quasi-multiplicativity certificate does not cover this length."""


class NoConnectorError(ValueError):
    """Some word pair admits no admissible connector within the bound."""

    def __init__(self, pair, k_max):
        self.pair = pair
        self.k_max = k_max
        super().__init__(
            f"no admissible connector of length <= {k_max} for pair {pair}; "
            "increase the connector bound or check primitivity"
        )


class SingularValuePotential:
    """Word weight of a matrix cocycle: the singular value function of the
    product along the word, with the cocycle's exponent."""

    def __init__(self, cocycle):
        self.cocycle = cocycle
        self.s = cocycle.s

    def initial_state(self):
        return np.eye(self.cocycle.d)

    def extend(self, state, symbol):
        return self.cocycle.generator(symbol) @ state

    def combine(self, first, second):
        """State of a concatenation from the states of its halves."""
        return second @ first

    def log_value(self, state):
        return log_singular_value_function(state, self.s)

    def log_eig_value(self, word):
        """Spectral version of the weight, for periodic-orbit rates."""
        state = self.initial_state()
        for sym in word:
            state = self.extend(state, sym)
        return log_spectral_value_function(state, self.s)

    def log_symbol_floor(self):
        """Guaranteed log weight gain per appended symbol (may be negative)."""
        floors = []
        for sym in self.cocycle.symbols:
            vals = np.linalg.svd(self.cocycle.generator(sym), compute_uv=False)
            floors.append(self.s * math.log(vals[-1]))
        return min(floors)


class ProductPotential:
    """Weight of pair words over a product shift: the product of two factor
    weights evaluated on the unzipped component words."""

    def __init__(self, left, right, right_alphabet):
        self.left = left
        self.right = right
        self.qb = right_alphabet

    def _split(self, symbol):
        return pair_decode(symbol, self.qb)

    def initial_state(self):
        return (self.left.initial_state(), self.right.initial_state())

    def extend(self, state, symbol):
        a, b = self._split(symbol)
        return (self.left.extend(state[0], a), self.right.extend(state[1], b))

    def combine(self, first, second):
        return (
            self.left.combine(first[0], second[0]),
            self.right.combine(first[1], second[1]),
        )

    def log_value(self, state):
        return self.left.log_value(state[0]) + self.right.log_value(state[1])

    def log_eig_value(self, word):
        first = tuple(self._split(sym)[0] for sym in word)
        second = tuple(self._split(sym)[1] for sym in word)
        return self.left.log_eig_value(first) + self.right.log_eig_value(second)

    def log_symbol_floor(self):
        return self.left.log_symbol_floor() + self.right.log_symbol_floor()


def as_potential(cocycle_or_potential):
    if isinstance(cocycle_or_potential, CocycleSpec):
        return SingularValuePotential(cocycle_or_potential)
    return cocycle_or_potential


def _subtree_accumulate(subshift, potential, n, first_symbol, acc, best=None):
    """DFS over words starting with ``first_symbol``, streaming leaf weights.

    ``best`` (if given) is a one-element list tracking the maximal
    ``(log weight, word)`` over the subtree, used by the chained bound.
    """
    succ = subshift.successors
    state = potential.extend(potential.initial_state(), first_symbol)
    if n == 1:
        value = potential.log_value(state)
        acc.add(value)
        if best is not None and value > best[0][0]:
            best[0] = (value, (first_symbol,))
        return
    word = [first_symbol]
    stack = [(iter(succ[first_symbol - 1]), state)]
    while stack:
        it, state = stack[-1]
        sym = next(it, None)
        if sym is None:
            stack.pop()
            word.pop()
            continue
        new_state = potential.extend(state, sym)
        if len(word) + 1 == n:
            value = potential.log_value(new_state)
            acc.add(value)
            if best is not None and value > best[0][0]:
                best[0] = (value, tuple(word) + (sym,))
        else:
            word.append(sym)
            stack.append((iter(succ[sym - 1]), new_state))


def _log_partition(subshift, potential, n, threads=1, track_best=False):
    if n < 1:
        raise ValueError("word length must be >= 1")
    symbols = range(1, subshift.q + 1)

    def run(first):
        acc = LogSumAccumulator()
        best = [(-math.inf, None)] if track_best else None
        _subtree_accumulate(subshift, potential, n, first, acc, best)
        return acc, (best[0] if track_best else None)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, symbols))
    else:
        parts = [run(first) for first in symbols]

    # merge in fixed symbol order: the reduction tree is independent of
    # the thread count, so results are bit-stable
    total = LogSumAccumulator()
    best = (-math.inf, None)
    for acc, sub_best in parts:
        total.merge(acc)
        if track_best and sub_best[0] > best[0]:
            best = sub_best
    if track_best:
        return total, best
    return total, None


def log_partition_sum(subshift, cocycle, n, threads=1):
    """log of the partition sum Z_n over the length-``n`` language."""
    potential = as_potential(cocycle)
    acc, _ = _log_partition(subshift, potential, n, threads=threads)
    return acc.log_total()


def partition_sum(subshift, cocycle, n, threads=1):
    """Z_n itself; prefer :func:`log_partition_sum` for anything large."""
    return math.exp(log_partition_sum(subshift, cocycle, n, threads=threads))


def pressure_upper(subshift, cocycle, n_list, threads=1):
    """min over the given lengths of ``(1/n) log Z_n``.

    Each term is a rigorous upper bound because the partition sums are
    submultiplicative, so their normalized logs decrease to the pressure.
    """
    if not n_list:
        raise ValueError("need at least one word length")
    potential = as_potential(cocycle)
    return min(
        log_partition_sum(subshift, potential, n, threads=threads) / n for n in n_list
    )


def pressure_lower_periodic(subshift, cocycle, period_bound):
    """Best periodic-orbit growth rate up to the period bound.

    Each periodic word ``w`` carries the invariant measure on its orbit;
    the spectral version of the word weight grows at exactly the orbit's
    rate, so ``(1/|w|) log`` of it bounds the pressure from below (the
    orbit contributes zero entropy).  Returns ``(value, witness_word)``;
    ``(-inf, None)`` when no periodic word exists within the bound.
    """
    potential = as_potential(cocycle)
    best = -math.inf
    witness = None
    for w in periodic_words(subshift, period_bound):
        rate = potential.log_eig_value(w) / len(w)
        if rate > best:
            best = rate
            witness = w
    return best, witness


@dataclass
class QmCertificate:
    """Empirical quasi-multiplicativity certificate.

    For every admissible pair ``(I, J)`` with lengths up to ``n_max`` there
    is a connector ``K`` of length at most ``k`` with
    ``weight(IKJ) >= c * weight(I) * weight(J)``.  The certificate is
    verified exhaustively up to ``n_max`` and is labeled as such; it says
    nothing about longer words.
    """

    c: float
    k: int
    n_max: int
    worst_pair: tuple
    worst_connector: tuple
    pairs_tested: int
    label: str = "verified exhaustively up to n_max"

    def to_dict(self):
        return {
            "c": self.c,
            "k": self.k,
            "n_max": self.n_max,
            "worst_pair": [list(w) for w in self.worst_pair],
            "worst_connector": list(self.worst_connector),
            "pairs_tested": self.pairs_tested,
            "label": self.label,
        }


def qm_search(subshift, cocycle, n_max, k_max):
    """Exhaustive connector search for a quasi-multiplicativity certificate.

    For each pair of words with lengths up to ``n_max`` the search scans
    connectors of length 0..``k_max`` (shortest first, then lexicographic)
    and keeps the best achieved ratio; ``c`` is the worst of these over
    all pairs and ``k`` the smallest connector bound that achieves ``c``
    for every pair.

    Raises
    ------
    NoConnectorError
        If some pair admits no admissible connector within ``k_max``.
    """
    if n_max < 1 or k_max < 1:
        raise ValueError("n_max and k_max must be >= 1")
    potential = as_potential(cocycle)

    words = []
    for n in range(1, n_max + 1):
        words.extend(enumerate_words(subshift, n))
    connectors = [()]
    for k in range(1, k_max + 1):
        connectors.extend(enumerate_words(subshift, k))

    states = {}
    log_values = {}

    def load(word):
        if word in states:
            return
        state = potential.initial_state()
        for sym in word:
            state = potential.extend(state, sym)
        states[word] = state
        log_values[word] = potential.log_value(state)

    for w in words:
        load(w)
    for k in connectors:
        if k:
            load(k)

    worst = (math.inf, None, None)  # (log ratio, pair, connector)
    per_pair = []  # cumulative best log ratio by connector length
    for left in words:
        for right in words:
            base = log_values[left] + log_values[right]
            best_by_len = [-math.inf] * (k_max + 1)
            best = (-math.inf, None)
            for conn in connectors:
                if conn:
                    if not subshift.allows(left[-1], conn[0]):
                        continue
                    if not subshift.allows(conn[-1], right[0]):
                        continue
                    state = potential.combine(states[left], states[conn])
                else:
                    if not subshift.allows(left[-1], right[0]):
                        continue
                    state = states[left]
                state = potential.combine(state, states[right])
                ratio = potential.log_value(state) - base
                if ratio > best_by_len[len(conn)]:
                    best_by_len[len(conn)] = ratio
                # strict improvement keeps the shortest, lexicographically
                # least connector among maximizers (connectors are scanned
                # in that order)
                if ratio > best[0] + 1e-15:
                    best = (ratio, conn)
            if best[1] is None:
                raise NoConnectorError((left, right), k_max)
            for k in range(1, k_max + 1):
                best_by_len[k] = max(best_by_len[k], best_by_len[k - 1])
            per_pair.append(best_by_len)
            if best[0] < worst[0]:
                worst = (best[0], (left, right), best[1])

    log_c = min(worst[0], 0.0)
    # smallest sufficient connector bound: every pair must reach a ratio of
    # at least c with a connector no longer than k
    k_needed = 0
    for best_by_len in per_pair:
        for k in range(k_max + 1):
            if best_by_len[k] >= worst[0] - 1e-12:
                k_needed = max(k_needed, k)
                break
    return QmCertificate(
        c=math.exp(log_c),
        k=k_needed,
        n_max=n_max,
        worst_pair=worst[1],
        worst_connector=worst[2],
        pairs_tested=len(words) ** 2,
    )


def pressure_lower_chained(subshift, cocycle, qm, n, threads=1, chain_sum=False):
    """Lower bound by chaining certified blocks of length ``n``.

    Blocks of the best word (or, with ``chain_sum``, all words with a
    multiplicity correction ``k + 1``) are joined by certificate
    connectors; every junction is charged the certificate cost ``c`` and a
    worst-case padding of ``k`` symbols at the weakest one-step factor.
    The bound is rigorous modulo the certificate, which is verified only
    up to ``qm.n_max``.
    """
    if n < 1:
        raise ValueError("block length must be >= 1")
    if n > qm.n_max:
        raise MissingCertificateError(
            f"certificate covers lengths up to {qm.n_max}, got {n}"
        )
    potential = as_potential(cocycle)
    acc, best = _log_partition(subshift, potential, n, threads=threads, track_best=True)
    floor = potential.log_symbol_floor()
    padding = qm.k * min(0.0, floor)
    if chain_sum:
        value = (acc.log_total() + math.log(qm.c) - math.log(qm.k + 1) + padding) / (
            n + qm.k
        )
        witness = f"chained sum over {acc.count} words of length {n}"
    else:
        value = (best[0] + math.log(qm.c) + padding) / (n + qm.k)
        witness = f"chained best word {best[1]}"
    return value, witness


@dataclass
class PressureEstimate:
    """Certified pressure bracket with provenance.

    ``upper`` is the minimum of ``(1/n) log Z_n`` over the lengths
    actually computed (``n_upper`` attains it); ``lower`` is the best of
    the periodic and chained bounds, with ``lower_witness`` describing
    which.  ``lower <= upper`` up to roundoff by construction.
    """

    lower: float
    upper: float
    n_upper: int
    lower_witness: str
    s: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(
                f"invalid bracket: lower {self.lower} exceeds upper {self.upper}"
            )

    @property
    def midpoint(self):
        if math.isinf(self.lower):
            return self.upper
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self):
        return self.upper - self.lower

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "n_upper": self.n_upper,
            "witness": self.lower_witness,
            "s": self.s,
            "meta": self.meta,
        }


def pressure_estimate(
    subshift,
    cocycle,
    budget=10**6,
    threads=1,
    chain_sum=False,
    period_bound=None,
    qm_n_max=3,
    qm_k_max=None,
):
    """Two-sided pressure bracket within a word budget.

    The upper schedule doubles ``n`` while the exact word count stays
    within the budget.  The lower bound is the best of the periodic-orbit
    bound and (when a certificate is found) the chained bound at the
    certified length.
    """
    potential = as_potential(cocycle)
    primitivity = require_primitive(subshift)
    if budget < subshift.q:
        raise ValueError("budget too small to enumerate even single symbols")

    notes = []
    words_used = 0

    # upper bound: doubling schedule under the budget
    uppers = {}
    n = 1
    while True:
        count = word_count(subshift, n)
        if n > 1 and words_used + count > budget:
            break
        words_used += count
        uppers[n] = log_partition_sum(subshift, potential, n, threads=threads) / n
        n *= 2
    n_upper, upper = min(uppers.items(), key=lambda item: (item[1], item[0]))

    # periodic lower bound
    if period_bound is None:
        period_bound = max(subshift.q, 8)
    lower, witness_word = pressure_lower_periodic(subshift, potential, period_bound)
    witness = (
        f"periodic orbit {witness_word}" if witness_word is not None else "none found"
    )

    # chained lower bound, when a certificate is within reach
    qm = None
    if qm_k_max is None:
        qm_k_max = max(1, primitivity - 1)
    qm_words = sum(word_count(subshift, m) for m in range(1, qm_n_max + 1))
    if words_used + qm_words <= budget:
        words_used += qm_words
        try:
            qm = qm_search(subshift, potential, qm_n_max, qm_k_max)
        except NoConnectorError as err:
            notes.append(str(err))
    if qm is not None:
        chained, chained_witness = pressure_lower_chained(
            subshift, potential, qm, qm.n_max, threads=threads, chain_sum=chain_sum
        )
        if chained > upper + 1e-12:
            notes.append(
                "chained lower bound exceeded the certified upper bound; the "
                "certificate does not extend beyond its tested length, so the "
                "chained bound was discarded"
            )
        elif chained > lower:
            lower = chained
            witness = chained_witness + " (modulo certificate up to n_max)"

    meta = {
        "schedule": sorted(uppers),
        "uppers": {str(k): v for k, v in sorted(uppers.items())},
        "words_used": words_used,
        "budget": budget,
        "primitivity_index": primitivity,
        "qm": None if qm is None else qm.to_dict(),
        "notes": notes,
    }
    return PressureEstimate(
        lower=lower,
        upper=upper,
        n_upper=n_upper,
        lower_witness=witness,
        s=getattr(potential, "s", float("nan")),
        meta=meta,
    )
