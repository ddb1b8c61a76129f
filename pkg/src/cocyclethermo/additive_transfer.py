"""Exact thermodynamics for additive locally constant potentials.

Pressure of a potential reading one or two coordinates is the log Perron
root of the weighted transition matrix; the unique equilibrium state is
the Markov measure obtained by stochasticizing that matrix with its
Perron vectors.  Cohomology of two potentials is probed through Birkhoff
sums over periodic orbits: any discrepancy is a certificate of
non-cohomology, while agreement up to a period bound is reported as just
that, not as a proof.
"""

import math
from dataclasses import dataclass

import numpy as np

from .sft_core import periodic_words, require_primitive


class PotentialDomainError(ValueError):
    """An additive potential is missing a value on an admissible argument."""


@dataclass(frozen=True)
class AdditivePotential:
    """Locally constant additive potential of depth 1 or 2.

    Depth 1 reads the current symbol; depth 2 reads the current admissible
    pair.  ``values`` maps symbols (or pairs) to reals and must cover
    every admissible argument of the subshift it is used with.
    """

    depth: int
    values: dict

    def __post_init__(self):
        if self.depth not in (1, 2):
            raise ValueError(f"depth must be 1 or 2, got {self.depth}")

    def value(self, *args):
        key = args[0] if self.depth == 1 else tuple(args[:2])
        try:
            return self.values[key]
        except KeyError:
            raise PotentialDomainError(f"no value for argument {key}") from None

    def validate(self, spec):
        if self.depth == 1:
            missing = [i for i in range(1, spec.q + 1) if i not in self.values]
        else:
            missing = [
                (i, j)
                for i in range(1, spec.q + 1)
                for j in range(1, spec.q + 1)
                if spec.allows(i, j) and (i, j) not in self.values
            ]
        if missing:
            raise PotentialDomainError(f"potential undefined on {missing[0]}")
        return self

    def shifted(self, c):
        return AdditivePotential(self.depth, {k: v + c for k, v in self.values.items()})


def weighted_transfer_matrix(spec, pot):
    """Transition matrix with entry ``exp(potential)`` on each allowed edge.

    Depth-1 potentials weight by the source symbol; depth-2 potentials
    weight the edge itself, which keeps two-coordinate potentials on the
    original alphabet with no recoding.
    """
    pot.validate(spec)
    q = spec.q
    out = np.zeros((q, q))
    for i in range(1, q + 1):
        for j in range(1, q + 1):
            if not spec.allows(i, j):
                continue
            w = pot.value(i) if pot.depth == 1 else pot.value(i, j)
            out[i - 1, j - 1] = math.exp(w)
    return out


@dataclass
class PerronData:
    rho: float
    right: np.ndarray
    left: np.ndarray
    iterations: int


def perron_data(matrix, tol=1e-13, max_iter=200_000):
    """Perron root and positive left/right eigenvectors by power iteration.

    Deterministic all-ones start; convergence is declared when the
    Rayleigh-type quotient moves by less than ``tol`` relatively.
    Requires a primitive nonnegative matrix.
    """

    def iterate(m):
        v = np.ones(m.shape[0])
        v /= v.sum()
        rho = 0.0
        for it in range(1, max_iter + 1):
            w = m @ v
            total = w.sum()
            if total <= 0.0:
                raise ValueError("matrix is not primitive-positive on the simplex")
            new_rho = total
            w /= total
            if abs(new_rho - rho) <= tol * max(1.0, new_rho) and it > 1:
                delta = np.abs(w - v).max()
                if delta <= tol:
                    return new_rho, w, it
            rho = new_rho
            v = w
        return rho, v, max_iter

    rho_r, right, it_r = iterate(matrix)
    rho_l, left, it_l = iterate(matrix.T)
    rho = 0.5 * (rho_r + rho_l)
    return PerronData(rho=rho, right=right, left=left, iterations=max(it_r, it_l))


def additive_pressure(spec, pot, tol=1e-13):
    """log of the Perron root of the weighted transition matrix."""
    require_primitive(spec)
    return math.log(perron_data(weighted_transfer_matrix(spec, pot), tol=tol).rho)


@dataclass
class MarkovMeasure:
    """Stationary Markov chain on the symbols, compatible with the subshift."""

    stationary: np.ndarray
    transition: np.ndarray

    def cylinder_weight(self, word):
        w = self.stationary[word[0] - 1]
        for a, b in zip(word, word[1:]):
            w *= self.transition[a - 1, b - 1]
        return float(w)

    def to_dict(self):
        return {
            "stationary": self.stationary.tolist(),
            "transition": self.transition.tolist(),
        }


def markov_equilibrium(spec, pot, tol=1e-13):
    """The unique equilibrium state of an additive locally constant potential.

    Stochasticization of the weighted matrix: ``P_ij = M_ij r_j / (rho r_i)``
    with ``r`` the right Perron vector; the stationary vector is the
    normalized entrywise product of the left and right Perron vectors.
    """
    require_primitive(spec)
    matrix = weighted_transfer_matrix(spec, pot)
    data = perron_data(matrix, tol=tol)
    r, l, rho = data.right, data.left, data.rho
    transition = matrix * r[None, :] / (rho * r[:, None])
    # rows sum to 1 exactly up to the Perron residual; renormalize the
    # residual away so downstream cylinder sums telescope
    transition /= transition.sum(axis=1, keepdims=True)
    stationary = l * r
    stationary /= stationary.sum()
    return MarkovMeasure(stationary=stationary, transition=transition)


def birkhoff_cycle_sum(pot, word):
    """Birkhoff sum of the potential over the periodic orbit of ``word``.

    Depth-2 values wrap around the cycle, so the sum is the full orbit sum
    for one period in both depths.
    """
    n = len(word)
    if pot.depth == 1:
        return sum(pot.value(sym) for sym in word)
    return sum(pot.value(word[i], word[(i + 1) % n]) for i in range(n))


@dataclass
class CohomologyVerdict:
    """Outcome of the periodic-orbit cohomology test.

    ``tag`` is one of ``"not_cohomologous"`` (a witness orbit separates the
    Birkhoff sums), ``"consistent_up_to"`` (all orbits up to the bound
    agree; not a proof of cohomology), or ``"identically_equal"`` (the
    potentials coincide pointwise, hence are trivially cohomologous).
    """

    tag: str
    period_bound: int
    witness: tuple | None = None
    discrepancy: float = 0.0

    @property
    def cohomologous(self):
        if self.tag == "not_cohomologous":
            return False
        if self.tag == "identically_equal":
            return True
        return None

    def to_dict(self):
        return {
            "tag": self.tag,
            "period_bound": self.period_bound,
            "witness": None if self.witness is None else list(self.witness),
            "discrepancy": self.discrepancy,
        }


def _pointwise_equal(spec, pot1, pot2, tol=1e-14):
    if pot1.depth != pot2.depth:
        return False
    if pot1.depth == 1:
        args = [(i,) for i in range(1, spec.q + 1)]
    else:
        args = [
            (i, j)
            for i in range(1, spec.q + 1)
            for j in range(1, spec.q + 1)
            if spec.allows(i, j)
        ]
    return all(abs(pot1.value(*a) - pot2.value(*a)) <= tol for a in args)


def cohomology_test(spec, pot1, pot2, period_bound=12, tol=1e-9):
    """Compare Birkhoff sums of two potentials over all periodic orbits up
    to the period bound.

    Cohomologous potentials have equal sums on every periodic orbit, so a
    discrepancy is a rigorous witness of non-cohomology.  Agreement only
    ever yields ``consistent_up_to``: genuine non-cohomology always has a
    finite witness, but possibly beyond the bound.
    """
    pot1.validate(spec)
    pot2.validate(spec)
    if _pointwise_equal(spec, pot1, pot2):
        return CohomologyVerdict(tag="identically_equal", period_bound=period_bound)
    for w in periodic_words(spec, period_bound):
        gap = abs(birkhoff_cycle_sum(pot1, w) - birkhoff_cycle_sum(pot2, w))
        if gap > tol * len(w):
            return CohomologyVerdict(
                tag="not_cohomologous",
                period_bound=period_bound,
                witness=w,
                discrepancy=gap,
            )
    return CohomologyVerdict(tag="consistent_up_to", period_bound=period_bound)
