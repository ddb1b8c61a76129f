"""Matrix cocycle algebra: word products, singular value functions,
fiber-bunching margins, exterior powers, conjugation, irreducibility.

A locally constant cocycle is one invertible generator per symbol; the
product along a word multiplies later symbols on the left, so the first
symbol of the word is the rightmost factor.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .sft_core import block_shift


class SingularGeneratorError(ValueError):
    """A generator (or conjugator) is singular or too ill-conditioned."""


class InconclusiveNumericsError(RuntimeError):
    """A rank or invariance decision fell inside the tolerance band."""


_MAX_CONDITION = 1.0 / np.finfo(float).eps


def _check_invertible(mat, what):
    vals = np.linalg.svd(mat, compute_uv=False)
    if vals[-1] <= 0.0 or not np.isfinite(vals[0] / vals[-1]) or vals[0] / vals[-1] > _MAX_CONDITION:
        raise SingularGeneratorError(f"{what} is singular or too ill-conditioned")


class CocycleSpec:
    """A locally constant matrix cocycle with a singular value exponent.

    Parameters
    ----------
    d : int
        Matrix dimension.
    generators : mapping symbol -> (d, d) array-like
        One invertible real matrix per symbol.
    s : float
        Exponent of the singular value potential, ``s >= 0``.
    """

    __slots__ = ("d", "generators", "s")

    def __init__(self, d, generators, s=1.0):
        if not isinstance(d, int) or d < 1:
            raise ValueError(f"dimension must be a positive integer, got {d!r}")
        if s < 0:
            raise ValueError(f"exponent must be nonnegative, got {s}")
        gens = {}
        for sym, mat in generators.items():
            sym = int(sym)
            arr = np.array(mat, dtype=float)
            if arr.shape != (d, d):
                raise ValueError(f"generator {sym} has shape {arr.shape}, expected ({d}, {d})")
            _check_invertible(arr, f"generator {sym}")
            arr.setflags(write=False)
            gens[sym] = arr
        if not gens:
            raise ValueError("cocycle needs at least one generator")
        self.d = d
        self.generators = gens
        self.s = float(s)

    @property
    def symbols(self):
        return sorted(self.generators)

    def generator(self, symbol):
        return self.generators[symbol]

    def with_exponent(self, s):
        return CocycleSpec(self.d, self.generators, s)

    def __repr__(self):
        return f"CocycleSpec(d={self.d}, s={self.s}, symbols={self.symbols})"


@dataclass(frozen=True)
class SingularData:
    """Singular values in nonincreasing order."""

    values: tuple

    @classmethod
    def of(cls, mat):
        return cls(tuple(float(v) for v in np.linalg.svd(mat, compute_uv=False)))


def word_product(cocycle, word):
    """Product of generators along ``word``, first symbol rightmost.

    For a word ``i_0 ... i_{n-1}`` this is ``A_{i_{n-1}} ... A_{i_0}``, so
    concatenating words composes products:
    ``word_product(u + v) == word_product(v) @ word_product(u)``.
    """
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    out = cocycle.generator(word[0])
    for sym in word[1:]:
        out = cocycle.generator(sym) @ out
    return out


def log_profile(values, s):
    """log of the graded product of a nonincreasing positive profile.

    For ``0 <= s <= d`` this multiplies the top ``floor(s)`` entries and a
    fractional power of the next; past ``s = d`` it continues as the full
    product raised to ``s/d``.  Applied to singular values it gives the
    singular value function; applied to eigenvalue moduli it gives the
    spectral growth rate used by periodic lower bounds.
    """
    d = len(values)
    logs = np.log(values)
    if s <= d:
        k = int(math.floor(s))
        frac = s - k
        total = float(logs[:k].sum())
        if frac > 0.0:
            total += frac * float(logs[k])
        return total
    return float(s / d) * float(logs.sum())


def singular_values(mat):
    return np.linalg.svd(mat, compute_uv=False)


def log_singular_value_function(mat, s):
    vals = np.linalg.svd(mat, compute_uv=False)
    if vals[-1] <= 0.0:
        raise SingularGeneratorError("singular value function needs an invertible matrix")
    return log_profile(vals, s)


def singular_value_function(mat, s):
    """The singular value function: product of the top ``floor(s)`` singular
    values times a fractional power of the next, ``|det|^{s/d}`` beyond
    ``s = d``.  Equals 1 at ``s = 0`` and the operator norm at ``s = 1``."""
    return math.exp(log_singular_value_function(mat, s))


def eigenvalue_moduli(mat):
    """Eigenvalue absolute values, nonincreasing."""
    vals = np.abs(np.linalg.eigvals(mat))
    return np.sort(vals)[::-1]


def log_spectral_value_function(mat, s):
    """The singular-value-function formula applied to eigenvalue moduli."""
    vals = eigenvalue_moduli(mat)
    if vals[-1] <= 0.0:
        raise SingularGeneratorError("spectral value function needs an invertible matrix")
    return log_profile(vals, s)


def fiber_bunching_margin(cocycle, alpha=1.0):
    """max over symbols of cond(A_i) / 2**alpha; fiber-bunched iff < 1."""
    worst = 0.0
    for sym in cocycle.symbols:
        vals = np.linalg.svd(cocycle.generator(sym), compute_uv=False)
        worst = max(worst, float(vals[0] / vals[-1]))
    return worst / 2.0**alpha


def compound_matrix(mat, t):
    """The ``t``-th multiplicative compound in the lexicographic wedge basis.

    Entries are the ``t x t`` minors; the operator norm of the compound of
    an invertible matrix equals its singular value function at ``s = t``.
    """
    d = mat.shape[0]
    if not 1 <= t <= d:
        raise ValueError(f"compound order must lie in 1..{d}, got {t}")
    if t == 1:
        return mat.copy()
    idx = list(combinations(range(d), t))
    out = np.empty((len(idx), len(idx)))
    for r, rows in enumerate(idx):
        sub = mat[np.ix_(rows, range(d))]
        for c, cols in enumerate(idx):
            out[r, c] = np.linalg.det(sub[:, cols])
    return out


def exterior_power(cocycle, t):
    """Generator-wise compound matrices; dimension becomes C(d, t)."""
    if not 1 <= t <= cocycle.d:
        raise ValueError(f"exterior power order must lie in 1..{cocycle.d}, got {t}")
    gens = {sym: compound_matrix(cocycle.generator(sym), t) for sym in cocycle.symbols}
    new_d = math.comb(cocycle.d, t)
    return CocycleSpec(new_d, gens, cocycle.s)


def conjugate(cocycle, conjugator):
    """The cocycle with generators ``C^{-1} A_i C`` for a constant ``C``."""
    conj = np.asarray(conjugator, dtype=float)
    _check_invertible(conj, "conjugator")
    inv = np.linalg.inv(conj)
    gens = {sym: inv @ cocycle.generator(sym) @ conj for sym in cocycle.symbols}
    return CocycleSpec(cocycle.d, gens, cocycle.s)


def block_cocycle(subshift, cocycle, n):
    """Recode to the ``n``-block system: one generator per block word.

    Returns ``(block_spec, block_cocycle, blocks)`` where block ``k``
    carries the product along the ``k``-th block word.  Pressure over the
    block system is ``n`` times the original pressure.
    """
    spec_n, blocks = block_shift(subshift, n)
    gens = {i + 1: word_product(cocycle, w) for i, w in enumerate(blocks)}
    return spec_n, CocycleSpec(cocycle.d, gens, cocycle.s), blocks


def _is_scalar(mat, tol=1e-12):
    d = mat.shape[0]
    lam = np.trace(mat) / d
    return np.linalg.norm(mat - lam * np.eye(d)) <= tol * max(1.0, np.linalg.norm(mat))


def invariant_lines_2x2(mats, tol=1e-8):
    """All lines preserved by every matrix in a 2x2 family.

    Returns ``None`` when every matrix is scalar (every line is invariant),
    otherwise the list of common invariant unit vectors, canonically
    signed and ordered.  A common line must be an eigenline of each
    non-scalar member, so intersecting the first member's real eigenlines
    with the rest decides completely in dimension 2.

    Raises
    ------
    InconclusiveNumericsError
        When some line's invariance residual falls within a factor 100 of
        the tolerance, too close to call.
    """
    non_scalar = [m for m in mats if not _is_scalar(m)]
    if not non_scalar:
        return None
    pivot = non_scalar[0]
    eigvals, eigvecs = np.linalg.eig(pivot)
    rho = float(np.max(np.abs(eigvals)))
    candidates = []
    for k in range(2):
        if abs(eigvals[k].imag) > tol * rho:
            continue
        v = eigvecs[:, k]
        vr = np.real(v)
        if np.linalg.norm(vr) < 0.5 * np.linalg.norm(v):
            vr = np.imag(v)
        vr = vr / np.linalg.norm(vr)
        if vr[0] < 0 or (vr[0] == 0 and vr[1] < 0):
            vr = -vr
        if not any(abs(float(vr @ c)) > 1 - 1e-12 for c in candidates):
            candidates.append(vr)

    lines = []
    for v in candidates:
        ok = True
        for m in mats:
            u = m @ v
            residual = abs(u[0] * v[1] - u[1] * v[0]) / np.linalg.norm(u)
            if residual <= tol:
                continue
            if residual <= 100.0 * tol:
                raise InconclusiveNumericsError(
                    f"line invariance residual {residual:.3e} within a factor 100 "
                    f"of tolerance {tol:.1e}"
                )
            ok = False
            break
        if ok:
            lines.append(v)
    lines.sort(key=lambda v: (round(float(v[0]), 12), round(float(v[1]), 12)))
    return lines


@dataclass
class IrreducibilityVerdict:
    irreducible: bool
    span_dimension: int
    invariant_subspace: np.ndarray | None = None  # (d, k) orthonormal columns
    note: str = ""

    def to_dict(self):
        return {
            "irreducible": self.irreducible,
            "span_dimension": self.span_dimension,
            "invariant_subspace": None
            if self.invariant_subspace is None
            else self.invariant_subspace.tolist(),
            "note": self.note,
        }


def _orthonormal_closure(mats, seed, tol=1e-10):
    """Smallest subspace containing ``seed`` columns invariant under ``mats``."""
    basis = []
    queue = []
    for j in range(seed.shape[1]):
        v = seed[:, j].astype(float)
        for b in basis:
            v = v - (b @ v) * b
        n = np.linalg.norm(v)
        if n > tol:
            v = v / n
            basis.append(v)
            queue.append(v)
    while queue:
        v = queue.pop()
        for m in mats:
            w = m @ v
            for b in basis:
                w = w - (b @ w) * b
            n = np.linalg.norm(w)
            if n > tol * max(1.0, np.linalg.norm(m @ v)):
                w = w / n
                basis.append(w)
                queue.append(w)
        if len(basis) == seed.shape[0]:
            break
    return np.column_stack(basis)


def _find_invariant_subspace(mats, d, tol):
    """Search for a proper common invariant subspace via eigen seeds."""
    pivots = list(mats)
    for a in mats:
        for b in mats:
            pivots.append(a @ b)
    for pivot in pivots:
        if _is_scalar(pivot):
            continue
        eigvals, eigvecs = np.linalg.eig(pivot)
        seen = set()
        for k in range(d):
            lam = eigvals[k]
            key = (round(lam.real, 10), round(abs(lam.imag), 10))
            if key in seen:
                continue
            seen.add(key)
            if abs(lam.imag) <= tol * max(1.0, abs(lam)):
                seed = np.real(eigvecs[:, k : k + 1])
                if np.linalg.norm(seed) < 1e-12:
                    seed = np.imag(eigvecs[:, k : k + 1])
            else:
                seed = np.column_stack(
                    [np.real(eigvecs[:, k]), np.imag(eigvecs[:, k])]
                )
            closure = _orthonormal_closure(mats, seed)
            if 0 < closure.shape[1] < d:
                return closure
    return None


def irreducibility_check(cocycle, rank_tol=1e-8):
    """Decide whether the generators admit a common proper invariant subspace.

    The primary decision grows the linear span of all products of
    generators (lengths up to ``d**2``) from the identity and compares its
    dimension with ``d**2``: a family whose products span the full matrix
    space cannot preserve a proper subspace.  Rank is read off the
    singular values of the collected products with the relative threshold
    ``rank_tol``; values within a factor 100 of the cut raise
    :class:`InconclusiveNumericsError` rather than guess.

    A deficient span does not certify reducibility over the reals (the
    conformal-type families span a proper subalgebra yet preserve no real
    subspace), so in that case the verdict comes from an explicit
    invariant-subspace search: eigen-seeded closures in general, and the
    complete eigenline intersection in dimension 2.
    """
    mats = [cocycle.generator(sym) for sym in cocycle.symbols]
    d = cocycle.d
    full = d * d

    basis = []
    raw = []
    frontier = []

    def absorb(mat):
        vec = mat.reshape(-1).astype(float)
        raw.append(vec)
        w = vec.copy()
        for b in basis:
            w = w - (b @ w) * b
        n = np.linalg.norm(w)
        if n > 1e-12 * max(1.0, np.linalg.norm(vec)):
            w = w / n
            basis.append(w)
            frontier.append(mat)

    absorb(np.eye(d))
    while frontier and len(basis) < full:
        m = frontier.pop()
        for g in mats:
            absorb(g @ m)

    stack = np.array(raw)
    sv = np.linalg.svd(stack, compute_uv=False)
    cut = rank_tol * sv[0]
    near = [v for v in sv if cut / 100.0 < v < cut * 100.0]
    if near:
        raise InconclusiveNumericsError(
            f"span rank decision ambiguous: singular value {near[0]:.3e} within a "
            f"factor 100 of threshold {cut:.3e}"
        )
    span_dim = int((sv > cut).sum())

    if span_dim == full:
        return IrreducibilityVerdict(True, span_dim)

    if d == 2:
        lines = invariant_lines_2x2(mats, tol=max(rank_tol, 1e-10))
        if lines is None:
            return IrreducibilityVerdict(
                False,
                span_dim,
                invariant_subspace=np.eye(2)[:, :1],
                note="scalar family: every line is invariant",
            )
        if lines:
            return IrreducibilityVerdict(
                False, span_dim, invariant_subspace=lines[0].reshape(2, 1)
            )
        return IrreducibilityVerdict(
            True,
            span_dim,
            note="proper matrix subalgebra but no real invariant line "
            "(conformal-type family)",
        )

    subspace = _find_invariant_subspace(mats, d, tol=max(rank_tol, 1e-10))
    if subspace is not None:
        return IrreducibilityVerdict(False, span_dim, invariant_subspace=subspace)
    raise InconclusiveNumericsError(
        f"span dimension {span_dim} < {full} but no real invariant subspace was "
        "found; cannot certify either verdict"
    )
