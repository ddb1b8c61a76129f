"""Subshifts of finite type: admissible words, periodic orbits, and
eventually periodic symbolic points.

Symbols are the integers ``1..q``.  Words are tuples of symbols; a word is
admissible when every adjacent pair is allowed by the 0/1 transition
matrix.  Everything here is immutable after construction, and enumeration
is exposed as streaming iterators that can be partitioned by prefix.
"""

from dataclasses import dataclass

import numpy as np


class NotPrimitiveError(ValueError):
    """Raised where a primitive transition matrix is required."""


class InadmissibleWordError(ValueError):
    """A word violates the transition matrix."""


class InadmissibleJunctionError(ValueError):
    """A concatenation junction violates the transition matrix."""


class TrivialHomoclinicError(ValueError):
    """The proposed homoclinic point coincides with the periodic point."""


class SubshiftSpec:
    """Transition data of a subshift of finite type.

    Parameters
    ----------
    q : int
        Alphabet size.
    adjacency : (q, q) array-like of 0/1
        ``adjacency[i-1][j-1] == 1`` allows symbol ``j`` to follow ``i``.

    Every row and every column must contain at least one 1, so no symbol is
    stranded in either direction.  Primitivity is *not* required here; the
    thermodynamic operations check it where they need it.
    """

    __slots__ = ("q", "adjacency", "successors")

    def __init__(self, q, adjacency):
        if not isinstance(q, int) or q < 1:
            raise ValueError(f"alphabet size must be a positive integer, got {q!r}")
        mat = np.asarray(adjacency, dtype=np.int64)
        if mat.shape != (q, q):
            raise ValueError(f"adjacency must be {q}x{q}, got shape {mat.shape}")
        if not np.isin(mat, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        rows = np.flatnonzero(mat.sum(axis=1) == 0)
        if rows.size:
            raise ValueError(f"symbol {rows[0] + 1} has no admissible successor")
        cols = np.flatnonzero(mat.sum(axis=0) == 0)
        if cols.size:
            raise ValueError(f"symbol {cols[0] + 1} has no admissible predecessor")
        mat = mat.copy()
        mat.setflags(write=False)
        self.q = q
        self.adjacency = mat
        self.successors = tuple(
            tuple(int(j) + 1 for j in np.flatnonzero(mat[i])) for i in range(q)
        )

    def allows(self, i, j):
        """Whether symbol ``j`` may follow symbol ``i``."""
        return self.adjacency[i - 1, j - 1] == 1

    def is_admissible(self, word):
        return all(self.allows(a, b) for a, b in zip(word, word[1:]))

    def validate_word(self, word):
        if len(word) == 0:
            return
        for sym in word:
            if not (1 <= sym <= self.q):
                raise InadmissibleWordError(f"symbol {sym} outside alphabet 1..{self.q}")
        for a, b in zip(word, word[1:]):
            if not self.allows(a, b):
                raise InadmissibleWordError(f"forbidden pair {a}{b} in word {word}")

    def __eq__(self, other):
        return (
            isinstance(other, SubshiftSpec)
            and self.q == other.q
            and np.array_equal(self.adjacency, other.adjacency)
        )

    def __hash__(self):
        return hash((self.q, self.adjacency.tobytes()))

    def __repr__(self):
        return f"SubshiftSpec(q={self.q}, adjacency={self.adjacency.tolist()})"


def is_primitive(spec):
    """Smallest ``N`` with ``T^N`` entrywise positive, or ``None``.

    The search stops at ``q**2``, which dominates the Wielandt bound
    ``(q-1)**2 + 1`` on the primitivity index.
    """
    power = spec.adjacency.copy()
    step = spec.adjacency
    for n in range(1, spec.q * spec.q + 1):
        if (power > 0).all():
            return n
        # clamp to {0, 1} so integer powers cannot overflow
        power = np.minimum(power @ step, 1)
    return None


def require_primitive(spec):
    n = is_primitive(spec)
    if n is None:
        raise NotPrimitiveError("transition matrix is not primitive")
    return n


def word_count(spec, n):
    """Exact number of admissible words of length ``n`` (arbitrary precision)."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    rows = [[int(v) for v in row] for row in spec.adjacency]
    counts = [1] * spec.q
    for _ in range(n - 1):
        counts = [
            sum(counts[i] for i in range(spec.q) if rows[i][j]) for j in range(spec.q)
        ]
    return sum(counts)


def enumerate_words(spec, n, prefix=()):
    """Yield every admissible word of length ``n`` exactly once, in
    lexicographic order.

    ``prefix`` restricts the traversal to words extending it, which is the
    partitioning hook for parallel callers: ranges for distinct prefixes
    are disjoint and their union (over all admissible prefixes of a fixed
    length) is the whole of the length-``n`` language.
    """
    if n < 1:
        raise ValueError("word length must be >= 1")
    prefix = tuple(prefix)
    spec.validate_word(prefix)
    if len(prefix) > n:
        raise ValueError("prefix longer than requested word length")
    if len(prefix) == n:
        yield prefix
        return

    succ = spec.successors
    word = list(prefix)
    if word:
        stack = [iter(succ[word[-1] - 1])]
    else:
        stack = [iter(range(1, spec.q + 1))]
    base = len(prefix)
    while stack:
        sym = next(stack[-1], None)
        if sym is None:
            stack.pop()
            if len(word) > base:
                word.pop()
            continue
        word.append(sym)
        if len(word) == n:
            yield tuple(word)
            word.pop()
        else:
            stack.append(iter(succ[sym - 1]))


def _min_rotation(word):
    return min(word[i:] + word[:i] for i in range(len(word)))


def _is_primitive_word(word):
    n = len(word)
    for d in range(1, n):
        if n % d == 0 and word == word[:d] * (n // d):
            return False
    return True


def periodic_words(spec, up_to):
    """Admissible words ``w`` with ``ww`` admissible, one representative per
    cyclic class, powers of shorter periods excluded.

    Each returned word is the lexicographically least rotation of its
    class and defines the periodic point ``w^∞``.
    """
    if up_to < 1:
        raise ValueError("period bound must be >= 1")
    out = []
    for n in range(1, up_to + 1):
        for w in enumerate_words(spec, n):
            if not spec.allows(w[-1], w[0]):
                continue
            if not _is_primitive_word(w):
                continue
            if _min_rotation(w) != w:
                continue
            out.append(w)
    return out


@dataclass(frozen=True)
class SymbolicPoint:
    """Eventually periodic two-sided sequence.

    The sequence reads ``... past past core future future ...`` with
    ``past`` repeated leftward and ``future`` rightward.  ``phase`` is the
    offset of coordinate 0 from the start of ``core``: the core occupies
    coordinates ``[-phase, -phase + len(core))``.
    """

    past: tuple
    core: tuple
    future: tuple
    phase: int = 0

    @property
    def core_start(self):
        return -self.phase

    @property
    def core_end(self):
        return -self.phase + len(self.core)

    def symbol(self, i):
        j = i + self.phase
        if 0 <= j < len(self.core):
            return self.core[j]
        if j >= len(self.core):
            return self.future[(j - len(self.core)) % len(self.future)]
        return self.past[j % len(self.past)]

    def word(self, lo, hi):
        """Symbols at coordinates ``lo..hi-1``."""
        return tuple(self.symbol(i) for i in range(lo, hi))

    def shift(self, k):
        """The point moved ``k`` steps: coordinate 0 becomes old coordinate k."""
        return SymbolicPoint(self.past, self.core, self.future, self.phase + k)

    def agrees(self, other, lo, hi):
        return self.word(lo, hi) == other.word(lo, hi)

    def validate(self, spec):
        if not self.past or not self.future:
            raise InadmissibleWordError("past and future words must be nonempty")
        spec.validate_word(self.past)
        spec.validate_word(self.core)
        spec.validate_word(self.future)
        if not spec.allows(self.past[-1], self.past[0]):
            raise InadmissibleJunctionError("past word is not cyclically admissible")
        if not spec.allows(self.future[-1], self.future[0]):
            raise InadmissibleJunctionError("future word is not cyclically admissible")
        left = self.core[0] if self.core else self.future[0]
        if not spec.allows(self.past[-1], left):
            raise InadmissibleJunctionError("junction past->core fails")
        if self.core and not spec.allows(self.core[-1], self.future[0]):
            raise InadmissibleJunctionError("junction core->future fails")
        return self


def periodic_point(spec, word):
    """The periodic point ``word^∞`` with coordinate 0 at the start of ``word``."""
    word = tuple(word)
    if not word:
        raise ValueError("period word must be nonempty")
    spec.validate_word(word)
    if not spec.allows(word[-1], word[0]):
        raise InadmissibleJunctionError(f"word {word} is not periodic-admissible")
    return SymbolicPoint(past=word, core=(), future=word, phase=0)


def homoclinic_point(spec, p_word, insertion):
    """The homoclinic point ``p^∞ . insertion . p^∞`` of the periodic
    point ``p^∞``.

    Coordinate 0 sits at the start of ``insertion``.  The insertion length
    must be a multiple of the period so that the point lies in the stable
    and unstable sets of ``p^∞`` itself, with no phase shift.
    """
    p_word = tuple(p_word)
    insertion = tuple(insertion)
    if not p_word:
        raise ValueError("period word must be nonempty")
    spec.validate_word(p_word)
    if not spec.allows(p_word[-1], p_word[0]):
        raise InadmissibleJunctionError(f"word {p_word} is not periodic-admissible")
    if not insertion:
        raise ValueError("insertion must be nonempty")
    if len(insertion) % len(p_word) != 0:
        raise ValueError("insertion length must be a multiple of the period")
    spec.validate_word(insertion)
    if not spec.allows(p_word[-1], insertion[0]):
        raise InadmissibleJunctionError("junction period->insertion fails")
    if not spec.allows(insertion[-1], p_word[0]):
        raise InadmissibleJunctionError("junction insertion->period fails")
    if insertion == p_word * (len(insertion) // len(p_word)):
        raise TrivialHomoclinicError("insertion equals a power of the period word")
    return SymbolicPoint(past=p_word, core=insertion, future=p_word, phase=0)


def product_shift(spec_a, spec_b):
    """Componentwise product of two subshifts on pair symbols.

    The pair ``(i, j)`` is encoded as ``(i - 1) * q_b + j``; transitions are
    allowed exactly when both components are.
    """
    qa, qb = spec_a.q, spec_b.q
    adjacency = np.kron(spec_a.adjacency, spec_b.adjacency)
    return SubshiftSpec(qa * qb, adjacency)


def pair_encode(i, j, qb):
    return (i - 1) * qb + j


def pair_decode(sym, qb):
    return ((sym - 1) // qb + 1, (sym - 1) % qb + 1)


def block_shift(spec, n):
    """Recode into the block system of non-overlapping ``n``-blocks.

    The alphabet is the length-``n`` language in lexicographic order; block
    ``v`` may follow block ``u`` when the concatenation ``uv`` is
    admissible.  Words of length ``m`` in the block system correspond
    exactly to original words of length ``n*m``.
    """
    blocks = tuple(enumerate_words(spec, n))
    m = len(blocks)
    adjacency = np.zeros((m, m), dtype=np.int64)
    for a, u in enumerate(blocks):
        for b, v in enumerate(blocks):
            if spec.allows(u[-1], v[0]):
                adjacency[a, b] = 1
    return SubshiftSpec(m, adjacency), blocks
