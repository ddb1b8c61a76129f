"""Accumulation primitives shared by the pressure and measure machinery."""

import math


class LogSumAccumulator:
    """Streaming log-sum-exp with compensated summation.

    Terms enter as logarithms.  The running total is held as
    ``shift + log(sum)`` where ``sum`` collects rescaled exponentials with a
    Kahan correction, so partition sums never overflow however long the
    words get.  Partial accumulators combine via :meth:`merge`; reductions
    that always merge in the same order are bit-stable regardless of how
    the partials were scheduled.
    """

    __slots__ = ("_shift", "_sum", "_carry", "count")

    def __init__(self):
        self._shift = -math.inf
        self._sum = 0.0
        self._carry = 0.0
        self.count = 0

    def add(self, log_term):
        self.count += 1
        if log_term == -math.inf:
            return
        if log_term > self._shift:
            if self._shift > -math.inf:
                scale = math.exp(self._shift - log_term)
                self._sum *= scale
                self._carry *= scale
            self._shift = log_term
        self._add_scaled(math.exp(log_term - self._shift))

    def _add_scaled(self, term):
        y = term - self._carry
        t = self._sum + y
        self._carry = (t - self._sum) - y
        self._sum = t

    def merge(self, other):
        """Fold ``other`` into this accumulator (callers fix the order)."""
        self.count += other.count
        if other._shift == -math.inf:
            return
        total = other._sum + other._carry
        if other._shift > self._shift:
            if self._shift > -math.inf:
                scale = math.exp(self._shift - other._shift)
                self._sum *= scale
                self._carry *= scale
            self._shift = other._shift
            self._add_scaled(total)
        else:
            self._add_scaled(total * math.exp(other._shift - self._shift))

    def log_total(self):
        total = self._sum + self._carry
        if self._shift == -math.inf or total <= 0.0:
            return -math.inf
        return self._shift + math.log(total)
