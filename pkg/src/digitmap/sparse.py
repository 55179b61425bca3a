"""Integers stored as runs of equal digits along arithmetic progressions of exponents.

A run ``(start, stride, count, digit)`` stands for
``digit * sum(base**(start + i*stride) for i in range(count))``.  Every field
except the digit may be an arbitrarily large integer, so a number whose
expansion has 10**1000 digits still fits in a few words as long as its digit
pattern is regular.  Witness constructions only ever add digit-disjoint
pieces, which keeps every operation carry-free except :func:`add_small`.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass
from math import gcd
from typing import Any, Iterable, NamedTuple

from .core import DigitMap, digit_count, digits_le
from .ntheory import multiplicative_order


class SparseError(ValueError):
    pass


class OverlapError(SparseError):
    """Two operands claim overlapping exponent ranges."""


class TooLargeError(SparseError):
    """Dense expansion would exceed the requested digit limit."""


class Run(NamedTuple):
    start: int
    stride: int
    count: int
    digit: int

    @property
    def last(self) -> int:
        return self.start + (self.count - 1) * self.stride


def _normalize(base: int, runs: Iterable[Run]) -> tuple[Run, ...]:
    out: list[Run] = []
    for run in sorted(runs):
        start, stride, count, digit = run
        if count < 1 or stride < 1 or start < 0 or not 1 <= digit < base:
            raise SparseError(f"malformed run {tuple(run)} for base {base}")
        if count == 1:
            stride = 1
        run = Run(start, stride, count, digit)
        if out:
            prev = out[-1]
            if prev.last >= start:
                raise OverlapError(f"runs {tuple(prev)} and {tuple(run)} overlap")
            if prev.digit == digit and prev.stride == 1 and stride == 1 and prev.last + 1 == start:
                out[-1] = Run(prev.start, 1, prev.count + count, digit)
                continue
        out.append(run)
    return tuple(out)


@dataclass(frozen=True)
class SparseNumber:
    base: int
    runs: tuple[Run, ...] = ()

    def __post_init__(self) -> None:
        if self.base < 2:
            raise SparseError(f"base must be >= 2, got {self.base}")
        object.__setattr__(self, "runs", _normalize(self.base, (Run(*r) for r in self.runs)))

    @classmethod
    def from_dense(cls, base: int, n: int) -> SparseNumber:
        if n < 0:
            raise SparseError("sparse numbers are non-negative")
        runs = []
        prev = None
        for pos, a in enumerate(digits_le(n, base)):
            if a and prev is not None and prev[3] == a and prev[0] + prev[2] == pos:
                prev[2] += 1
                continue
            if prev is not None:
                runs.append(Run(prev[0], 1, prev[2], prev[3]))
                prev = None
            if a:
                prev = [pos, 1, 1, a]
        if prev is not None:
            runs.append(Run(prev[0], 1, prev[2], prev[3]))
        return cls(base, tuple(runs))

    @classmethod
    def repeated(cls, base: int, digit: int, start: int, count: int, stride: int = 1) -> SparseNumber:
        """``count`` copies of ``digit`` at exponents start, start+stride, ..."""
        if count == 0:
            return cls(base)
        return cls(base, (Run(start, stride, count, digit),))

    @property
    def is_zero(self) -> bool:
        return not self.runs

    @property
    def top_exponent(self) -> int:
        """Highest occupied exponent, -1 for zero."""
        return self.runs[-1].last if self.runs else -1

    @property
    def num_digits(self) -> int:
        return self.top_exponent + 1

    @property
    def digit_total(self) -> int:
        """Number of non-zero digits."""
        return sum(r.count for r in self.runs)

    def to_dense(self, limit_digits: int = 10**6) -> int:
        if self.top_exponent >= limit_digits:
            raise TooLargeError(
                f"expansion needs {self.num_digits} digits, limit is {limit_digits}"
            )
        b = self.base
        total = 0
        for start, stride, count, digit in self.runs:
            step = b**stride
            total += digit * b**start * ((step**count - 1) // (step - 1))
        return total

    def f_eval(self, map: DigitMap) -> int:
        if map.base != self.base:
            raise SparseError(f"map base {map.base} != number base {self.base}")
        t = map.table
        total = sum(r.count * t[r.digit] for r in self.runs)
        if t[0]:
            total += (self.num_digits - self.digit_total) * t[0]
        return total

    def residue(self, q: int) -> int:
        """Value mod q, with exponents reduced by the order of base mod q."""
        if q < 1:
            raise SparseError(f"modulus must be positive, got {q}")
        if gcd(self.base, q) != 1:
            raise SparseError(f"gcd(base {self.base}, {q}) != 1")
        if q == 1:
            return 0
        order = multiplicative_order(self.base, q)
        b = self.base
        total = 0
        for start, stride, count, digit in self.runs:
            ratio = pow(b, stride % order, q)
            total += digit * pow(b, start % order, q) * geom_sum_mod(ratio, count, q)
        return total % q

    def shift(self, k: int) -> SparseNumber:
        """Multiply by base**k."""
        if k < 0:
            raise SparseError("negative shifts are not supported")
        return SparseNumber(self.base, tuple(r._replace(start=r.start + k) for r in self.runs))

    def add_disjoint(self, other: SparseNumber | int) -> SparseNumber:
        if isinstance(other, int):
            other = SparseNumber.from_dense(self.base, other)
        if other.base != self.base:
            raise SparseError("bases differ")
        return SparseNumber(self.base, self.runs + other.runs)

    def add_small(self, delta: int) -> SparseNumber:
        """Add a (signed) dense integer, propagating carries and borrows.

        Only the lowest ``digits(|delta|)`` exponents are expanded; a carry
        ripples through a stride-1 run of top digits in one step and a borrow
        turns a zero gap into a single run of top digits.
        """
        if delta == 0:
            return self
        b = self.base
        width = max(digit_count(abs(delta), b), 1)
        low, high = _split(self.runs, width)
        value = SparseNumber(b, low).to_dense(width) + delta
        limit = b**width
        if value >= limit:
            high = _carry(b, list(high), width)
            value -= limit
        elif value < 0:
            high = _borrow(b, list(high), width)
            value += limit
        return SparseNumber(b, tuple(high) + SparseNumber.from_dense(b, value).runs)

    def to_json(self) -> dict[str, Any]:
        return {
            "base": self.base,
            "runs": [
                {"start": str(r.start), "stride": str(r.stride), "count": str(r.count), "digit": r.digit}
                for r in self.runs
            ],
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> SparseNumber:
        return cls(
            obj["base"],
            tuple(
                Run(int(r["start"]), int(r["stride"]), int(r["count"]), int(r["digit"]))
                for r in obj["runs"]
            ),
        )


def _split(runs: tuple[Run, ...], pos: int) -> tuple[list[Run], list[Run]]:
    """Partition runs into exponents < pos and >= pos."""
    low: list[Run] = []
    high: list[Run] = []
    for run in runs:
        if run.last < pos:
            low.append(run)
        elif run.start >= pos:
            high.append(run)
        else:
            n_low = (pos - run.start + run.stride - 1) // run.stride
            low.append(run._replace(count=n_low))
            high.append(run._replace(start=run.start + n_low * run.stride, count=run.count - n_low))
    return low, high


def _drop_first(run: Run) -> list[Run]:
    if run.count == 1:
        return []
    return [Run(run.start + run.stride, run.stride, run.count - 1, run.digit)]


def _carry(base: int, runs: list[Run], pos: int) -> list[Run]:
    # every remaining run starts at or above pos
    top = base - 1
    while runs and runs[0].start == pos:
        head = runs.pop(0)
        if head.digit < top:
            return [Run(pos, 1, 1, head.digit + 1)] + _drop_first(head) + runs
        if head.stride > 1:
            # pos + 1 lies strictly inside the progression gap
            return [Run(pos + 1, 1, 1, 1)] + _drop_first(head) + runs
        pos = head.last + 1
    insort(runs, Run(pos, 1, 1, 1))
    return runs


def _borrow(base: int, runs: list[Run], pos: int) -> list[Run]:
    if not runs:
        raise SparseError("subtraction would go negative")
    head = runs.pop(0)
    at = head.start
    out = _drop_first(head) + runs
    if head.digit > 1:
        out.insert(0, Run(at, 1, 1, head.digit - 1))
    if at > pos:
        out.insert(0, Run(pos, 1, at - pos, base - 1))
    return out


def geom_sum_mod(ratio: int, count: int, q: int) -> int:
    """(1 + ratio + ... + ratio**(count-1)) mod q by binary doubling."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if count < 0:
        raise ValueError("count must be non-negative")
    ratio %= q
    total, power = 0, 1  # S(n), ratio**n for the prefix of count's bits read so far
    for bit in bin(count)[2:] if count else "":
        total = total * (1 + power) % q
        power = power * power % q
        if bit == "1":
            total = (1 + ratio * total) % q
            power = power * ratio % q
    return total % q


def from_dense(base: int, n: int) -> SparseNumber:
    return SparseNumber.from_dense(base, n)


def to_dense(s: SparseNumber, limit_digits: int = 10**6) -> int:
    return s.to_dense(limit_digits)


def f_eval(map: DigitMap, s: SparseNumber) -> int:
    return s.f_eval(map)


def residue(s: SparseNumber, q: int) -> int:
    return s.residue(q)


def add_disjoint(s: SparseNumber, t: SparseNumber) -> SparseNumber:
    return s.add_disjoint(t)
