"""Digit maps, their cycles, and eventual-cycle classification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterator, Sequence

import numpy as np


class DigitMapError(ValueError):
    """Invalid digit map definition or malformed map file."""


# chunk tables are kept below this many entries
_CHUNK_TABLE_SIZE = 1 << 16
# below this many chunks, eval uses the plain division loop
_DC_CHUNKS = 64


@dataclass(frozen=True)
class DigitMap:
    """A base together with the value assigned to each digit.

    Calling the map evaluates ``f(n)``, the sum of ``table[a]`` over the
    base-``base`` digits ``a`` of ``n`` (so ``f(0) == 0``).
    """

    base: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.base, int) or self.base < 2:
            raise DigitMapError(f"base must be an integer >= 2, got {self.base!r}")
        table = tuple(self.table)
        if len(table) != self.base:
            raise DigitMapError(
                f"table has {len(table)} entries, base {self.base} needs {self.base}"
            )
        for m, value in enumerate(table):
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise DigitMapError(f"table[{m}] = {value!r} is not a non-negative integer")
        object.__setattr__(self, "table", table)

    @classmethod
    def power(cls, e: int, b: int) -> DigitMap:
        """The (e, b) power map ``m -> m**e``."""
        if e < 1:
            raise DigitMapError(f"exponent must be >= 1, got {e}")
        return cls(b, tuple(m**e for m in range(b)))

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> DigitMap:
        if not isinstance(obj, dict) or "base" not in obj:
            raise DigitMapError("map object needs a 'base' key")
        if "table" in obj:
            return cls(obj["base"], tuple(obj["table"]))
        if "exponent" in obj:
            return cls.power(obj["exponent"], obj["base"])
        raise DigitMapError("map object needs either 'table' or 'exponent'")

    @classmethod
    def load(cls, path: str | Path) -> DigitMap:
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DigitMapError(f"cannot read map file {path}: {exc}") from exc
        return cls.from_json(obj)

    def to_json(self) -> dict[str, Any]:
        return {"base": self.base, "table": list(self.table)}

    @property
    def top_digit_value(self) -> int:
        """``f(b-1)``, the modulus every witness construction reduces by."""
        return self.table[self.base - 1]

    @cached_property
    def max_digit_value(self) -> int:
        return max(self.table)

    @cached_property
    def _chunk(self) -> tuple[int, int, list[int], list[int], list[int]]:
        # k digits per chunk; plain f, zero-padded f and digit count per chunk value
        k = 1
        while self.base ** (k + 1) <= _CHUNK_TABLE_SIZE:
            k += 1
        size = self.base**k
        plain = [0] * size
        ndig = [0] * size
        for c in range(1, size):
            q, a = divmod(c, self.base)
            plain[c] = plain[q] + self.table[a]
            ndig[c] = ndig[q] + 1
        t0 = self.table[0]
        padded = [plain[c] + (k - ndig[c]) * t0 for c in range(size)]
        return k, size, plain, padded, ndig

    @cached_property
    def _powers(self) -> list[int]:
        # _powers[i] = chunk_size ** (2**i)
        return [self._chunk[1]]

    def _power(self, i: int) -> int:
        powers = self._powers
        while len(powers) <= i:
            powers.append(powers[-1] * powers[-1])
        return powers[i]

    def __call__(self, n: int) -> int:
        return self.eval(n)

    def eval(self, n: int) -> int:
        if n < 0:
            raise ValueError(f"digit maps act on non-negative integers, got {n}")
        k, size, plain, padded, _ = self._chunk
        if n < size:
            return plain[n]
        if n.bit_length() > _DC_CHUNKS * size.bit_length():
            return self._eval_dc(n)[0]
        total = 0
        while n >= size:
            n, c = divmod(n, size)
            total += padded[c]
        return total + plain[n]

    def _eval_dc(self, n: int) -> tuple[int, int]:
        """(f(n), digit count of n) by splitting at chunk_size**(2**i)."""
        k, size, plain, _, ndig = self._chunk
        if n < size:
            return plain[n], ndig[n]
        i = 0
        while self._power(i + 1) <= n:
            i += 1
        hi, lo = divmod(n, self._power(i))
        width = k << i
        fh, dh = self._eval_dc(hi)
        fl, dl = self._eval_dc(lo)
        return fh + fl + (width - dl) * self.table[0], dh + width

    def eval_array(self, values: np.ndarray) -> np.ndarray:
        """Vectorised f over an int64 array of non-negative values."""
        vals = np.asarray(values, dtype=np.int64).copy()
        table = np.asarray(self.table, dtype=np.int64)
        total = np.zeros_like(vals)
        while True:
            live = vals > 0
            if not live.any():
                return total
            total[live] += table[vals[live] % self.base]
            vals //= self.base

    def iterate(self, n: int, r: int) -> int:
        for _ in range(r):
            n = self.eval(n)
        return n


def digits_le(n: int, base: int) -> list[int]:
    """Base-``base`` digits of ``n``, least significant first (empty for 0)."""
    out: list[int] = []
    while n:
        n, a = divmod(n, base)
        out.append(a)
    return out


def digit_count(n: int, base: int) -> int:
    """Number of base-``base`` digits of ``n`` (0 has none)."""
    if n <= 0:
        return 0
    # powers[i] = base**(2**i) <= n, then descend greedily
    powers = [base]
    while powers[-1] * powers[-1] <= n:
        powers.append(powers[-1] * powers[-1])
    if powers[0] > n:
        return 1
    d, acc = 0, 1
    for i in reversed(range(len(powers))):
        if acc * powers[i] <= n:
            acc *= powers[i]
            d += 1 << i
    return d + 1


def eval(map: DigitMap, n: int) -> int:  # noqa: A001 - mirrors the operation name
    return map.eval(n)


def iterate(map: DigitMap, n: int, r: int) -> int:
    return map.iterate(n, r)


def threshold(map: DigitMap) -> int:
    """Explicit T with f(n) < n for every n > T.

    With M the largest digit value and d0 the least d such that d*M < b**(d-1), any n > T has
    d >= d0 digits and f(n) <= d*M < b**(d-1) <= n.
    """
    b, top = map.base, map.max_digit_value
    d = 1
    while d * top >= b ** (d - 1):
        d += 1
    return max(b ** (d - 1) - 1, 1)


@dataclass(frozen=True, eq=False)
class CycleAtlas:
    """All cycles of a digit map together with the eventual cycle of every n <= T.

    ``cycle_table[n]`` is the index of the cycle ``n`` falls into (-1 when the
    orbit reaches 0) and ``entry_table[n]`` the number of steps to get there.
    """

    map: DigitMap
    threshold: int
    cycles: tuple[tuple[int, ...], ...]
    cycle_table: np.ndarray = field(repr=False)
    entry_table: np.ndarray = field(repr=False)

    @cached_property
    def D(self) -> frozenset[int]:
        return frozenset(x for cyc in self.cycles for x in cyc)

    @cached_property
    def _position(self) -> dict[int, tuple[int, int]]:
        return {x: (i, p) for i, cyc in enumerate(self.cycles) for p, x in enumerate(cyc)}

    def cycle_of(self, u: int) -> tuple[int, ...]:
        return self.cycles[self.locate(u)[0]]

    def locate(self, u: int) -> tuple[int, int]:
        """(cycle index, position) of a cycle element."""
        try:
            return self._position[u]
        except KeyError:
            raise ValueError(f"{u} is not a cycle number of this map") from None

    def cycle_length(self, u: int) -> int:
        return len(self.cycle_of(u))

    def reduce(self, n: int) -> tuple[int, int]:
        """Iterate f until the value is <= T; returns (value, steps taken)."""
        steps = 0
        while n > self.threshold:
            n = self.map.eval(n)
            steps += 1
        return n, steps

    def cycle_index(self, n: int) -> int:
        return int(self.cycle_table[self.reduce(n)[0]])

    def entry_steps(self, n: int) -> int | None:
        m, steps = self.reduce(n)
        if self.cycle_table[m] < 0:
            return None
        return steps + int(self.entry_table[m])

    def is_u_integer(self, n: int, u: int) -> bool:
        return n >= 1 and self.cycle_index(n) == self.locate(u)[0]

    def summary(self) -> dict[str, Any]:
        return {
            "map": self.map.to_json(),
            "threshold": self.threshold,
            "cycles": [list(c) for c in self.cycles],
            "D": sorted(self.D),
            "cycle_sizes": [
                int(np.count_nonzero(self.cycle_table[1:] == i)) for i in range(len(self.cycles))
            ],
        }


def compute_atlas(map: DigitMap) -> CycleAtlas:
    """Find every cycle by walking each n in [1, T] with memoisation.

    f maps [0, T] into itself (the digit bound gives f(n) <= (d0-1)*M <= T),
    so every orbit stays inside the table.
    """
    T = threshold(map)
    fvals = map.eval_array(np.arange(T + 1, dtype=np.int64)).tolist()
    UNSEEN = -2
    cyc = [UNSEEN] * (T + 1)
    entry = [0] * (T + 1)
    cyc[0] = -1
    found: list[list[int]] = []
    for start in range(1, T + 1):
        if cyc[start] != UNSEEN:
            continue
        path: list[int] = []
        on_path: dict[int, int] = {}
        n = start
        while cyc[n] == UNSEEN and n not in on_path:
            on_path[n] = len(path)
            path.append(n)
            n = fvals[n]
        if cyc[n] == UNSEEN:
            loop = path[on_path[n]:]
            del path[on_path[n]:]
            idx = len(found)
            found.append(loop)
            for x in loop:
                cyc[x] = idx
                entry[x] = 0
            n = loop[0]
        for x in reversed(path):
            cyc[x] = cyc[n]
            entry[x] = entry[n] + 1 if cyc[n] >= 0 else 0
            n = x

    order = sorted(range(len(found)), key=lambda i: min(found[i]))
    remap = {old: new for new, old in enumerate(order)}
    cycles = []
    for old in order:
        loop = found[old]
        p = loop.index(min(loop))
        cycles.append(tuple(loop[p:] + loop[:p]))
    cycle_table = np.array([remap.get(c, -1) for c in cyc], dtype=np.int32)
    return CycleAtlas(
        map=map,
        threshold=T,
        cycles=tuple(cycles),
        cycle_table=cycle_table,
        entry_table=np.array(entry, dtype=np.int32),
    )


@dataclass(frozen=True)
class Classification:
    n: int
    u: int
    cycle_index: int | None
    entry_steps: int | None
    cycle_length: int
    steps_to_u: int | None = None
    phase: int | None = None

    @property
    def is_u_integer(self) -> bool:
        return self.steps_to_u is not None

    def to_json(self) -> dict[str, Any]:
        return {
            "n": str(self.n) if isinstance(self.n, int) else None,
            "u": self.u,
            "cycle_index": self.cycle_index,
            "entry_steps": self.entry_steps,
            "cycle_length": self.cycle_length,
            "is_u_integer": self.is_u_integer,
            "steps_to_u": self.steps_to_u,
            "phase": self.phase,
        }


def classify_reduced(atlas: CycleAtlas, m: int, steps: int, u: int) -> tuple[int | None, int | None, int | None, int | None]:
    """Classify a value known to equal f^steps of the original, with m <= T.

    Returns (cycle_index, entry_steps, steps_to_u, phase) for the original.
    Values above T are never cycle numbers, so the steps already taken only
    shift every count.
    """
    u_idx, u_pos = atlas.locate(u)
    c = len(atlas.cycles[u_idx])
    idx = int(atlas.cycle_table[m])
    if idx < 0:
        return None, None, None, None
    entry = steps + int(atlas.entry_table[m])
    if idx != u_idx:
        return idx, entry, None, None
    landing = atlas.map.iterate(m, int(atlas.entry_table[m]))
    pos = atlas.locate(landing)[1]
    to_u = entry + (u_pos - pos) % c
    if to_u == 0:
        to_u = c
    return idx, entry, to_u, to_u % c


def classify(atlas: CycleAtlas, n: int, u: int) -> Classification:
    if n < 1:
        raise ValueError(f"classification needs a positive integer, got {n}")
    m, steps = atlas.reduce(n)
    idx, entry, to_u, phase = classify_reduced(atlas, m, steps, u)
    return Classification(n, u, idx, entry, atlas.cycle_length(u), to_u, phase)


def are_concurrent(atlas: CycleAtlas, m: int, n: int, u: int) -> bool:
    """True iff f^r(m) == f^r(n) == u for a common r >= 1."""
    a = classify(atlas, m, u)
    b = classify(atlas, n, u)
    return a.is_u_integer and b.is_u_integer and a.phase == b.phase


def orbit(map: DigitMap, n: int) -> Iterator[int]:
    while True:
        yield n
        n = map.eval(n)


def parse_table(text: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(text, str):
        try:
            return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
        except ValueError as exc:
            raise DigitMapError(f"bad table {text!r}: {exc}") from exc
    return tuple(text)
