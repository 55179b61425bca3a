"""Values too large for any explicit digit layout.

Witness constructions nest: the number of one-digits in a block is itself
the previous witness.  A :class:`OnesBlock` keeps that nesting symbolic,
``count`` ones starting at exponent ``start`` plus a concrete ``low`` part
below ``base**start``.  A :class:`DeepWitness` is the analogous chain of
preimages with fixed residue, stored as its lowest concrete layers plus the
per-level recipe.

Applying the digit map to either form peels exactly one level, which is what
verification relies on: for maps with ``f(0) == 0`` and ``f(1) == 1``,
``f(ones(C) * base**s + low) == C + f(low)`` whenever ``low < base**s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

from .core import CycleAtlas, Classification, DigitMap, classify_reduced, digit_count
from .sparse import SparseNumber, SparseError, TooLargeError

# Default cap on dense expansions made while normalising values.
DIGIT_LIMIT = 200_000


class SymbolicError(ValueError):
    """An operation would leave the carry-free symbolic regime."""


@dataclass(frozen=True)
class OnesBlock:
    base: int
    count: Value
    start: int
    low: int | SparseNumber = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "base": self.base,
            "count": value_to_json(self.count),
            "start": str(self.start),
            "low": value_to_json(self.low),
        }


@dataclass(frozen=True)
class DeepWitness:
    """A level-``level`` preimage chain l_1 <- l_2 <- ... <- l_level.

    ``f(l_{j+1}) == l_j`` and every l_j with j >= 2 is congruent to
    ``residue`` modulo ``modulus``.  Level j is ``K_j`` one-digits at
    exponents d, 2d, ..., K_j d followed by ``r_j`` copies of ``m_star`` at
    the next multiples of d, where ``K_j = l_{j-1} - r_j * f(m_star)``.
    ``layers`` holds the concrete l_2, l_3, ...; ``recipe[j-2]`` is r_j.
    """

    base: int
    level: int
    seed: int
    layers: tuple[SparseNumber, ...]
    recipe: tuple[int, ...]
    d: int
    modulus: int
    m_star: int
    residue: int
    phase: int
    u: int
    cycle_length: int

    @property
    def concrete_level(self) -> int:
        return 1 + len(self.layers)

    def layer(self, j: int) -> int | SparseNumber | DeepWitness:
        """l_j as the most concrete object available."""
        if not 1 <= j <= self.level:
            raise IndexError(j)
        if j == 1:
            return self.seed
        if j <= self.concrete_level:
            return self.layers[j - 2]
        if j == self.level:
            return self
        return DeepWitness(
            self.base, j, self.seed, self.layers, self.recipe[: j - 1], self.d,
            self.modulus, self.m_star, self.residue,
            (self.phase - (self.level - j)) % self.cycle_length, self.u, self.cycle_length,
        )

    def lower(self) -> int | SparseNumber | DeepWitness:
        return self.layer(self.level - 1)

    def to_json(self) -> dict[str, Any]:
        return {
            "base": self.base,
            "level": self.level,
            "seed": str(self.seed),
            "layers": [s.to_json() for s in self.layers],
            "recipe": [str(r) for r in self.recipe],
            "d": self.d,
            "modulus": self.modulus,
            "m_star": self.m_star,
            "residue": self.residue,
            "phase": self.phase,
            "u": self.u,
            "cycle_length": self.cycle_length,
        }


Value = Union[int, SparseNumber, OnesBlock, DeepWitness]


def ones_block(base: int, count: Value, start: int, low: int | SparseNumber = 0,
               digit_limit: int = DIGIT_LIMIT) -> Value:
    """``count`` one-digits from exponent ``start`` upward, plus ``low``.

    Returns a SparseNumber whenever ``count`` has a dense value within
    ``digit_limit`` digits, otherwise an :class:`OnesBlock`.
    """
    if digits_of(low, base) > start:
        raise SymbolicError("low part reaches the block")
    count = concretize(count, digit_limit)
    if isinstance(count, int):
        block = SparseNumber.repeated(base, 1, start, count)
        return block.add_disjoint(low)
    return OnesBlock(base, count, start, low)


def concretize(v: Value, digit_limit: int = DIGIT_LIMIT) -> Value:
    if isinstance(v, SparseNumber) and v.num_digits <= digit_limit:
        return v.to_dense(digit_limit)
    return v


def is_concrete(v: Value) -> bool:
    return isinstance(v, (int, SparseNumber))


def digits_of(v: Value, base: int) -> int:
    if isinstance(v, int):
        return digit_count(v, base)
    if isinstance(v, SparseNumber):
        return v.num_digits
    raise SymbolicError("digit count of a symbolic value is not tracked")


def add_value(v: Value, w: int) -> Value:
    """v + w for a small signed integer w, staying carry-free above each block."""
    if w == 0:
        return v
    if isinstance(v, int):
        if v + w < 0:
            raise SymbolicError("negative result")
        return v + w
    if isinstance(v, SparseNumber):
        try:
            return v.add_small(w)
        except SparseError as exc:
            raise SymbolicError(str(exc)) from exc
    if isinstance(v, OnesBlock):
        low = add_value(v.low, w)
        if digits_of(low, v.base) > v.start:
            raise SymbolicError("addition carries into a symbolic block")
        return OnesBlock(v.base, v.count, v.start, low)
    raise SymbolicError(f"cannot add to {type(v).__name__}")


def f_value(map: DigitMap, v: Value) -> Value:
    if isinstance(v, int):
        return map.eval(v)
    if isinstance(v, SparseNumber):
        return v.f_eval(map)
    if isinstance(v, OnesBlock):
        if map.table[0] != 0 or map.table[1] != 1:
            raise SymbolicError("block evaluation needs f(0) = 0 and f(1) = 1")
        return add_value(v.count, f_value(map, v.low))
    if isinstance(v, DeepWitness):
        return v.lower()
    raise TypeError(type(v))


def iterate_value(map: DigitMap, v: Value, r: int) -> Value:
    for _ in range(r):
        v = f_value(map, v)
    return v


def reduce_value(atlas: CycleAtlas, v: Value) -> tuple[int, int]:
    """Apply f until an integer <= T remains; returns (value, steps)."""
    steps = 0
    while not (isinstance(v, int) and v <= atlas.threshold):
        v = f_value(atlas.map, v)
        steps += 1
    return v, steps


def classify_value(atlas: CycleAtlas, v: Value, u: int) -> Classification:
    m, steps = reduce_value(atlas, v)
    idx, entry, to_u, phase = classify_reduced(atlas, m, steps, u)
    return Classification(v, u, idx, entry, atlas.cycle_length(u), to_u, phase)


def same_value(a: Value, b: Value, digit_limit: int = DIGIT_LIMIT) -> bool:
    a = concretize(a, digit_limit)
    b = concretize(b, digit_limit)
    return a == b


def value_to_json(v: Value) -> dict[str, Any]:
    if isinstance(v, bool):
        raise TypeError("booleans are not values")
    if isinstance(v, int):
        return {"dense": str(v)}
    if isinstance(v, SparseNumber):
        return {"sparse": v.to_json()}
    if isinstance(v, OnesBlock):
        return {"ones_block": v.to_json()}
    if isinstance(v, DeepWitness):
        return {"deep": v.to_json()}
    raise TypeError(type(v))


def value_from_json(obj: dict[str, Any]) -> Value:
    if "dense" in obj:
        return int(obj["dense"])
    if "sparse" in obj:
        return SparseNumber.from_json(obj["sparse"])
    if "ones_block" in obj:
        o = obj["ones_block"]
        return OnesBlock(o["base"], value_from_json(o["count"]), int(o["start"]), value_from_json(o["low"]))
    if "deep" in obj:
        o = obj["deep"]
        return DeepWitness(
            o["base"], o["level"], int(o["seed"]),
            tuple(SparseNumber.from_json(s) for s in o["layers"]),
            tuple(int(r) for r in o["recipe"]),
            o["d"], o["modulus"], o["m_star"], o["residue"], o["phase"], o["u"], o["cycle_length"],
        )
    raise ValueError(f"unrecognised value encoding: {sorted(obj)}")


__all__ = [
    "DIGIT_LIMIT",
    "DeepWitness",
    "OnesBlock",
    "SymbolicError",
    "TooLargeError",
    "Value",
    "add_value",
    "classify_value",
    "concretize",
    "digits_of",
    "f_value",
    "is_concrete",
    "iterate_value",
    "ones_block",
    "reduce_value",
    "same_value",
    "value_from_json",
    "value_to_json",
]
