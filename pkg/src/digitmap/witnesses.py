"""Explicit witnesses for runs of consecutive u-integers.

Each generator has two strategies.  SEARCH scans small integers and returns
the first one that works; CONSTRUCT follows the existence argument step by
step and returns sparse or symbolic values, recording every intermediate in
a :class:`WitnessTrace` so :mod:`digitmap.verify` can replay it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .core import CycleAtlas, DigitMap, classify, digit_count
from .hypotheses import PremiseError, require_premises
from .ntheory import euler_phi, modular_inverse, multiplicative_order
from .sparse import Run, SparseNumber
from .symbolic import (
    DIGIT_LIMIT,
    DeepWitness,
    OnesBlock,
    SymbolicError,
    Value,
    add_value,
    classify_value,
    concretize,
    digits_of,
    is_concrete,
    iterate_value,
    ones_block,
    value_to_json,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**7


class Strategy(str, Enum):
    SEARCH = "search"
    CONSTRUCT = "construct"


class WitnessError(Exception):
    """A generator could not produce a witness within its limits."""


class DepthExceeded(WitnessError):
    pass


class BudgetExceeded(WitnessError):
    pass


class StrategyInfeasible(WitnessError):
    pass


@dataclass
class WitnessTrace:
    kind: str  # shift | preimage | pair | shiftall | run
    strategy: str
    inputs: dict[str, Any]
    witness: Value
    intermediates: dict[str, Any] = field(default_factory=dict)
    verified: bool | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "strategy": self.strategy,
            "inputs": _jsonable(self.inputs),
            "witness": value_to_json(self.witness),
            "intermediates": _jsonable(self.intermediates),
            "verified": self.verified,
        }


_SAFE_INT = 1 << 53


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj if -_SAFE_INT < obj < _SAFE_INT else str(obj)
    if isinstance(obj, (SparseNumber, OnesBlock, DeepWitness)):
        return value_to_json(obj)
    if isinstance(obj, WitnessTrace):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _strategy(strategy: Strategy | str) -> Strategy:
    return Strategy(strategy)


def _phase(atlas: CycleAtlas, v: Value, u: int) -> int:
    cls = classify_value(atlas, v, u)
    if not cls.is_u_integer:
        raise ValueError(f"{v if isinstance(v, int) else type(v).__name__} is not a {u}-integer")
    return cls.phase


def element_with_phase(atlas: CycleAtlas, u: int, phase: int) -> int:
    """The cycle element v with steps-to-u congruent to ``phase``."""
    idx, pos_u = atlas.locate(u)
    cyc = atlas.cycles[idx]
    return cyc[(pos_u - phase) % len(cyc)]


def _require_unit_digits(map: DigitMap) -> None:
    if map.table[0] != 0 or map.table[1] != 1:
        raise PremiseError("one-digit blocks need f(0) = 0 and f(1) = 1")


# -- shifting ------------------------------------------------------------------


def shift_witness(
    map: DigitMap,
    x: Value,
    m: Value,
    r: int,
    strategy: Strategy | str = Strategy.CONSTRUCT,
    *,
    depth_limit: int = 2,
    symbolic: bool = False,
    digit_limit: int = DIGIT_LIMIT,
    budget: int = DEFAULT_BUDGET,
) -> WitnessTrace:
    """l with f^r(l + y) = x + f^r(y) for every 1 <= y <= m.

    CONSTRUCT places x one-digits above the digits of m when r = 1.  For
    larger r it first builds t for r - 1 with the bound digits(m) * max f,
    which covers every f(y), and then places t one-digits above m.  Counts
    tower with r; past ``depth_limit`` (or once a count stops being
    densifiable) this raises :class:`DepthExceeded` unless ``symbolic`` is
    set, in which case the tower is returned as nested one-digit blocks.
    """
    strategy = _strategy(strategy)
    _require_unit_digits(map)
    if r < 1:
        raise ValueError("r must be >= 1")
    inputs = {"x": x, "m": m, "r": r}
    if strategy is Strategy.SEARCH:
        if not (isinstance(x, int) and isinstance(m, int)):
            raise StrategyInfeasible("search needs concrete x and m")
        targets = [(y, x + map.iterate(y, r)) for y in range(1, m + 1)]
        for l in range(1, budget + 1):
            if all(map.iterate(l + y, r) == want for y, want in targets):
                return WitnessTrace("shift", strategy.value, inputs, l)
        raise BudgetExceeded(f"no shift witness below {budget + 1}")

    if not symbolic and r > depth_limit:
        raise DepthExceeded(f"r = {r} exceeds depth limit {depth_limit}")
    b = map.base
    bounds: list[Value] = [m]
    for _ in range(r - 1):
        bounds.append(digits_of(bounds[-1], b) * map.max_digit_value)
    starts = [digits_of(bd, b) for bd in bounds]
    value: Value = x
    for start in reversed(starts):
        value = ones_block(b, value, start, digit_limit=digit_limit)
    if not symbolic and not is_concrete(value):
        raise DepthExceeded("run counts tower past the densifiable range")
    levels = [
        {"level": r - i, "bound": bounds[i], "start": starts[i]} for i in range(r)
    ]
    return WitnessTrace("shift", strategy.value, inputs, value, {"levels": levels})


# -- congruent preimages -------------------------------------------------------


def _preimage_layer(base: int, ones: int, r: int, m_star: int, d: int) -> SparseNumber:
    runs = [Run(d, d, ones, 1)]
    if r:
        runs.append(Run((ones + 1) * d, d, r, m_star))
    return SparseNumber(base, tuple(runs))


def congruent_u_preimage(
    atlas: CycleAtlas,
    u: int,
    a: int,
    h: Value | None = None,
    strategy: Strategy | str = Strategy.SEARCH,
    *,
    seed: str = "u",
    m_star: int | None = None,
    depth_limit: int = 2,
    digit_limit: int = DIGIT_LIMIT,
    budget: int = DEFAULT_BUDGET,
) -> WitnessTrace:
    """A u-integer l with l = a (mod f(b-1)) that is concurrent with h.

    CONSTRUCT starts from l1 = v * b**j > f(b-1) * f(m*), solves
    l1 - r (f(m*) - m*) = a for 0 <= r < f(b-1) and lays out
    l2 = (l1 - r f(m*)) ones at exponents d, 2d, ... followed by r copies of
    m* at the next multiples of d, where d is the order of b modulo f(b-1).
    Then f(l2) = l1 and l2 = a.  Each further preimage advances the phase by
    one; with ``seed="u"`` (v = u) the chain is extended until the phase
    matches h, with ``seed="phase"`` v is the cycle element one phase behind
    h so l2 already matches.
    """
    strategy = _strategy(strategy)
    report = require_premises(atlas.map)
    map = atlas.map
    b, q = map.base, map.top_digit_value
    h = u if h is None else h
    target = _phase(atlas, h, u)
    c = atlas.cycle_length(u)
    a %= q
    inputs = {"u": u, "a": a, "h": h, "seed": seed}

    if strategy is Strategy.SEARCH:
        l = a if a else q
        for _ in range(budget):
            cls = classify(atlas, l, u)
            if cls.is_u_integer and cls.phase == target:
                return WitnessTrace("preimage", strategy.value, inputs, l, {"phase": target})
            l += q
        raise BudgetExceeded(f"no {u}-integer = {a} mod {q} in {budget} candidates")

    if q == 1:
        v = element_with_phase(atlas, u, target)
        return WitnessTrace("preimage", strategy.value, inputs, v,
                            {"trivial_modulus": True, "phase": target})

    if m_star is None:
        m_star = report.m_star
    elif m_star not in report.m_star_candidates:
        raise PremiseError(f"{m_star} does not satisfy gcd(f(m) - m, {q}) = 1")
    fm = map.table[m_star]
    inv = modular_inverse((fm - m_star) % q, q)
    d = multiplicative_order(b, q)

    if seed == "u":
        v0 = u
        level = 2 + (target - 1) % c
    elif seed == "phase":
        v0 = element_with_phase(atlas, u, (target - 1) % c)
        level = 2
    else:
        raise ValueError(f"unknown seed {seed!r}")
    l1, scale = v0, 0
    while l1 <= q * fm:
        l1 *= b
        scale += 1

    r2 = (l1 - a) * inv % q
    ones = l1 - r2 * fm
    layers = [_preimage_layer(b, ones, r2, m_star, d)]
    recipe = [r2]
    # l_2 is already = a, so every later level solves its congruence with r = 0
    # and is just l_{j-1} one-digits at multiples of d
    for _ in range(3, level + 1):
        recipe.append(0)
        if len(layers) >= depth_limit:
            continue
        count = concretize(layers[-1], digit_limit)
        if isinstance(count, int):
            layers.append(_preimage_layer(b, count, 0, m_star, d))
        else:
            depth_limit = len(layers)

    intermediates = {
        "l1": l1,
        "seed_element": v0,
        "seed_scale": scale,
        "m_star": m_star,
        "f_m_star": fm,
        "modulus": q,
        "d": d,
        "r": r2,
        "ones": ones,
        "j_exponents": {"start": d, "stride": d, "count": ones},
        "t_exponents": {"start": (ones + 1) * d, "stride": d, "count": r2},
        "chain_depth": level,
        "recipe": recipe,
        "phase": target,
    }
    if level == 2:
        witness: Value = layers[0]
    else:
        witness = DeepWitness(b, level, l1, tuple(layers), tuple(recipe), d, q, m_star, a, target, u, c)
    return WitnessTrace("preimage", strategy.value, inputs, witness, intermediates)


# -- concurrent pairs ----------------------------------------------------------


def concurrent_pair(
    atlas: CycleAtlas,
    u: int,
    x: int,
    strategy: Strategy | str = Strategy.SEARCH,
    *,
    margin: int = 0,
    digit_limit: int = DIGIT_LIMIT,
    budget: int = DEFAULT_BUDGET,
) -> WitnessTrace:
    """A u-integer l > margin such that l and l + x are concurrently u-integers.

    CONSTRUCT: with b**s > x (+ margin), x1 = b**s - x, pick h = f(x1) modulo
    f(b-1) larger than f(x1) plus every l_v (v in the cycle of u, l_v = 1 and
    concurrent with v), let N = l_v for the v concurrent with h, put N - 1
    ones above exponent t > s + h // f(b-1) + 1 to get x2, and fill
    k = (h - f(x2)) / f(b-1) top digits from exponent s.  Then f(l) = h and
    l + x carries into b**(s+k) so f(l + x) = N.
    """
    strategy = _strategy(strategy)
    require_premises(atlas.map)
    if x < 1:
        raise ValueError("x must be positive")
    inputs = {"u": u, "x": x, "margin": margin}
    if strategy is Strategy.SEARCH:
        for l in range(margin + 1, margin + 1 + budget):
            cl = classify(atlas, l, u)
            if not cl.is_u_integer:
                continue
            cx = classify(atlas, l + x, u)
            if cx.is_u_integer and cx.phase == cl.phase:
                return WitnessTrace("pair", strategy.value, inputs, l,
                                    {"phase": cl.phase, "steps_l": cl.steps_to_u, "steps_lx": cx.steps_to_u})
        raise BudgetExceeded(f"no concurrent pair with gap {x} in {budget} candidates")

    map = atlas.map
    b, q = map.base, map.top_digit_value
    s = digit_count(x + margin, b)
    x1 = b**s - x
    fx1 = map.eval(x1)

    def dense_preimage(a: int, target: Value) -> tuple[int, Value]:
        tr = congruent_u_preimage(atlas, u, a, target, Strategy.CONSTRUCT, seed="phase",
                                  digit_limit=digit_limit)
        value = concretize(tr.witness, digit_limit)
        if not isinstance(value, int):
            raise StrategyInfeasible("a congruent preimage is too large to use as a run count")
        return value, tr.witness

    h_prime, h_prime_sparse = dense_preimage(fx1, u)
    cycle = atlas.cycle_of(u)
    l_by_v = {v: dense_preimage(1, v)[0] for v in cycle}
    M = max(l_by_v.values())
    step = b ** euler_phi(q)
    h, boost = h_prime, 0
    while h <= fx1 + M:
        h *= step
        boost += 1
    v = element_with_phase(atlas, u, _phase(atlas, h, u))
    N = l_by_v[v]
    t = s + h // q + 2
    x2 = SparseNumber.from_dense(b, x1).add_disjoint(SparseNumber.repeated(b, 1, t + 1, N - 1))
    fx2 = x2.f_eval(map)
    k, rem = divmod(h - fx2, q)
    if rem or k < 1 or k >= t - s:
        raise StrategyInfeasible(f"inconsistent construction: k = {k}, remainder {rem}")
    l = x2.add_disjoint(SparseNumber.repeated(b, b - 1, s, k))
    intermediates = {
        "s": s,
        "x1": x1,
        "f_x1": fx1,
        "h_prime": h_prime_sparse,
        "V": list(cycle),
        "M": M,
        "boost": boost,
        "h": h,
        "v": v,
        "N": N,
        "t": t,
        "x2": x2,
        "f_x2": fx2,
        "k": k,
        "modulus": q,
    }
    return WitnessTrace("pair", strategy.value, inputs, l, intermediates)


# -- shifting the whole attractor ----------------------------------------------


def _attach_low(l: Value, low: Value) -> Value:
    if isinstance(l, SparseNumber):
        return l.add_disjoint(low)
    if isinstance(l, OnesBlock) and l.low == 0:
        return OnesBlock(l.base, l.count, l.start, low)
    raise SymbolicError("cannot attach a low part")


def shift_offsets(
    atlas: CycleAtlas,
    u: int,
    strategy: Strategy | str = Strategy.SEARCH,
    *,
    digit_limit: int = DIGIT_LIMIT,
    budget: int = DEFAULT_BUDGET,
) -> dict[int, dict[str, Any]]:
    """For each x in D an offset g with g + u and g + x concurrently u-integers.

    Built from concurrent pairs: x > u uses a pair with gap x - u and
    g = l - u, x < u a pair with gap u - x and g = l - x, and x = u takes
    g = u (b - 1) so g + u = u b.
    """
    b = atlas.map.base
    out: dict[int, dict[str, Any]] = {}
    for x in sorted(atlas.D):
        if x == u:
            offset: Value = u * (b - 1)
            pair = None
        elif x > u:
            pair = concurrent_pair(atlas, u, x - u, strategy, margin=u, digit_limit=digit_limit, budget=budget)
            offset = add_value(pair.witness, -u)
        else:
            pair = concurrent_pair(atlas, u, u - x, strategy, margin=x, digit_limit=digit_limit, budget=budget)
            offset = add_value(pair.witness, -x)
        pu = classify_value(atlas, add_value(offset, u), u)
        px = classify_value(atlas, add_value(offset, x), u)
        if not (pu.is_u_integer and px.is_u_integer and pu.phase == px.phase):
            raise StrategyInfeasible(f"offset for {x} is not concurrent")
        out[x] = {"offset": offset, "pair": pair}
    return out


def shift_all_witness(
    atlas: CycleAtlas,
    u: int,
    strategy: Strategy | str = Strategy.SEARCH,
    *,
    scan_budget: int = 10**4,
    digit_limit: int = DIGIT_LIMIT,
    budget: int = DEFAULT_BUDGET,
) -> WitnessTrace:
    """h such that h + x is a u-integer for every cycle number x.

    SEARCH first scans h <= ``scan_budget`` directly.  Otherwise (and always
    under CONSTRUCT) it shrinks subsets X of D containing u: with an offset
    g for some x in X, iterating r times sends g + u and g + x both to u and
    every g + y into D, giving a smaller X*.  A solution h* for X* is lifted
    by a shift witness l with f^r(l + g + y) = h* + f^r(g + y), and
    h_X = l + g.  Offsets come from concurrent pairs of the same strategy.
    """
    strategy = _strategy(strategy)
    require_premises(atlas.map)
    map = atlas.map
    D = sorted(atlas.D)
    c = atlas.cycle_length(u)
    inputs = {"u": u}
    if strategy is Strategy.SEARCH:
        for h in range(1, scan_budget + 1):
            if all(atlas.is_u_integer(h + x, u) for x in D):
                return WitnessTrace("shiftall", strategy.value, inputs, h, {"method": "scan"})
        log.debug("no h <= %d works directly; falling back to subset induction", scan_budget)

    offsets = shift_offsets(atlas, u, strategy, digit_limit=digit_limit, budget=budget)
    steps: list[dict[str, Any]] = []

    def solve(X: tuple[int, ...]) -> Value:
        others = [x for x in X if x != u]
        if not others:
            return offsets[u]["offset"]
        if len(others) == 1:
            return offsets[others[0]]["offset"]
        x = others[0]
        g = offsets[x]["offset"]
        first = classify_value(atlas, add_value(g, u), u).steps_to_u
        entries = [classify_value(atlas, add_value(g, y), u).entry_steps for y in X]
        if any(e is None for e in entries):
            raise StrategyInfeasible("an orbit reaches 0 instead of a cycle")
        late = max(entries)
        r = first if first >= late else first + c * -(-(late - first) // c)
        image = tuple(sorted({_reduce_to_int(map, add_value(g, y), r) for y in X}))
        h_star = solve(image)
        bound = add_value(g, max(X))
        lift = shift_witness(map, h_star, bound, r, symbolic=True, digit_limit=digit_limit)
        log.debug("reduced %s to %s after %d steps", X, image, r)
        steps.append({"X": list(X), "x": x, "offset": g, "r": r, "X_star": list(image)})
        return _attach_low(lift.witness, g)

    h = solve(tuple(D))
    steps.reverse()
    intermediates = {
        "method": "induction",
        "offsets": {x: info["offset"] for x, info in offsets.items()},
        "steps": steps,
    }
    return WitnessTrace("shiftall", strategy.value, inputs, h, intermediates)


def _reduce_to_int(map: DigitMap, v: Value, r: int) -> int:
    out = iterate_value(map, v, r)
    out = concretize(out)
    if not isinstance(out, int):
        raise SymbolicError("iterate did not reach a concrete value")
    return out


# -- consecutive runs ----------------------------------------------------------


def consecutive_run(
    atlas: CycleAtlas,
    u: int,
    n: int,
    strategy: Strategy | str = Strategy.SEARCH,
    *,
    h_strategy: Strategy | str = Strategy.SEARCH,
    scan_budget: int = 10**4,
    digit_limit: int = DIGIT_LIMIT,
    budget: int = DEFAULT_BUDGET,
) -> WitnessTrace:
    """l >= 1 with l + 1, ..., l + n all u-integers.

    SEARCH returns the smallest such l.  CONSTRUCT takes h from
    :func:`shift_all_witness`, r as the largest number of steps any
    1 <= y <= n needs to reach a cycle, and l a shift witness with
    f^r(l + y) = h + f^r(y), which lands in h + D.
    """
    strategy = _strategy(strategy)
    require_premises(atlas.map)
    if n < 1:
        raise ValueError("n must be positive")
    inputs = {"u": u, "n": n}
    if strategy is Strategy.SEARCH:
        run = 0
        for m in range(2, budget + 2):
            run = run + 1 if atlas.is_u_integer(m, u) else 0
            if run >= n:
                return WitnessTrace("run", strategy.value, inputs, m - n)
        raise BudgetExceeded(f"no run of {n} below {budget + 2}")

    ht = shift_all_witness(atlas, u, h_strategy, scan_budget=scan_budget,
                           digit_limit=digit_limit, budget=budget)
    entries = [atlas.entry_steps(y) for y in range(1, n + 1)]
    if any(e is None for e in entries):
        raise StrategyInfeasible("an orbit reaches 0 instead of a cycle")
    r = max(1, *entries)
    lift = shift_witness(atlas.map, ht.witness, n, r, symbolic=True, digit_limit=digit_limit)
    intermediates = {"h": ht.witness, "r": r, "shiftall": ht, "levels": lift.intermediates["levels"]}
    return WitnessTrace("run", strategy.value, inputs, lift.witness, intermediates)
