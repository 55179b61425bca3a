"""Replay a :class:`~digitmap.witnesses.WitnessTrace` with exact arithmetic.

Nothing recorded in a trace is trusted: pair witnesses are rebuilt from their
recorded pieces, symbolic preimage chains have their residues and phases
recomputed level by level, and every membership claim goes back through the
classifier.  Failures are collected, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .core import CycleAtlas
from .sparse import SparseError, SparseNumber
from .symbolic import (
    DeepWitness,
    SymbolicError,
    Value,
    add_value,
    classify_value,
    iterate_value,
    same_value,
)
from .witnesses import WitnessTrace

# Largest additand bound checked exhaustively for shift witnesses.
EXHAUSTIVE_LIMIT = 10_000


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    kind: str
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "ok": self.ok,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def verify_witness(atlas: CycleAtlas, trace: WitnessTrace) -> VerificationReport:
    report = VerificationReport(trace.kind)
    handler = _HANDLERS.get(trace.kind)
    if handler is None:
        report.add("known kind", False, trace.kind)
        return report
    try:
        handler(atlas, trace, report)
    except (SymbolicError, SparseError, ArithmeticError, ValueError, KeyError, TypeError) as exc:
        report.add("replay completed", False, f"{type(exc).__name__}: {exc}")
    trace.verified = report.ok
    return report


def value_residue(v: Value, q: int) -> int:
    """v mod q, recomputing symbolic preimage levels from their recipe."""
    if isinstance(v, int):
        return v % q
    if isinstance(v, SparseNumber):
        return v.residue(q)
    if isinstance(v, DeepWitness):
        raise SymbolicError("deep witness residues need the map; use deep_residues")
    raise SymbolicError(f"no residue for {type(v).__name__}")


def deep_residues(w: DeepWitness, f_m_star: int) -> list[int]:
    """Residues of l_1, ..., l_level recomputed from the recipe alone."""
    # level j >= 2: K_j one-digits at multiples of d (each = 1 mod q) plus
    # r_j copies of m*, where K_j = l_{j-1} - r_j f(m*)
    q = w.modulus
    res = [w.seed % q]
    for r_j in w.recipe:
        res.append((res[-1] - r_j * (f_m_star - w.m_star)) % q)
    return res


def _check_deep(atlas: CycleAtlas, w: DeepWitness, report: VerificationReport) -> None:
    map = atlas.map
    q = w.modulus
    report.add("chain length matches recipe", len(w.recipe) == w.level - 1)
    report.add("f(l_2) = l_1", w.layers[0].f_eval(map) == w.seed)
    for j in range(1, len(w.layers)):
        below = w.layers[j - 1].to_dense()
        report.add(f"f(l_{j + 2}) = l_{j + 1}", w.layers[j].f_eval(map) == below)
    for j, layer in enumerate(w.layers, start=2):
        expected = (layer.residue(q) if q > 1 else 0)
        report.add(f"l_{j} residue", expected == w.residue % q, f"{expected} vs {w.residue}")
    residues = deep_residues(w, map.table[w.m_star])
    report.add(
        "residue",
        all(r == w.residue % q for r in residues[1:]),
        f"recomputed {residues[-1]}, declared {w.residue}",
    )
    seed_cls = classify_value(atlas, w.seed, w.u)
    if report.add("l_1 is a u-integer", seed_cls.is_u_integer):
        phase = (seed_cls.phase + w.level - 1) % w.cycle_length
        report.add("phase", phase == w.phase, f"recomputed {phase}, declared {w.phase}")


def _verify_shift(atlas: CycleAtlas, trace: WitnessTrace, report: VerificationReport) -> None:
    map = atlas.map
    x, m, r = trace.inputs["x"], trace.inputs["m"], trace.inputs["r"]
    l = trace.witness
    if isinstance(m, int) and m <= EXHAUSTIVE_LIMIT:
        bad = [
            y for y in range(1, m + 1)
            if not same_value(iterate_value(map, add_value(l, y), r), add_value(x, map.iterate(y, r)))
        ]
        report.add("f^r(l + y) = x + f^r(y) for all y <= m", not bad, f"first failure y={bad[0]}" if bad else "")
    else:
        # too many additands to enumerate: check the extremes
        for y in (1, m) if isinstance(m, int) else (1,):
            got = iterate_value(map, add_value(l, y), r)
            report.add(f"f^r(l + {y}) = x + f^r({y})", same_value(got, add_value(x, map.iterate(y, r))))
    for level in trace.intermediates.get("levels", []):
        report.add(f"level {level['level']} start clears its bound", level["start"] >= 1)


def _verify_preimage(atlas: CycleAtlas, trace: WitnessTrace, report: VerificationReport) -> None:
    map = atlas.map
    q = map.top_digit_value
    u, a, h = trace.inputs["u"], trace.inputs["a"], trace.inputs["h"]
    l = trace.witness
    cls = classify_value(atlas, l, u)
    report.add("l is a u-integer", cls.is_u_integer)
    res = deep_residues(l, map.table[l.m_star])[-1] if isinstance(l, DeepWitness) else value_residue(l, q)
    report.add("l = a mod f(b-1)", res == a % q, f"{res} vs {a % q}")
    h_cls = classify_value(atlas, h, u)
    report.add("l and h concurrent", cls.is_u_integer and h_cls.is_u_integer and cls.phase == h_cls.phase)
    im = trace.intermediates
    if isinstance(l, DeepWitness):
        _check_deep(atlas, l, report)
    if trace.strategy == "construct" and "l1" in im:
        l1, r, fm, ms = im["l1"], im["r"], im["f_m_star"], im["m_star"]
        report.add("0 <= r < f(b-1)", 0 <= r < q)
        report.add("l_1 > f(b-1) f(m*)", l1 > q * fm)
        report.add("l_1 - r f(m*) >= 1", l1 - r * fm >= 1)
        report.add("l_1 - r (f(m*) - m*) = a", (l1 - r * (fm - ms) - a) % q == 0)
        report.add("f(m*) recorded correctly", map.table[ms] == fm)
        report.add("b^d = 1 mod f(b-1)", pow(map.base, im["d"], q) == 1 % q)
        l2 = l.layers[0] if isinstance(l, DeepWitness) else l
        if isinstance(l2, SparseNumber):
            report.add("f(l_2) = l_1", l2.f_eval(map) == l1)


def _verify_pair(atlas: CycleAtlas, trace: WitnessTrace, report: VerificationReport) -> None:
    map = atlas.map
    b, q = map.base, map.top_digit_value
    u, x = trace.inputs["u"], trace.inputs["x"]
    margin = trace.inputs.get("margin", 0)
    l = trace.witness
    im = trace.intermediates
    if trace.strategy == "construct":
        s, k, t = im["s"], im["k"], im["t"]
        x1, x2, h, N = im["x1"], im["x2"], im["h"], im["N"]
        report.add("b^s > x + margin", b**s > x + margin)
        report.add("x_1 = b^s - x", x1 == b**s - x)
        report.add("f(x_1) recorded correctly", map.eval(x1) == im["f_x1"])
        rebuilt = x2.add_disjoint(SparseNumber.repeated(b, b - 1, s, k))
        report.add("l = x_2 + (b-1) run of length k", rebuilt == l)
        fl = rebuilt.f_eval(map)
        report.add("f(l) = h", fl == h, "" if fl == h else f"f(l) - h = {fl - h}")
        f_lx = rebuilt.add_small(x).f_eval(map)
        report.add("f(l + x) = N", f_lx == N)
        fx2 = x2.f_eval(map)
        report.add("f(x_2) = f(x_1) + (N - 1)", fx2 == im["f_x1"] + N - 1)
        report.add("f(x_2) = f(x_1) mod f(b-1)", (fx2 - im["f_x1"]) % q == 0)
        report.add("k >= 1", k >= 1)
        report.add("k < t - s", k < t - s)
        report.add("t > s + h // f(b-1) + 1", t > s + h // q + 1)
        report.add("h > f(x_1) + M", h > im["f_x1"] + im["M"])
        report.add("h = f(x_1) mod f(b-1)", (h - im["f_x1"]) % q == 0)
        hc, nc = classify_value(atlas, h, u), classify_value(atlas, N, u)
        report.add("h and N concurrent", hc.is_u_integer and nc.is_u_integer and hc.phase == nc.phase)
        report.add("l > margin", b**s > margin and rebuilt.num_digits > s)
    else:
        report.add("l > margin", l > margin)
    cl = classify_value(atlas, l, u)
    clx = classify_value(atlas, add_value(l, x), u)
    report.add("l is a u-integer", cl.is_u_integer)
    report.add("l + x is a u-integer", clx.is_u_integer)
    report.add("l and l + x concurrent", cl.is_u_integer and clx.is_u_integer and cl.phase == clx.phase)


def _verify_shiftall(atlas: CycleAtlas, trace: WitnessTrace, report: VerificationReport) -> None:
    u = trace.inputs["u"]
    h = trace.witness
    for x in sorted(atlas.D):
        report.add(f"h + {x} is a u-integer", classify_value(atlas, add_value(h, x), u).is_u_integer)
    for x, g in trace.intermediates.get("offsets", {}).items():
        gu = classify_value(atlas, add_value(g, u), u)
        gx = classify_value(atlas, add_value(g, x), u)
        report.add(f"offset for {x} concurrent", gu.is_u_integer and gx.is_u_integer and gu.phase == gx.phase)


def _verify_run(atlas: CycleAtlas, trace: WitnessTrace, report: VerificationReport) -> None:
    map = atlas.map
    u, n = trace.inputs["u"], trace.inputs["n"]
    l = trace.witness
    if isinstance(l, int):
        report.add("l >= 0", l >= 0)
    for y in range(1, n + 1):
        report.add(f"l + {y} is a u-integer", classify_value(atlas, add_value(l, y), u).is_u_integer)
    im = trace.intermediates
    if "h" in im:
        h, r = im["h"], im["r"]
        for y in range(1, n + 1):
            got = iterate_value(map, add_value(l, y), r)
            report.add(f"f^r(l + {y}) = h + f^r({y})", same_value(got, add_value(h, map.iterate(y, r))))
        sub = im.get("shiftall")
        if isinstance(sub, WitnessTrace):
            inner = verify_witness(atlas, sub)
            report.add("shift-all witness verified", inner.ok,
                       "; ".join(c.name for c in inner.failures))


_HANDLERS = {
    "shift": _verify_shift,
    "preimage": _verify_preimage,
    "pair": _verify_pair,
    "shiftall": _verify_shiftall,
    "run": _verify_run,
}
