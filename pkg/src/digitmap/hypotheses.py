"""Premise checks for digit maps and the power-map digit construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Any

from .core import DigitMap
from .ntheory import factorize, modular_inverse, primitive_root


class PremiseError(ValueError):
    """A map or parameter pair violates the hypotheses a routine needs."""


@dataclass(frozen=True)
class PremiseReport:
    f0_ok: bool
    f1_ok: bool
    gcd_b_ok: bool
    m_star_candidates: tuple[int, ...]
    reasons: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.f0_ok and self.f1_ok and self.gcd_b_ok and bool(self.m_star_candidates)

    @property
    def m_star(self) -> int | None:
        return self.m_star_candidates[0] if self.m_star_candidates else None

    def to_json(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "f0_ok": self.f0_ok,
            "f1_ok": self.f1_ok,
            "gcd_b_ok": self.gcd_b_ok,
            "m_star_candidates": list(self.m_star_candidates),
            "reasons": list(self.reasons),
        }


def check_premises(map: DigitMap) -> PremiseReport:
    b, t = map.base, map.table
    q = map.top_digit_value
    f0_ok = t[0] == 0
    f1_ok = t[1] == 1
    gcd_b_ok = gcd(b, q) == 1
    # math.gcd(0, q) == q, so fixed digits only qualify when q == 1
    cands = tuple(m for m in range(b) if gcd(abs(t[m] - m), q) == 1)
    reasons = []
    if not f0_ok:
        reasons.append(f"f(0) = {t[0]}, expected 0")
    if not f1_ok:
        reasons.append(f"f(1) = {t[1]}, expected 1")
    if not gcd_b_ok:
        reasons.append(f"gcd(b, f(b-1)) = gcd({b}, {q}) = {gcd(b, q)}")
    if not cands:
        reasons.append(f"no digit m with gcd(f(m) - m, {q}) = 1")
    return PremiseReport(f0_ok, f1_ok, gcd_b_ok, cands, tuple(reasons))


def require_premises(map: DigitMap) -> PremiseReport:
    report = check_premises(map)
    if not report.ok:
        raise PremiseError("; ".join(report.reasons))
    return report


def power_map(e: int, b: int) -> DigitMap:
    return DigitMap.power(e, b)


@dataclass(frozen=True)
class PanReport:
    e: int
    b: int
    primes: tuple[tuple[int, int, bool], ...]  # (p, p - 1, (p - 1) | (e - 1))

    @property
    def holds(self) -> bool:
        return not any(divides for _, _, divides in self.primes)

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict[str, Any]:
        return {
            "e": self.e,
            "b": self.b,
            "holds": self.holds,
            "primes": [{"p": p, "p_minus_1": pm, "divides": d} for p, pm, d in self.primes],
        }


def pan_condition(e: int, b: int) -> PanReport:
    """For every prime p | b - 1, p - 1 must not divide e - 1."""
    primes = tuple((p, p - 1, (e - 1) % (p - 1) == 0) for p in sorted(factorize(b - 1)))
    return PanReport(e, b, primes)


@dataclass(frozen=True)
class GCertificate:
    e: int
    b: int
    g: int
    # (p, alpha, cofactor, generator, g_i, g**e mod p, g mod p)
    components: tuple[tuple[int, int, int, int, int, int, int], ...]
    gcd_value: int
    in_m_star: bool
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict[str, Any]:
        return {
            "e": self.e,
            "b": self.b,
            "g": self.g,
            "components": [
                dict(zip(("p", "alpha", "cofactor", "generator", "g_i", "g_pow_e_mod_p", "g_mod_p"), c))
                for c in self.components
            ],
            "gcd_f_g_minus_g_f_top": self.gcd_value,
            "in_m_star_candidates": self.in_m_star,
            "checks": self.checks,
            "ok": self.ok,
        }


def construct_g(e: int, b: int) -> GCertificate:
    """Build a digit g with gcd(g**e - g, (b-1)**e) = 1 from primitive roots.

    For each prime power p**alpha exactly dividing b - 1 take the smallest
    generator of U(p) times the inverse of the cofactor (b-1)/p**alpha, then
    sum the cofactor-weighted pieces and reduce mod b - 1.
    """
    if e < 2 or b < 2:
        raise PremiseError(f"need e >= 2 and b >= 2, got e={e}, b={b}")
    pan = pan_condition(e, b)
    if not pan:
        bad = [p for p, _, d in pan.primes if d]
        raise PremiseError(f"(p - 1) | (e - 1) for p in {bad}; no such digit is guaranteed")
    n = b - 1
    comps = []
    g = 0
    for p, alpha in sorted(factorize(n).items()) if n > 1 else []:
        cof = n // p**alpha
        gen = primitive_root(p)
        g_i = gen * modular_inverse(cof, p) % p
        g += cof * g_i
        comps.append((p, alpha, cof, gen, g_i))
    g %= n
    fmap = DigitMap.power(e, b)
    top = fmap.top_digit_value
    full = tuple(c + (pow(g, e, c[0]), g % c[0]) for c in comps)
    gcd_value = gcd(abs(fmap.table[g] - g), top)
    in_m_star = g in check_premises(fmap).m_star_candidates
    checks = {
        "g_is_digit": 0 <= g < b,
        "g_pow_e_differs_mod_each_p": all(ge != gm for *_, ge, gm in full),
        "gcd_is_one": gcd_value == 1,
        "in_m_star_candidates": in_m_star,
    }
    return GCertificate(e, b, g, full, gcd_value, in_m_star, checks)
