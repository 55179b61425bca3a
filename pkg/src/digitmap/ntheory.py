"""Small exact number-theory helpers (digit-scale moduli)."""

from __future__ import annotations

from math import gcd

__all__ = [
    "gcd",
    "factorize",
    "euler_phi",
    "multiplicative_order",
    "primitive_root",
    "modular_inverse",
]


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation by trial division."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    phi = n
    for p in factorize(n):
        phi -= phi // p
    return phi


def multiplicative_order(a: int, q: int) -> int:
    """Least k >= 1 with a**k == 1 (mod q); the order is 1 for q == 1."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if gcd(a, q) != 1:
        raise ValueError(f"{a} is not a unit modulo {q}")
    if q == 1:
        return 1
    k = euler_phi(q)
    for p in factorize(k):
        while k % p == 0 and pow(a, k // p, q) == 1:
            k //= p
    return k


def primitive_root(p: int) -> int:
    """Smallest generator of U(p) for a prime p."""
    if p == 2:
        return 1
    factors = factorize(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in factors):
            return g
    raise ValueError(f"{p} has no primitive root")


def modular_inverse(a: int, q: int) -> int:
    if gcd(a, q) != 1:
        raise ValueError(f"{a} has no inverse modulo {q}")
    return pow(a, -1, q)
