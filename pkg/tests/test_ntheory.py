import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import factorint, mod_inverse, n_order, totient
from sympy.ntheory import primitive_root as sympy_primitive_root

from digitmap.ntheory import euler_phi, factorize, modular_inverse, multiplicative_order, primitive_root


def test_examples():
    assert euler_phi(81) == 54
    assert multiplicative_order(10, 81) == 9
    assert primitive_root(3) == 2
    assert factorize(1) == {}


@given(st.integers(min_value=1, max_value=10**6))
def test_factorize_and_phi_match_sympy(n):
    assert factorize(n) == factorint(n)
    assert euler_phi(n) == totient(n)


@given(st.integers(min_value=1, max_value=10**4), st.integers(min_value=2, max_value=10**4))
def test_order_matches_sympy_and_divides_phi(a, q):
    from math import gcd

    if gcd(a, q) != 1:
        with pytest.raises(ValueError):
            multiplicative_order(a, q)
        return
    k = multiplicative_order(a, q)
    assert k == n_order(a, q)
    assert euler_phi(q) % k == 0


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 97, 101])
def test_primitive_root_is_smallest(p):
    assert primitive_root(p) == sympy_primitive_root(p)


@given(st.integers(min_value=1, max_value=10**5), st.integers(min_value=2, max_value=10**5))
def test_modular_inverse(a, q):
    from math import gcd

    if gcd(a, q) == 1:
        assert modular_inverse(a, q) == mod_inverse(a, q)
    else:
        with pytest.raises(ValueError):
            modular_inverse(a, q)
