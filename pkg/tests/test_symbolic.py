import json

import pytest

from digitmap.sparse import SparseNumber
from digitmap.symbolic import (
    OnesBlock,
    SymbolicError,
    add_value,
    classify_value,
    f_value,
    ones_block,
    same_value,
    value_from_json,
    value_to_json,
)


def test_ones_block_densifies_small_counts():
    v = ones_block(10, 3, 2)
    assert isinstance(v, SparseNumber)
    assert v.to_dense() == 11100


def test_nested_block_peels_one_level(happy):
    inner = ones_block(10, 12, 3)  # 12 ones, value ~ 1.1e14
    outer = ones_block(10, inner, 20, low=7, digit_limit=10)
    assert isinstance(outer, OnesBlock)
    # f(outer) = inner + f(7)
    assert same_value(f_value(happy, outer), add_value(inner, 49))


def test_block_addition_stays_below_block():
    block = OnesBlock(10, ones_block(10, 5, 3), 4, 0)
    assert add_value(block, 25).low == 25
    with pytest.raises(SymbolicError):
        add_value(block, 10**4)


def test_block_needs_unit_digits():
    from digitmap import DigitMap

    fmap = DigitMap(10, (0, 2, 4, 9, 16, 25, 36, 49, 64, 81))
    with pytest.raises(SymbolicError):
        f_value(fmap, OnesBlock(10, SparseNumber(10, ((0, 1, 10**9, 1),)), 3, 0))


def test_classify_tower(happy_atlas):
    # three nested levels, far beyond any dense expansion; f^3 of it is 4
    v = ones_block(10, 4, 2)
    for start in (10, 40):
        v = ones_block(10, v, start, digit_limit=1000)
    assert isinstance(v, OnesBlock)
    cls = classify_value(happy_atlas, v, 4)
    assert (cls.steps_to_u, cls.phase) == (3, 3)
    assert not classify_value(happy_atlas, v, 1).is_u_integer


@pytest.mark.parametrize(
    "value",
    [
        12345678901234567890,
        SparseNumber(10, ((10**40, 3, 7, 2),)),
        OnesBlock(10, SparseNumber(10, ((3, 1, 10**30, 1),)), 17, 5),
    ],
)
def test_json_round_trip(value):
    payload = json.loads(json.dumps(value_to_json(value)))
    assert value_from_json(payload) == value
