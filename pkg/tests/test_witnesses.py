import random

import pytest

import oracles
from conftest import HAPPY_TABLE, random_premise_map
from digitmap import DigitMap, PremiseError, classify, compute_atlas
from digitmap.sparse import Run, SparseNumber
from digitmap.symbolic import DeepWitness, OnesBlock, classify_value
from digitmap.verify import verify_witness
from digitmap.witnesses import (
    BudgetExceeded,
    DepthExceeded,
    Strategy,
    concurrent_pair,
    congruent_u_preimage,
    consecutive_run,
    shift_all_witness,
    shift_witness,
)

BASE3_MAPS = [DigitMap(3, (0, 1, 5)), DigitMap(3, (0, 1, 7))]


def oracle_shift_holds(fmap: DigitMap, l, x: int, m: int, r: int) -> bool:
    """f^r(l + y) = x + f^r(y) for y <= m, reading the first step off l's runs."""
    table, base = fmap.table, fmap.base
    if isinstance(l, int):
        l = SparseNumber.from_dense(base, l)
    low = l.runs[0].start
    if base**low <= m:
        return False
    first = sum(run.count * table[run.digit] for run in l.runs)
    for y in range(1, m + 1):
        v = oracles.iterate(first + oracles.digit_image(y, table, base), table, base, r - 1)
        if v != x + oracles.iterate(y, table, base, r):
            return False
    return True


@pytest.mark.parametrize("x, m, r, dense", [(3, 99, 1, 11100), (1, 9, 1, 10)])
def test_shift_examples(happy, x, m, r, dense):
    trace = shift_witness(happy, x, m, r)
    assert trace.witness.to_dense() == dense
    assert oracle_shift_holds(happy, trace.witness, x, m, r)


def test_shift_depth_two_example(happy):
    trace = shift_witness(happy, 2, 9, 2)
    # inner witness 2 ones above one digit of m' = 81, i.e. 1100 ones
    assert trace.witness.runs == (Run(1, 1, 1100, 1),)
    assert oracle_shift_holds(happy, trace.witness, 2, 9, 2)


@pytest.mark.parametrize("fmap", BASE3_MAPS, ids=["t5", "t7"])
def test_shift_exhaustive_base3(fmap):
    for r in (1, 2):
        for x in range(1, 11):
            for m in range(1, 101):
                l = shift_witness(fmap, x, m, r).witness
                assert oracle_shift_holds(fmap, l, x, m, r), (x, m, r)


@pytest.mark.parametrize("x, m, expected", [(1, 9, 10), (3, 99, 11100)])
def test_shift_search(happy, x, m, expected):
    assert shift_witness(happy, x, m, 1, Strategy.SEARCH).witness == expected


def test_shift_depth_limit(happy, happy_atlas):
    with pytest.raises(DepthExceeded):
        shift_witness(happy, 2, 9, 3)
    # at r = 3 the run count is 11000 ones followed by two zeros, still a plain run
    trace = shift_witness(happy, 2, 9, 3, symbolic=True)
    assert trace.witness.runs[0].count == int("1" * 11000) * 100
    assert verify_witness(happy_atlas, trace).ok
    trace = shift_witness(happy, 2, 9, 4, symbolic=True)
    assert isinstance(trace.witness, OnesBlock)
    assert verify_witness(happy_atlas, trace).ok


def test_shift_needs_unit_digits():
    with pytest.raises(PremiseError):
        shift_witness(DigitMap(10, (0, 2) + HAPPY_TABLE[2:]), 1, 9, 1)


def test_preimage_search_smallest(happy_atlas):
    trace = congruent_u_preimage(happy_atlas, 1, 0)
    assert trace.witness == 1215
    happy_flags = oracles.u_integers(1, HAPPY_TABLE, 10, 1215)
    assert [l for l in range(81, 1216, 81) if happy_flags[l]] == [1215]


def test_preimage_construct_residue_five(happy, happy_atlas):
    trace = congruent_u_preimage(happy_atlas, 1, 5, strategy=Strategy.CONSTRUCT)
    l2 = trace.witness
    assert isinstance(l2, SparseNumber)
    assert l2.f_eval(happy) == trace.intermediates["l1"]
    assert l2.residue(81) == 5
    assert classify(happy_atlas, trace.intermediates["l1"], 1).is_u_integer
    assert trace.intermediates["chain_depth"] == 2


@pytest.mark.parametrize("a", range(0, 81, 4))
def test_preimage_construct_invariants(happy, happy_atlas, a):
    trace = congruent_u_preimage(happy_atlas, 1, a, strategy=Strategy.CONSTRUCT)
    im = trace.intermediates
    assert 0 <= im["r"] < 81
    assert im["l1"] > 81 * im["f_m_star"]
    assert im["l1"] - im["r"] * im["f_m_star"] >= 1
    assert trace.witness.f_eval(happy) == im["l1"]
    assert trace.witness.residue(81) == a
    assert pow(10, im["d"], 81) == 1


def test_preimage_base_two_returns_u():
    atlas = compute_atlas(DigitMap(2, (0, 1)))
    trace = congruent_u_preimage(atlas, 1, 0, strategy=Strategy.CONSTRUCT)
    assert trace.witness == 1


@pytest.mark.parametrize("h", [4, 16, 37, 58, 89, 145, 42, 20])
def test_preimage_chain_matches_target_phase(happy_atlas, h):
    for seed in ("u", "phase"):
        trace = congruent_u_preimage(happy_atlas, 4, 7, h, Strategy.CONSTRUCT, seed=seed)
        assert classify_value(happy_atlas, trace.witness, 4).phase == classify(happy_atlas, h, 4).phase
        assert verify_witness(happy_atlas, trace).ok


def test_preimage_chain_advances_phase(happy_atlas):
    trace = congruent_u_preimage(happy_atlas, 4, 3, 16, Strategy.CONSTRUCT, seed="u")
    w = trace.witness
    assert isinstance(w, DeepWitness)
    assert w.concrete_level == 3
    phases = [classify_value(happy_atlas, w.layer(j), 4).phase for j in range(1, w.concrete_level + 1)]
    assert phases == [(phases[0] + k) % 8 for k in range(len(phases))]


@pytest.mark.parametrize("x, expected", [(1, 31), (2, 68), (3, 7), (4, 19), (5, 23)])
def test_pair_search_happy(happy_atlas, x, expected):
    assert concurrent_pair(happy_atlas, 1, x).witness == expected
    flags = oracles.u_integers(1, HAPPY_TABLE, 10, expected + x)
    assert flags[expected] and flags[expected + x]
    assert not any(flags[l] and flags[l + x] for l in range(1, expected))


@pytest.mark.parametrize("x, expected", [(1, 4), (2, 9), (3, 11)])
def test_pair_search_eight_cycle(happy_atlas, x, expected):
    assert concurrent_pair(happy_atlas, 4, x).witness == expected


def test_pair_construct_first_fields(happy_atlas):
    im = concurrent_pair(happy_atlas, 1, 1, Strategy.CONSTRUCT).intermediates
    assert (im["s"], im["x1"], im["f_x1"]) == (1, 9, 81)
    assert im["f_x1"] % 81 == 0


@pytest.mark.parametrize("u, x", [(1, 1), (1, 4), (4, 1), (4, 2), (20, 5)])
def test_pair_construct_chain(happy, happy_atlas, u, x):
    trace = concurrent_pair(happy_atlas, u, x, Strategy.CONSTRUCT)
    im, l = trace.intermediates, trace.witness
    assert l.f_eval(happy) == im["h"]
    assert l.add_small(x).f_eval(happy) == im["N"]
    assert im["f_x2"] == im["f_x1"] + im["N"] - 1
    assert 1 <= im["k"] < im["t"] - im["s"]
    assert verify_witness(happy_atlas, trace).ok


def test_pair_budget(happy_atlas):
    with pytest.raises(BudgetExceeded):
        concurrent_pair(happy_atlas, 1, 1, budget=10)


def test_shift_all_base_two():
    atlas = compute_atlas(DigitMap(2, (0, 1)))
    assert shift_all_witness(atlas, 1).witness == 1


def test_shift_all_eight_cycle_scan(happy_atlas):
    trace = shift_all_witness(happy_atlas, 4)
    assert trace.witness == 1
    assert trace.intermediates["method"] == "scan"


@pytest.mark.parametrize("u, strategy", [(1, "search"), (1, "construct"), (4, "construct")])
def test_shift_all_induction(happy_atlas, u, strategy):
    trace = shift_all_witness(happy_atlas, u, strategy)
    assert trace.intermediates["method"] == "induction"
    for x in happy_atlas.D:
        from digitmap.symbolic import add_value

        assert classify_value(happy_atlas, add_value(trace.witness, x), u).is_u_integer
    assert verify_witness(happy_atlas, trace).ok


@pytest.mark.parametrize("u, n, expected", [(1, 2, 30), (1, 3, 1879), (1, 4, 7838), (4, 5, 1), (1, 1, 6)])
def test_run_search(happy_atlas, u, n, expected):
    assert consecutive_run(happy_atlas, u, n).witness == expected


@pytest.mark.parametrize("u", [1, 4])
@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_run_construct(happy_atlas, u, n):
    trace = consecutive_run(happy_atlas, u, n, Strategy.CONSTRUCT)
    report = verify_witness(happy_atlas, trace)
    assert report.ok, report.failures


def test_run_construct_with_constructed_shift(happy_atlas):
    trace = consecutive_run(happy_atlas, 4, 3, Strategy.CONSTRUCT, h_strategy=Strategy.CONSTRUCT)
    assert verify_witness(happy_atlas, trace).ok


def test_random_maps_end_to_end():
    rng = random.Random(99)
    for _ in range(4):
        fmap = random_premise_map(rng, base=rng.choice([3, 4, 5]))
        atlas = compute_atlas(fmap)
        for u in sorted({cyc[0] for cyc in atlas.cycles}):
            for strategy in Strategy:
                for trace in (
                    concurrent_pair(atlas, u, 1, strategy),
                    congruent_u_preimage(atlas, u, 1, strategy=strategy),
                    consecutive_run(atlas, u, 3, strategy),
                ):
                    report = verify_witness(atlas, trace)
                    assert report.ok, (fmap, u, trace.kind, report.failures)


def test_premises_required():
    atlas = compute_atlas(DigitMap(10, tuple(range(10))))
    with pytest.raises(PremiseError):
        consecutive_run(atlas, 1, 2)
