import io
import json
import random

import numpy as np
import pytest

import oracles
from conftest import HAPPY_TABLE
from digitmap import DigitMap, compute_atlas
from digitmap.sieve import RunRecord, Sieve, find_runs, first_run_of_length, write_csv, write_jsonl


@pytest.fixture(scope="module")
def sieve(happy_atlas):
    return Sieve(happy_atlas)


def oracle_cycle_index(atlas, n: int) -> int:
    cyc = oracles.floyd_cycle(n, atlas.map.table, atlas.map.base)
    return atlas.cycles.index(cyc) if cyc in atlas.cycles else -1


def test_classify_small_range(sieve):
    assert sieve.classify_range(1, 7).tolist() == [0, 1, 1, 1, 1, 1, 0]
    assert sieve.classify_range(1, 1).tolist() == [0]


def test_classify_above_threshold(sieve, happy_atlas):
    T = happy_atlas.threshold
    got = sieve.classify_range(T + 1, T + 100).tolist()
    assert got == [oracle_cycle_index(happy_atlas, n) for n in range(T + 1, T + 101)]


def test_classify_matches_oracle(sieve, happy_atlas):
    got = sieve.classify_range(1, 100_000)
    want = [oracle_cycle_index(happy_atlas, n) for n in range(1, 100_001)]
    assert got.tolist() == want


def test_classify_beyond_memo(happy_atlas):
    small = Sieve(happy_atlas, cap=0, chunk=1000)
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randrange(10**12)
        assert small.classify_range(n, n + 3).tolist() == [oracle_cycle_index(happy_atlas, m) for m in range(n, n + 4)]
    huge = 10**40 + 17
    assert small.cycle_index(huge) == oracle_cycle_index(happy_atlas, huge)


def test_random_maps_sampled(random_maps):
    rng = random.Random(4)
    for fmap in random_maps:
        atlas = compute_atlas(fmap)
        sv = Sieve(atlas, cap=10**5)
        for n in (rng.randint(1, 10**9) for _ in range(500)):
            assert sv.cycle_index(n) == oracle_cycle_index(atlas, n)


def test_find_runs_examples(sieve):
    assert sieve.find_runs(1, 100, 2) == [RunRecord(1, 31, 2)]
    assert sieve.find_runs(1, 10**4, 3)[0] == RunRecord(1, 1880, 3)
    assert sieve.find_runs(4, 10, 5) == [RunRecord(4, 2, 5)]


def test_find_runs_match_oracle(sieve):
    flags = oracles.u_integers(1, HAPPY_TABLE, 10, 100_000)
    for min_len in (1, 2, 3, 4):
        got = [(r.start, r.length) for r in sieve.find_runs(1, 100_000, min_len)]
        assert got == oracles.runs(flags, min_len)
    assert len(sieve.find_runs(1, 100_000, 3)) == 82


def test_runs_are_maximal(sieve, happy_atlas):
    for rec in sieve.find_runs(4, 50_000, 3):
        assert all(happy_atlas.is_u_integer(n, 4) for n in range(rec.start, rec.stop))
        assert not happy_atlas.is_u_integer(rec.start - 1, 4)
        assert rec.clipped or not happy_atlas.is_u_integer(rec.stop, 4)


def test_clipped_flag(sieve):
    assert sieve.find_runs(1, 31, 1)[-1] == RunRecord(1, 31, 1, clipped=True)
    assert sieve.find_runs(1, 32, 2) == [RunRecord(1, 31, 2, clipped=True)]
    assert sieve.find_runs(1, 33, 2) == [RunRecord(1, 31, 2, clipped=False)]


@pytest.mark.parametrize("chunk", [1, 2, 5, 97, 4096])
def test_chunking_does_not_matter(happy_atlas, sieve, chunk):
    sv = Sieve(happy_atlas, cap=100, chunk=chunk)
    assert sv.find_runs(4, 3000, 2) == sieve.find_runs(4, 3000, 2)


def test_thread_count_does_not_matter(happy_atlas):
    sv = Sieve(happy_atlas, chunk=10_000)
    runs = {t: sv.find_runs(1, 300_000, 2, threads=t) for t in (1, 2, 8)}
    assert runs[1] == runs[2] == runs[8]
    arrays = {t: sv.classify_range(1, 300_000, threads=t) for t in (1, 2, 8)}
    assert arrays[1].tobytes() == arrays[2].tobytes() == arrays[8].tobytes()


@pytest.mark.parametrize("u, m, start", [(1, 1, 1), (1, 2, 31), (4, 2, 2), (1, 3, 1880)])
def test_first_run(sieve, u, m, start):
    assert sieve.first_run_of_length(u, m).start == start


def test_first_run_budget(sieve):
    assert sieve.first_run_of_length(1, 2, budget=30) is None
    assert sieve.first_run_of_length(1, 2, budget=31).start == 31


def test_digit_sum_has_no_pairs():
    atlas = compute_atlas(DigitMap(10, tuple(range(10))))
    sv = Sieve(atlas, cap=10**5)
    for u in range(1, 10):
        assert sv.find_runs(u, 10**5, 2) == []


def test_module_level_helpers(happy_atlas):
    assert find_runs(happy_atlas, 1, 100, 2) == [RunRecord(1, 31, 2)]
    assert first_run_of_length(happy_atlas, 4, 2).start == 2
    arr = Sieve(happy_atlas, cap=10).classify_range(1, 20)
    assert isinstance(arr, np.ndarray)


def test_output_formats(sieve):
    records = sieve.find_runs(1, 10**4, 3)[:2]
    buf = io.StringIO()
    assert write_jsonl(records, buf) == 2
    lines = buf.getvalue().splitlines()
    assert json.loads(lines[0]) == {"u": 1, "start": 1880, "length": 3, "clipped": False}
    buf = io.StringIO()
    write_csv(records, buf)
    assert buf.getvalue().splitlines()[:2] == ["u,start,length,clipped", "1,1880,3,0"]
