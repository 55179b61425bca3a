"""Range classification and maximal runs of consecutive u-integers.

The sieve keeps a memo of eventual-cycle indices for every n up to
max(T, cap).  Anything larger is one digit-map step away from the memo
because f(n) < n above T and f grows only with the digit count.  Scans are
split into chunks that run on a thread pool (numpy releases the GIL in the
heavy loops) and are merged back in order, so results never depend on the
number of workers.
"""

from __future__ import annotations

import csv
import json
import os
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import IO

import numpy as np

from .core import CycleAtlas

DEFAULT_CAP = 10**6
DEFAULT_CHUNK = 1 << 18


@dataclass(frozen=True)
class RunRecord:
    u: int
    start: int
    length: int
    clipped: bool = False

    @property
    def stop(self) -> int:
        """One past the last member."""
        return self.start + self.length

    def to_json(self) -> dict[str, int | bool]:
        return asdict(self)


def default_threads() -> int:
    env = os.environ.get("DIGITMAP_THREADS")
    if env:
        return max(1, int(env))
    return 1


class Sieve:
    def __init__(self, atlas: CycleAtlas, cap: int = DEFAULT_CAP, chunk: int = DEFAULT_CHUNK):
        self.atlas = atlas
        self.map = atlas.map
        self.chunk = chunk
        self.limit = max(atlas.threshold, cap)
        self.memo = self._build_memo()

    def _build_memo(self) -> np.ndarray:
        T = self.atlas.threshold
        n = np.arange(self.limit + 1, dtype=np.int64)
        nxt = self.map.eval_array(n)
        nxt[: T + 1] = n[: T + 1]
        fvals = nxt.copy()
        # every value above T strictly decreases under f, so this terminates
        while True:
            high = nxt > T
            if not high.any():
                break
            nxt[high] = fvals[nxt[high]]
        return np.asarray(self.atlas.cycle_table, dtype=np.int32)[nxt]

    def cycle_index(self, n: int) -> int:
        while n > self.limit:
            n = self.map.eval(n)
        return int(self.memo[n])

    def _classify_chunk(self, lo: int, hi: int) -> np.ndarray:
        if hi <= self.limit:
            return self.memo[lo : hi + 1].copy()
        if hi < 2**62:
            vals = np.arange(lo, hi + 1, dtype=np.int64)
            out = np.empty(len(vals), dtype=np.int32)
            inside = vals <= self.limit
            out[inside] = self.memo[vals[inside]]
            images = self.map.eval_array(vals[~inside])
            if images.size and images.max() <= self.limit:
                out[~inside] = self.memo[images]
            else:
                out[~inside] = [self.cycle_index(int(v)) for v in images]
            return out
        return np.fromiter((self.cycle_index(n) for n in range(lo, hi + 1)), dtype=np.int32, count=hi - lo + 1)

    def _chunks(self, lo: int, hi: int) -> list[tuple[int, int]]:
        return [(a, min(a + self.chunk - 1, hi)) for a in range(lo, hi + 1, self.chunk)]

    def _iter_chunks(self, lo: int, hi: int, threads: int) -> Iterator[tuple[int, np.ndarray]]:
        spans = self._chunks(lo, hi)
        if threads <= 1 or len(spans) == 1:
            for a, b in spans:
                yield a, self._classify_chunk(a, b)
            return
        window = 4 * threads  # bounded look-ahead so early exits stay cheap
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i in range(0, len(spans), window):
                batch = spans[i : i + window]
                # map preserves submission order, which keeps the merge deterministic
                yield from zip((a for a, _ in batch), pool.map(lambda s: self._classify_chunk(*s), batch))

    def classify_range(self, lo: int, hi: int, threads: int = 1) -> np.ndarray:
        """Cycle index of each n in [lo, hi] (-1 where the orbit reaches 0)."""
        if not 0 <= lo <= hi:
            raise ValueError(f"need 0 <= lo <= hi, got [{lo}, {hi}]")
        parts = [arr for _, arr in self._iter_chunks(lo, hi, threads)]
        return np.concatenate(parts)

    def iter_runs(self, u: int, bound: int, min_len: int = 1, threads: int = 1, lo: int = 1) -> Iterator[RunRecord]:
        """Maximal runs of u-integers in [lo, bound], streamed in ascending order.

        A run touching either end of the scanned window is marked clipped,
        except at lo = 1 since 0 is never a u-integer.
        """
        if bound < lo:
            return
        idx = self.atlas.locate(u)[0]
        open_start: int | None = None
        for a, cls in self._iter_chunks(lo, bound, threads):
            edges = np.diff(np.concatenate(([0], (cls == idx).astype(np.int8), [0])))
            spans = zip(np.flatnonzero(edges == 1).tolist(), np.flatnonzero(edges == -1).tolist())
            for s, e in spans:
                start = a + s
                if open_start is not None:
                    if s == 0:
                        start = open_start
                    else:
                        yield from self._emit(u, open_start, a, lo, bound, min_len)
                    open_start = None
                if e == len(cls):
                    open_start = start  # may continue into the next chunk
                else:
                    yield from self._emit(u, start, a + e, lo, bound, min_len)
            if open_start is not None and open_start < a and cls[0] != idx:
                yield from self._emit(u, open_start, a, lo, bound, min_len)
                open_start = None
        if open_start is not None:
            yield from self._emit(u, open_start, bound + 1, lo, bound, min_len)

    @classmethod
    def _emit(cls, u: int, start: int, stop: int, lo: int, bound: int, min_len: int) -> Iterator[RunRecord]:
        if stop - start >= min_len:
            yield cls._record(u, start, stop, lo, bound)

    @staticmethod
    def _record(u: int, start: int, stop: int, lo: int, bound: int) -> RunRecord:
        clipped = stop > bound or (start == lo and lo > 1)
        return RunRecord(u, start, stop - start, clipped)

    def find_runs(self, u: int, bound: int, min_len: int = 1, threads: int = 1) -> list[RunRecord]:
        return list(self.iter_runs(u, bound, min_len, threads))

    def first_run_of_length(self, u: int, m: int, budget: int = 10**7, threads: int = 1) -> RunRecord | None:
        """Earliest run of at least ``m`` u-integers starting in [1, budget], or None."""
        if m < 1:
            raise ValueError("m must be positive")
        for rec in self.iter_runs(u, budget + m - 1, m, threads):
            if rec.start > budget:
                break
            return rec
        return None


def write_jsonl(records: Iterable[RunRecord], fp: IO[str]) -> int:
    count = 0
    for rec in records:
        fp.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
        count += 1
    return count


def write_csv(records: Iterable[RunRecord], fp: IO[str]) -> int:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["u", "start", "length", "clipped"])
    count = 0
    for rec in records:
        writer.writerow([rec.u, rec.start, rec.length, int(rec.clipped)])
        count += 1
    return count


def classify_range(atlas: CycleAtlas, lo: int, hi: int, threads: int = 1) -> np.ndarray:
    return Sieve(atlas, cap=min(DEFAULT_CAP, hi)).classify_range(lo, hi, threads)


def find_runs(atlas: CycleAtlas, u: int, bound: int, min_len: int = 1, threads: int = 1) -> list[RunRecord]:
    return Sieve(atlas, cap=min(DEFAULT_CAP, bound)).find_runs(u, bound, min_len, threads)


def first_run_of_length(atlas: CycleAtlas, u: int, m: int, budget: int = 10**7, threads: int = 1) -> RunRecord | None:
    return Sieve(atlas).first_run_of_length(u, m, budget, threads)
