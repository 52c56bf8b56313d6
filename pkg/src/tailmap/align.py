"""Unit-cost edit distance between residue strings.

Two independent routes compute the same number:

* :func:`edit_distance_dp` fills the textbook O(mn) dynamic-programming
  table, one row at a time with numpy.
* :func:`edit_distance_bitparallel` runs Myers' bit-vector recurrence over
  64-bit words, chaining words for queries longer than 64 residues.  The
  kernels are compiled with numba and release the GIL, so callers can fan
  them out over a thread pool.

Characters are raw 8-bit codes.  An :class:`AlignConfig` may declare
unordered pairs of characters that count as matches (for example ``N``
with ``A``); pairs apply individually and are not closed transitively.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numba import njit

__all__ = [
    "AlignConfig",
    "AlignResult",
    "PackedSeqs",
    "Pattern",
    "distance_profile",
    "edit_distance_bitparallel",
    "edit_distance_dp",
]

_GLOBAL_MODES = {"NW", "GLOBAL"}
_RESERVED_MODES = {"SHW", "HW", "PREFIX", "INFIX"}

_ONE = np.uint64(1)
_HIGH = np.uint64(1 << 63)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)
_SIXTY_THREE = np.uint64(63)


def _normalize_pairs(pairs) -> frozenset:
    out = set()
    for pair in pairs:
        a, b = tuple(pair)
        if len(a) != 1 or len(b) != 1:
            raise ValueError(f"equality pair must hold two single characters, got {pair!r}")
        out.add(tuple(sorted((a, b))))
    return frozenset(out)


@dataclass(frozen=True)
class AlignConfig:
    """Alignment task description.

    ``max_distance`` of -1 means unbounded; a non-negative value turns the
    search into a k-bounded one that reports "not found" beyond k.
    """

    mode: str = "NW"
    max_distance: int = -1
    equalities: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        mode = self.mode.upper()
        if mode in _RESERVED_MODES:
            raise NotImplementedError(f"alignment mode {self.mode!r} is not supported")
        if mode not in _GLOBAL_MODES:
            raise ValueError(f"unknown alignment mode {self.mode!r}")
        if self.max_distance < -1:
            raise ValueError("max_distance must be >= -1")
        object.__setattr__(self, "mode", "NW")
        object.__setattr__(self, "equalities", _normalize_pairs(self.equalities))

    @property
    def bounded(self) -> bool:
        return self.max_distance >= 0


DEFAULT_CONFIG = AlignConfig()


@dataclass(frozen=True)
class AlignResult:
    distance: int | None

    @property
    def found(self) -> bool:
        return self.distance is not None

    def as_metric(self) -> float:
        """Distance as a float, with "not found" mapped to +inf."""
        return math.inf if self.distance is None else float(self.distance)


@lru_cache(maxsize=64)
def _match_tables(equalities: frozenset):
    eq = np.zeros((256, 256), dtype=np.uint8)
    np.fill_diagonal(eq, 1)
    has_partner = np.zeros(256, dtype=np.uint8)
    for a, b in equalities:
        ia, ib = _code_of(a), _code_of(b)
        eq[ia, ib] = eq[ib, ia] = 1
        if ia != ib:
            has_partner[ia] = has_partner[ib] = 1
    eq.setflags(write=False)
    has_partner.setflags(write=False)
    return eq, has_partner


def _code_of(ch: str) -> int:
    code = ord(ch)
    if code > 255:
        raise ValueError(f"character {ch!r} is not an 8-bit code")
    return code


def encode(seq: str | bytes) -> np.ndarray:
    if isinstance(seq, str):
        seq = seq.encode("latin-1")
    return np.frombuffer(seq, dtype=np.uint8)


# --------------------------------------------------------------------------
# Quadratic oracle
# --------------------------------------------------------------------------


def edit_distance_dp(a: str, b: str, config: AlignConfig = DEFAULT_CONFIG) -> AlignResult:
    """Levenshtein distance by the full DP table.

    Each row is computed from the previous one with vector operations; the
    in-row insertion chain ``D[i][j] = min(D[i][j], D[i][j-1] + 1)`` is a
    running minimum of ``D[i][k] - k`` shifted back by ``j``.
    """
    ea, eb = encode(a), encode(b)
    eq, _ = _match_tables(config.equalities)
    n = eb.shape[0]
    cols = np.arange(n + 1, dtype=np.int64)
    prev = cols.copy()
    cand = np.empty(n + 1, dtype=np.int64)
    for i, ca in enumerate(ea, start=1):
        cost = 1 - eq[ca, eb].astype(np.int64)
        cand[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=cand[1:])
        prev = np.minimum.accumulate(cand - cols) + cols
    d = int(prev[-1])
    if config.bounded and d > config.max_distance:
        return AlignResult(None)
    return AlignResult(d)


# --------------------------------------------------------------------------
# Bit-parallel kernels
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _build_peq(query, eq, has_partner):
    m = query.shape[0]
    words = max(1, (m + 63) // 64)
    peq = np.zeros((256, words), dtype=np.uint64)
    for i in range(m):
        q = query[i]
        w = i // 64
        bit = _ONE << np.uint64(i % 64)
        peq[q, w] |= bit
        if has_partner[q]:
            for c in range(256):
                if eq[q, c]:
                    peq[c, w] |= bit
    return peq


@njit(cache=True, nogil=True)
def _myers_global(peq, m, text, k):
    # Returns the global distance, or -1 when k >= 0 and the distance exceeds k.
    n = text.shape[0]
    if m == 0 or n == 0:
        d = m + n
        if k >= 0 and d > k:
            return -1
        return d
    if k >= 0 and abs(m - n) > k:
        return -1
    words = peq.shape[1]
    pv = np.full(words, _ALL, dtype=np.uint64)
    mv = np.zeros(words, dtype=np.uint64)
    last = words - 1
    last_bit = _ONE << (np.uint64(m - 1) & _SIXTY_THREE)
    score = m
    for j in range(n):
        c = text[j]
        hin = 1  # top row of a global alignment grows by one per column
        for b in range(words):
            eq = peq[c, b]
            p = pv[b]
            q = mv[b]
            xv = eq | q
            if hin < 0:
                eq |= _ONE
            xh = (((eq & p) + p) ^ p) | eq
            ph = q | ~(xh | p)
            mh = p & xh
            hb = last_bit if b == last else _HIGH
            hout = 0
            if ph & hb:
                hout = 1
            elif mh & hb:
                hout = -1
            ph <<= _ONE
            mh <<= _ONE
            if hin < 0:
                mh |= _ONE
            elif hin > 0:
                ph |= _ONE
            pv[b] = mh | ~(xv | ph)
            mv[b] = ph & xv
            hin = hout
        score += hin
        # the bottom row can drop by at most one per remaining column
        if k >= 0 and score - (n - 1 - j) > k:
            return -1
    return score


@njit(cache=True, nogil=True)
def _profile_range(peq, m, refs, offsets, lo, hi, k, out):
    for r in range(lo, hi):
        out[r] = _myers_global(peq, m, refs[offsets[r]:offsets[r + 1]], k)


@njit(cache=True, nogil=True)
def _argmin_range(peq, m, refs, offsets, lo, hi, k):
    # Lowest distance in [lo, hi), ties to the lowest ordinal; (-1, -1) if none within k.
    best = -1
    best_idx = -1
    bound = k
    for r in range(lo, hi):
        d = _myers_global(peq, m, refs[offsets[r]:offsets[r + 1]], bound)
        if d >= 0 and (best < 0 or d < best):
            best = d
            best_idx = r
            if d == 0:
                break
            bound = d - 1  # later references must be strictly better
    return best, best_idx


# --------------------------------------------------------------------------
# Python-facing wrappers
# --------------------------------------------------------------------------


class Pattern:
    """A query preprocessed into per-character match masks."""

    __slots__ = ("text", "length", "peq", "config")

    def __init__(self, query: str, config: AlignConfig = DEFAULT_CONFIG):
        eq, has_partner = _match_tables(config.equalities)
        codes = encode(query)
        self.text = query
        self.length = codes.shape[0]
        self.peq = _build_peq(codes, eq, has_partner)
        self.config = config

    def distance(self, target: str | np.ndarray) -> int | None:
        codes = target if isinstance(target, np.ndarray) else encode(target)
        d = _myers_global(self.peq, self.length, codes, self.config.max_distance)
        return None if d < 0 else int(d)


class PackedSeqs:
    """Reference strings concatenated into one byte buffer with offsets."""

    __slots__ = ("codes", "offsets")

    def __init__(self, seqs: Sequence[str]):
        lengths = np.fromiter((len(s) for s in seqs), dtype=np.int64, count=len(seqs))
        self.offsets = np.zeros(len(seqs) + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        self.codes = encode("".join(seqs))

    def __len__(self):
        return self.offsets.shape[0] - 1

    def profile(self, pattern: Pattern, lo: int = 0, hi: int | None = None, out=None) -> np.ndarray:
        hi = len(self) if hi is None else hi
        if out is None:
            out = np.empty(len(self), dtype=np.int64)
        _profile_range(pattern.peq, pattern.length, self.codes, self.offsets, lo, hi,
                       pattern.config.max_distance, out)
        return out

    def argmin(self, pattern: Pattern, lo: int, hi: int) -> tuple[int, int] | None:
        """(distance, ordinal) of the closest reference in ``[lo, hi)``."""
        best, idx = _argmin_range(pattern.peq, pattern.length, self.codes, self.offsets,
                                  lo, hi, pattern.config.max_distance)
        if idx < 0:
            return None
        return int(best), int(idx)


def edit_distance_bitparallel(a: str, b: str, config: AlignConfig = DEFAULT_CONFIG) -> AlignResult:
    """Edit distance of ``a`` and ``b`` via the blocked bit-vector recurrence."""
    return AlignResult(Pattern(a, config).distance(b))


def block_bounds(n: int, parts: int) -> list[tuple[int, int]]:
    """Contiguous ``[begin, end)`` slices, ``begin = t * n // parts``."""
    return [(t * n // parts, (t + 1) * n // parts) for t in range(parts)]


def distance_profile(query: str, refs: Sequence[str] | PackedSeqs,
                     config: AlignConfig = DEFAULT_CONFIG, threads: int = 1) -> list[float]:
    """Distance from ``query`` to every reference; out-of-bound entries are +inf."""
    packed = refs if isinstance(refs, PackedSeqs) else PackedSeqs(refs)
    if len(packed) == 0:
        raise ValueError("reference list is empty")
    pattern = Pattern(query, config)
    out = np.empty(len(packed), dtype=np.int64)
    if threads <= 1:
        packed.profile(pattern, out=out)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            jobs = [pool.submit(packed.profile, pattern, lo, hi, out)
                    for lo, hi in block_bounds(len(packed), threads) if hi > lo]
            for job in jobs:
                job.result()
    return [math.inf if d < 0 else float(d) for d in out]


def pairs_from_strings(items: Iterable[str]) -> frozenset:
    """Parse ``["NA", "RG"]``-style equality specs into character pairs."""
    items = list(items)
    bad = [s for s in items if len(s) != 2]
    if bad:
        raise ValueError(f"equality pairs must be two characters each, got {bad}")
    return _normalize_pairs((s[0], s[1]) for s in items)
