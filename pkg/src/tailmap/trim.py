"""PolyA tail trimming.

Every trimmer reports how many trailing residues form the tail; the trimmed
sequence is the prefix that remains.  Input is upper-cased first and only
``A`` counts as a tail residue.

Scored scans give +1 per ``A`` and -2 per other residue while walking the
sequence from its 3' end:

* ``classic`` keeps the best score among suffixes whose non-A fraction is at
  most 20%, filtering inside the loop.
* ``modified`` takes the unconstrained best score and applies the 20% check
  afterwards; for a suffix of length L with e errors, score = L - 3e, so
  ``e <= L/5`` is the same as ``score >= 0.4 L``.
* ``oracle`` enumerates every suffix explicitly (quadratic; for testing).

``regex`` removes the longest suffix matching
``A+ ([CTG]{0,3}A+ | A+[CTG]{0,3})+``.  ``changepoint`` picks the tail start
that maximizes a log-likelihood ratio of two biased-coin composition models
and keeps it only if it beats the no-tail model by the requested odds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyEvaluation, InvalidParams

__all__ = [
    "ChangepointParams",
    "EvalSummary",
    "SCAN_ALGORITHMS",
    "TrimAlgorithm",
    "TrimResult",
    "evaluate_against_ledger",
    "trim_changepoint",
    "trim_classic",
    "trim_modified",
    "trim_modified_cumsum",
    "trim_oracle",
    "trim_regex",
    "run_trimmer",
]


class TrimAlgorithm(str, Enum):
    CLASSIC = "classic"
    MODIFIED = "modified"
    REGEX = "regex"
    CHANGEPOINT = "changepoint"
    ORACLE = "oracle"


@dataclass(frozen=True)
class TrimResult:
    algorithm: TrimAlgorithm
    tail_length: int
    statistic: float

    def apply(self, seq: str) -> str:
        return seq[:len(seq) - self.tail_length]


@dataclass(frozen=True)
class ChangepointParams:
    p_tail: float = 0.9
    p_header: float = 0.25
    odds_threshold: float = 1000.0

    def __post_init__(self):
        if not 0.0 < self.p_header < self.p_tail < 1.0:
            raise InvalidParams(
                f"need 0 < p_header < p_tail < 1, got p_header={self.p_header}, p_tail={self.p_tail}")
        if not self.odds_threshold > 1.0:
            raise InvalidParams(f"odds_threshold must exceed 1, got {self.odds_threshold}")

    @property
    def weights(self) -> tuple[float, float]:
        """Per-residue log-likelihood ratio for an A and for anything else."""
        return (math.log(self.p_tail / self.p_header),
                math.log((1.0 - self.p_tail) / (1.0 - self.p_header)))


def trim_classic(seq: str) -> TrimResult:
    s = seq.upper()
    n = len(s)
    best_index = n
    best_score = score = errors = 0
    for i in range(n - 1, -1, -1):
        if s[i] == "A":
            score += 1
        else:
            score -= 2
            errors += 1
        if score > best_score and 5 * errors <= n - i:
            best_index = i
            best_score = score
    return TrimResult(TrimAlgorithm.CLASSIC, n - best_index, float(best_score))


def trim_modified(seq: str) -> TrimResult:
    s = seq.upper()
    n = len(s)
    best_index = n
    best_score = score = 0
    for i in range(n - 1, -1, -1):
        score += 1 if s[i] == "A" else -2
        if score > best_score:
            best_index = i
            best_score = score
    tail = n - best_index
    if 5 * best_score < 2 * tail:
        tail = 0
    return TrimResult(TrimAlgorithm.MODIFIED, tail, float(best_score))


def trim_modified_cumsum(seq: str) -> TrimResult:
    """:func:`trim_modified` as a reverse cumulative sum followed by argmax."""
    codes = np.frombuffer(seq.upper().encode("latin-1"), dtype=np.uint8)[::-1]
    if codes.size == 0:
        return TrimResult(TrimAlgorithm.MODIFIED, 0, 0.0)
    scores = np.cumsum(np.where(codes == ord("A"), 1, -2))
    k = int(np.argmax(scores))  # first maximum is the shortest suffix
    best = int(scores[k])
    if best <= 0:
        return TrimResult(TrimAlgorithm.MODIFIED, 0, 0.0)
    tail = k + 1
    if 5 * best < 2 * tail:
        tail = 0
    return TrimResult(TrimAlgorithm.MODIFIED, tail, float(best))


def trim_oracle(seq: str) -> TrimResult:
    """Brute force over all suffixes; ties go to the shorter suffix."""
    s = seq.upper()
    n = len(s)
    if n > 10_000:
        raise ValueError("trim_oracle is quadratic; refusing sequences over 10,000 residues")
    best_len, best_score = 0, 0
    for length in range(1, n + 1):
        suffix = s[n - length:]
        errors = sum(1 for c in suffix if c != "A")
        score = (length - errors) - 2 * errors
        if 5 * errors <= length and score > best_score:
            best_len, best_score = length, score
    return TrimResult(TrimAlgorithm.ORACLE, best_len, float(best_score))


# Reversed-grammar automaton for the regex trimmer.  Read right to left, the
# tail is (A+B{0,3} | B{0,3}A+)+ A+ with B in {C, T, G}.  States:
# S start, PA/PB1..3 inside an A+B{0,3} piece, QB1..3/QA inside B{0,3}A+,
# FA inside the closing A+ (accepting).
_S, _PA, _PB1, _PB2, _PB3, _QB1, _QB2, _QB3, _QA, _FA = range(10)
_COMPLETE = (_PA, _PB1, _PB2, _PB3, _QA)
_ON_A = {_S: (_PA, _QA), _PA: (_PA,), _QB1: (_QA,), _QB2: (_QA,), _QB3: (_QA,),
         _QA: (_QA,), _FA: (_FA,)}
_ON_B = {_S: (_QB1,), _PA: (_PB1,), _PB1: (_PB2,), _PB2: (_PB3,), _QB1: (_QB2,),
         _QB2: (_QB3,)}


def _step_table(own, after_piece):
    table = []
    for mask in range(1 << 10):
        nxt = 0
        for state in range(10):
            if mask >> state & 1:
                for t in own.get(state, ()):
                    nxt |= 1 << t
                if state in _COMPLETE:
                    for t in after_piece:
                        nxt |= 1 << t
        table.append(nxt)
    return tuple(table)


_NEXT_A = _step_table(_ON_A, (_PA, _QA, _FA))
_NEXT_B = _step_table(_ON_B, (_QB1,))
_ACCEPT = 1 << _FA


def trim_regex(seq: str) -> TrimResult:
    """Longest suffix in the 25%-A tail grammar, found in one right-to-left pass."""
    s = seq.upper()
    n = len(s)
    states = 1 << _S
    matched = 0
    next_a, next_b = _NEXT_A, _NEXT_B
    for i in range(n - 1, -1, -1):
        c = s[i]
        if c == "A":
            states = next_a[states]
        elif c == "C" or c == "G" or c == "T":
            states = next_b[states]
        else:
            break
        if not states:
            break
        if states & _ACCEPT:
            matched = n - i
    return TrimResult(TrimAlgorithm.REGEX, matched, float(matched))


def trim_changepoint(seq: str, params: ChangepointParams = ChangepointParams()) -> TrimResult:
    s = seq.upper()
    n = len(s)
    w_a, w_other = params.weights
    llr = best = 0.0
    start = n
    for i in range(n - 1, -1, -1):
        llr += w_a if s[i] == "A" else w_other
        if llr > best:
            best = llr
            start = i
    tail = n - start if best >= math.log(params.odds_threshold) else 0
    return TrimResult(TrimAlgorithm.CHANGEPOINT, tail, best)


SCAN_ALGORITHMS = (TrimAlgorithm.CLASSIC, TrimAlgorithm.MODIFIED, TrimAlgorithm.REGEX,
                   TrimAlgorithm.CHANGEPOINT)


def run_trimmer(algorithm: TrimAlgorithm | str, seq: str,
                params: ChangepointParams | None = None) -> TrimResult:
    algorithm = TrimAlgorithm(algorithm)
    if algorithm is TrimAlgorithm.CHANGEPOINT:
        return trim_changepoint(seq, params or ChangepointParams())
    return {
        TrimAlgorithm.CLASSIC: trim_classic,
        TrimAlgorithm.MODIFIED: trim_modified,
        TrimAlgorithm.REGEX: trim_regex,
        TrimAlgorithm.ORACLE: trim_oracle,
    }[algorithm](seq)


@dataclass(frozen=True)
class EvalSummary:
    algorithm: TrimAlgorithm
    count: int
    exact_match_rate: float
    mean_abs_error: float


def evaluate_against_ledger(results: Mapping[str, TrimResult | Iterable[TrimResult]],
                            ledger) -> dict[TrimAlgorithm, EvalSummary]:
    """Score predicted tail lengths against the simulated ones.

    ``results`` maps sequence id to one result or to several (one per
    algorithm).  Only ids present in both sides are scored.
    """
    truth = ledger.tail_lengths() if hasattr(ledger, "tail_lengths") else dict(ledger)
    errors: dict[TrimAlgorithm, list[int]] = {}
    for seq_id in sorted(results.keys() & truth.keys()):
        got = results[seq_id]
        for res in ([got] if isinstance(got, TrimResult) else got):
            errors.setdefault(TrimAlgorithm(res.algorithm), []).append(
                abs(res.tail_length - truth[seq_id]))
    if not errors:
        raise EmptyEvaluation("no sequence id is shared by the results and the ledger")
    return {
        alg: EvalSummary(alg, len(errs), sum(e == 0 for e in errs) / len(errs),
                         sum(errs) / len(errs))
        for alg, errs in errors.items()
    }
