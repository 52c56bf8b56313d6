import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import regex_tail, scored_suffixes
from tailmap.errors import EmptyEvaluation, InvalidParams
from tailmap.rng import DistributionSpec, TruncationWindow
from tailmap.seqio import ModificationLedger, SeqRecord, TailRecord
from tailmap.tailsim import TailingConfig, add_polyA
from tailmap.trim import (SCAN_ALGORITHMS, ChangepointParams, TrimAlgorithm, TrimResult, evaluate_against_ledger,
                          run_trimmer, trim_changepoint, trim_classic, trim_modified, trim_modified_cumsum,
                          trim_oracle, trim_regex)

SHORT_TAILED = "ACTGCAAAAAAAA"
ALL = list(SCAN_ALGORITHMS) + [TrimAlgorithm.ORACLE]
dna = st.text("ACGT", max_size=64)
dna_mixed = st.text("ACGTNacgt", max_size=64)


def binary_strings(max_len):
    for n in range(max_len + 1):
        for chars in itertools.product("AC", repeat=n):
            yield "".join(chars)


@pytest.mark.parametrize("algorithm", ALL)
def test_short_tailed_string(algorithm):
    res = run_trimmer(algorithm, SHORT_TAILED)
    assert res.tail_length == 8
    assert res.apply(SHORT_TAILED) == "ACTGC"


@pytest.mark.parametrize("algorithm", ALL)
def test_no_tail(algorithm):
    assert run_trimmer(algorithm, "CCCC").tail_length == 0
    assert run_trimmer(algorithm, "").tail_length == 0


def test_all_a():
    assert trim_classic("AAAA").tail_length == 4
    assert trim_classic("AAAA").apply("AAAA") == ""
    assert trim_modified("AAAA").tail_length == 4


def test_statistics():
    assert trim_classic(SHORT_TAILED).statistic == 8.0
    assert trim_modified(SHORT_TAILED).statistic == 8.0
    assert trim_regex(SHORT_TAILED).statistic == 8.0
    assert trim_changepoint(SHORT_TAILED).statistic == pytest.approx(8 * math.log(3.6), rel=1e-12)


def test_regex_examples():
    assert trim_regex("CCAA").tail_length == 2
    assert trim_regex("CA").tail_length == 0  # a single A is not a tail
    assert trim_regex("GAAACCCAA").tail_length == 8
    assert trim_regex("ANAA").tail_length == 2


def test_changepoint_examples():
    assert trim_changepoint("AAAAA").tail_length == 0
    assert trim_changepoint("AAAAA", ChangepointParams(odds_threshold=100)).tail_length == 5


def test_lowercase_input():
    assert trim_classic("actgcaaaaaaaa").tail_length == 8
    assert trim_regex("ccaa").tail_length == 2


@pytest.mark.parametrize("kwargs", [
    dict(p_tail=0.2, p_header=0.25),
    dict(p_tail=1.0),
    dict(p_header=0.0),
    dict(odds_threshold=1.0),
])
def test_changepoint_params_validation(kwargs):
    with pytest.raises(InvalidParams):
        ChangepointParams(**kwargs)


def test_oracle_refuses_long_input():
    with pytest.raises(ValueError):
        trim_oracle("A" * 10_001)


def test_classic_equals_oracle_exhaustive():
    # The scan only distinguishes A from non-A, so {A, C} covers every pattern.
    mismatches = [s for s in binary_strings(12) if trim_classic(s) != _as_classic(trim_oracle(s))]
    assert mismatches == []


def _as_classic(res):
    return TrimResult(TrimAlgorithm.CLASSIC, res.tail_length, res.statistic)


def test_oracle_against_suffix_enumeration():
    rng = random.Random(5)
    for _ in range(300):
        s = "".join(rng.choice("ACGT") for _ in range(rng.randint(0, 40)))
        eligible = [(score, -length) for length, errors, score in scored_suffixes(s) if 5 * errors <= length]
        best = max(eligible, default=(0, 0))
        expected = -best[1] if best[0] > 0 else 0
        assert trim_oracle(s).tail_length == expected


@settings(max_examples=500, deadline=None)
@given(dna)
def test_classic_equals_oracle_property(s):
    assert trim_classic(s).tail_length == trim_oracle(s).tail_length
    assert trim_classic(s).statistic == trim_oracle(s).statistic


def test_modified_divergence_class():
    divergent = 0
    for s in binary_strings(12):
        mod, orc = trim_modified(s), trim_oracle(s)
        if mod.tail_length == orc.tail_length:
            continue
        divergent += 1
        # the global-best suffix must fail the error filter while a weaker one passes
        assert mod.tail_length == 0
        best = max((score, -length, errors) for length, errors, score in scored_suffixes(s))
        assert 5 * best[2] > -best[1]
        assert orc.tail_length > 0
    assert divergent > 0


@settings(max_examples=500, deadline=None)
@given(dna_mixed)
def test_cumsum_equals_loop(s):
    assert trim_modified_cumsum(s) == trim_modified(s)


@settings(max_examples=300, deadline=None)
@given(dna_mixed, st.sampled_from(ALL))
def test_output_is_prefix(s, algorithm):
    res = run_trimmer(algorithm, s)
    assert 0 <= res.tail_length <= len(s)
    assert res.apply(s) == s[:len(s) - res.tail_length]


def test_regex_exhaustive_short():
    count = 0
    for n in range(9):
        for chars in itertools.product("ACGT", repeat=n):
            s = "".join(chars)
            assert trim_regex(s).tail_length == regex_tail(s), s
            count += 1
    assert count == sum(4**n for n in range(9))


@settings(max_examples=400, deadline=None)
@given(st.text("ACGTN", max_size=80))
def test_regex_matches_re_oracle(s):
    assert trim_regex(s).tail_length == regex_tail(s)


@settings(max_examples=400, deadline=None)
@given(dna)
def test_regex_suffix_composition(s):
    k = trim_regex(s).tail_length
    if k:
        suffix = s[len(s) - k:]
        assert k >= 2 and suffix[0] == "A"
        assert suffix.count("A") / k > 0.25


def llr_oracle(s, params):
    """Closed-form LLR for every start; shortest suffix wins ties."""
    w_a, w_b = params.weights
    s = s.upper()
    best, best_k = 0.0, len(s)
    for k in range(len(s) - 1, -1, -1):
        a = s[k:].count("A")
        value = a * w_a + (len(s) - k - a) * w_b
        if value > best:
            best, best_k = value, k
    return (len(s) - best_k if best >= math.log(params.odds_threshold) else 0), best


@settings(max_examples=400, deadline=None)
@given(dna, st.floats(0.3, 0.99), st.floats(0.01, 0.29), st.floats(1.5, 1e6))
def test_changepoint_matches_closed_form(s, p_tail, p_header, odds):
    params = ChangepointParams(p_tail, p_header, odds)
    tail, stat = llr_oracle(s, params)
    res = trim_changepoint(s, params)
    assert res.tail_length == tail
    assert res.statistic == pytest.approx(stat, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(dna, st.floats(1.5, 1e4), st.floats(1.0, 100.0))
def test_changepoint_scale_consistency(s, theta1, factor):
    theta2 = theta1 * factor
    r1 = trim_changepoint(s, ChangepointParams(odds_threshold=theta1))
    if not math.log(theta1) <= r1.statistic < math.log(theta2):
        assert trim_changepoint(s, ChangepointParams(odds_threshold=theta2)) == r1


def ledger_of(tails):
    spec = DistributionSpec("flat", (0.0, 1.0))
    return ModificationLedger({k: TailRecord(v, spec) for k, v in tails.items()})


def test_evaluate_perfect():
    results = {"a": TrimResult(TrimAlgorithm.CLASSIC, 3, 3.0), "b": TrimResult(TrimAlgorithm.CLASSIC, 5, 5.0)}
    summary = evaluate_against_ledger(results, ledger_of({"a": 3, "b": 5}))
    assert summary[TrimAlgorithm.CLASSIC].exact_match_rate == 1.0
    assert summary[TrimAlgorithm.CLASSIC].mean_abs_error == 0.0


def test_evaluate_zero_predictions():
    results = {k: TrimResult(TrimAlgorithm.REGEX, 0, 0.0) for k in "ab"}
    summary = evaluate_against_ledger(results, ledger_of({"a": 3, "b": 5}))
    assert summary[TrimAlgorithm.REGEX].mean_abs_error == 4.0
    assert summary[TrimAlgorithm.REGEX].exact_match_rate == 0.0


def test_evaluate_intersection_only():
    results = {"a": TrimResult(TrimAlgorithm.CLASSIC, 3, 3.0), "z": TrimResult(TrimAlgorithm.CLASSIC, 9, 9.0)}
    summary = evaluate_against_ledger(results, {"a": 3, "b": 1})
    assert summary[TrimAlgorithm.CLASSIC].count == 1


def test_evaluate_empty_intersection():
    with pytest.raises(EmptyEvaluation):
        evaluate_against_ledger({"x": TrimResult(TrimAlgorithm.CLASSIC, 0, 0.0)}, ledger_of({"a": 1}))


def test_classic_recovers_noiseless_tails():
    rng = random.Random(3)
    recs = [SeqRecord(f"s{i}", "".join(rng.choice("CGT") for _ in range(50))) for i in range(200)]
    cfg = TailingConfig(DistributionSpec("lognormal", (math.log(125), 1.0)), TruncationWindow(0.0, 250.0), 9)
    tailed, ledger = add_polyA(recs, cfg)
    results = {r.id: trim_classic(r.seq) for r in tailed}
    summary = evaluate_against_ledger(results, ledger)
    assert summary[TrimAlgorithm.CLASSIC].exact_match_rate == 1.0
