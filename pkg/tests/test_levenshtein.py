import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dodo import levenshtein as lev
from oracles import naive_distance, scan_within

words = st.text(alphabet="0123", min_size=0, max_size=10)


def random_word(rng, lo=1, hi=8, q=4):
    return lev.to_text(rng.integers(q, size=int(rng.integers(lo, hi + 1))))


@pytest.mark.parametrize(
    "s,t,d",
    [("0123", "0123", 0), ("0123", "013", 1), ("00", "11", 2), ("", "012", 3), ("0101", "1010", 2)],
)
def test_distance_examples(s, t, d):
    assert lev.distance(s, t) == d
    assert lev.distance(t, s) == d


def test_distance_matches_recursive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        s, t = random_word(rng, 0), random_word(rng, 0)
        assert lev.distance(s, t) == naive_distance(s, t)


@given(words, words, words)
@settings(max_examples=300, deadline=None)
def test_metric_axioms(s, t, u):
    d = lev.distance
    assert d(s, t) == d(t, s)
    assert (d(s, t) == 0) == (s == t)
    assert d(s, u) <= d(s, t) + d(t, u)
    assert d(s, t) >= abs(len(s) - len(t))


@pytest.mark.parametrize("bound", [0, 1, 2, 3])
def test_distance_at_most_agrees_with_distance(bound):
    rng = np.random.default_rng(bound)
    for _ in range(3000):
        s = random_word(rng, 0, 9)
        t = random_word(rng, 0, 9)
        d = lev.distance(s, t)
        got = lev.distance_at_most(s, t, bound)
        assert got == (d if d <= bound else None)


def test_distance_at_most_examples():
    assert lev.distance_at_most("0123", "0123", 0) == 0
    assert lev.distance_at_most("00", "11", 1) is None
    with pytest.raises(ValueError):
        lev.distance_at_most("0", "1", -1)


def test_invalid_symbols_rejected():
    with pytest.raises(ValueError):
        lev.distance("0124", "0")
    with pytest.raises(ValueError):
        lev.as_array("012", q=2)
    with pytest.raises(ValueError):
        lev.as_array("0" * 33)


def test_enumerate_sequences():
    seqs = list(lev.enumerate_sequences(2, 4))
    assert len(seqs) == 16 and seqs[0] == "00" and seqs[-1] == "33"
    assert seqs == sorted(seqs)
    assert list(lev.enumerate_sequences(1, 2)) == ["0", "1"]
    assert sum(1 for _ in lev.enumerate_sequences(7, 4)) == 4**7 == 16384
    with pytest.raises(lev.BudgetExceeded):
        next(lev.enumerate_sequences(13, 4))


def test_rank_roundtrip():
    rows = lev.all_sequences(5)
    codes = lev.arrays_to_codes(rows)
    assert np.array_equal(codes, np.arange(4**5))
    for c in (0, 17, 1023):
        assert lev.rank(lev.unrank(c, 5)) == c


def test_ball_binary_example():
    assert lev.ball("00", 1, 2, q=2) == {"00", "01", "10"}
    brute = {s for s in ("00", "01", "10", "11") if lev.distance("00", s) <= 1}
    assert lev.ball("00", 1, 2, q=2) == brute


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("r", [1, 2])
def test_ball_exhaustive_small(n, r):
    table = lev.all_sequences(n)
    for code in range(4**n):
        expect = scan_within(table[code], n, table, r)
        assert np.array_equal(lev.ball_codes(code, n, 4, r), expect)


def test_ball_contains_centre_and_uses_text():
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = random_word(rng, 6, 6)
        b1 = lev.ball(s, 1, 6)
        assert s in b1
        assert b1 <= lev.ball(s, 2, 6)
        assert all(lev.distance(s, t) <= 1 for t in b1)


def test_ball_random_n6_against_scan():
    table = lev.all_sequences(6)
    rng = np.random.default_rng(6)
    for code in rng.integers(4**6, size=200):
        assert np.array_equal(lev.ball_codes(int(code), 6, 4, 2), scan_within(table[code], 6, table, 2))


def test_ball_rejects_bad_radius():
    with pytest.raises(ValueError):
        lev.ball_codes(0, 4, 4, 3)


def test_apply_random_edit_is_one_edit():
    rng = np.random.default_rng(0)
    base = [random_word(rng, 1, 11) for _ in range(1000)]
    for i in range(100_000):
        s = base[i % len(base)]
        t = lev.apply_random_edit(s, rng)
        assert len(t) - len(s) in (-1, 0, 1)
        assert lev.distance(s, t) == 1


def test_apply_random_edit_reproducible():
    a = [lev.apply_random_edit("0123012", np.random.default_rng(5)) for _ in range(3)]
    assert len(set(a)) == 1


def test_apply_edit_validation():
    assert lev.apply_edit("012", lev.EditOp(lev.INSERTION, 3, 3)) == "0123"
    assert lev.apply_edit("012", lev.EditOp(lev.DELETION, 0)) == "12"
    assert lev.apply_edit("012", lev.EditOp(lev.SUBSTITUTION, 1, 3)) == "032"
    with pytest.raises(ValueError):
        lev.apply_edit("012", lev.EditOp(lev.SUBSTITUTION, 1, 1))
    with pytest.raises(ValueError):
        lev.apply_edit("012", lev.EditOp(lev.DELETION, 3))
    with pytest.raises(ValueError):
        lev.EditOp(lev.DELETION, 0, 2)


def test_batched_edits_are_single_edits():
    rng = np.random.default_rng(2)
    seqs = rng.integers(4, size=(20_000, 9)).astype(np.uint8)
    lens = np.full(seqs.shape[0], 9)
    out, out_lens = lev.random_edits(seqs, lens, rng)
    d = lev.pairwise_distances(seqs, lens, out, out_lens)
    assert np.all(d == 1)
    # all three kinds appear in roughly equal shares
    counts = np.bincount(out_lens - 8, minlength=3)
    assert np.all(np.abs(counts / counts.sum() - 1 / 3) < 0.02)


def test_channel_trivial_cases():
    s = "0123012301"
    assert lev.ids_channel(s, lev.ChannelConfig(seed=1)) == s
    assert lev.ids_channel(s, lev.ChannelConfig(p_del=1.0, seed=1)) == ""
    cfg = lev.ChannelConfig(p_sub=0.3, seed=4)
    assert lev.ids_channel(s, cfg) == lev.ids_channel(s, cfg)
    with pytest.raises(ValueError):
        lev.ChannelConfig(p_ins=0.6, p_del=0.6)


def test_channel_mean_length():
    s = "0123012301" * 2
    cfg = lev.ChannelConfig(p_ins=0.1, p_del=0.05, p_sub=0.05)
    rng = np.random.default_rng(9)
    lengths = np.array([len(lev.ids_channel(s, cfg, rng)) for _ in range(10_000)])
    expected = len(s) * (1 + cfg.p_ins - cfg.p_del)
    se = lengths.std(ddof=1) / np.sqrt(lengths.size)
    assert abs(lengths.mean() - expected) < 3 * se
