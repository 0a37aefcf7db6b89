import csv
import io
import math

import numpy as np
import pytest

from dodo import codebook as C
from dodo import levenshtein as lev
from dodo import model as M
from dodo import rates
from dodo.decoder import SegmentDecoder
from dodo.transmission import bits_per_segment, decode_exact, pack, resegment, simulate, transmit, unpack


def test_reference_rate_formula():
    n = 8
    # log2 8 = 3, log2 log2 8 = log2 3
    assert rates.reference_redundancy(n, 1.0) == pytest.approx(3 + math.log2(3) + 1)
    assert rates.reference_rate(n, 2.0) == pytest.approx(1 - (5 + math.log2(3)) / 16)


def test_rate_row_with_published_sizes():
    rows = rates.rate_table(rates.PAPER_MAX_SIZES)
    assert rows[-1].rate == pytest.approx(0.689, abs=1e-3)
    assert all(a.rate < b.rate for a, b in zip(rows, rows[1:]))
    for r in rows:
        assert r.refs["c1"] > r.rate > r.refs["c2"]
        assert abs(r.gap_log3) < 0.005


def test_rows_to_csv():
    text = rates.rows_to_csv(rates.rate_table({7: 260, 8: 820}, "test"))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [int(r["n"]) for r in rows] == [7, 8]
    assert float(rows[0]["rate"]) == pytest.approx(math.log(260, 4) / 7, abs=1e-6)
    assert rows[1]["source"] == "test"
    assert set(rows[0]) == {"n", "size", "rate", "ref_c1", "ref_clog3", "ref_c2", "ref_c7", "gap_clog3", "source"}


@pytest.fixture(scope="module")
def decoder():
    cb = C.random_search(7, 0)
    params = M.init_params(M.ModelConfig(m=8, layers=2, channels=8, max_len=9), np.random.default_rng(0))
    return SegmentDecoder(cb, params)


def test_pack_unpack_roundtrip(decoder):
    cb = decoder.codebook
    b = bits_per_segment(cb)
    assert b == int(math.log2(len(cb)))
    bits = np.random.default_rng(0).integers(2, size=b * 6).astype(np.uint8)
    stream, idx = pack(bits, cb)
    assert len(stream) == 7 * 6
    assert decode_exact(stream, cb) == idx
    assert np.array_equal(unpack(idx, cb), bits)
    with pytest.raises(ValueError):
        pack(bits[:-1], cb)


def test_clean_channel_always_succeeds(decoder):
    clean = lev.ChannelConfig(0.0, 0.0, 0.0, seed=1)
    report = simulate(decoder, clean, messages=20, segments=4, k=len(decoder.codebook))
    assert report["message_success_rate"] == 1.0
    assert report["segment_success_rate"] == 1.0
    assert len(report["transcript"]) == 5


def test_substitutions_never_shift_boundaries(decoder):
    cb = decoder.codebook
    rng = np.random.default_rng(2)
    for _ in range(30):
        idx = rng.integers(2 ** bits_per_segment(cb), size=4)
        words = []
        for i in idx:
            w = C.encode(cb, int(i))
            pos = int(rng.integers(7))
            sym = (int(w[pos]) + int(rng.integers(1, 4))) % 4
            words.append(lev.apply_edit(w, lev.EditOp(lev.SUBSTITUTION, pos, sym)))
        assert resegment("".join(words), 4, decoder, len(cb)) == list(idx)


def test_one_edit_per_segment_mostly_recovered(decoder):
    # without markers a shifted boundary can explain the stream equally well
    cb = decoder.codebook
    rng = np.random.default_rng(2)
    ok = 0
    for _ in range(100):
        idx = rng.integers(2 ** bits_per_segment(cb), size=4)
        words = [lev.apply_random_edit(C.encode(cb, int(i)), rng) for i in idx]
        ok += resegment("".join(words), 4, decoder, len(cb)) == list(idx)
    assert ok >= 70


def test_transmit_reports_failures(decoder):
    noisy = lev.ChannelConfig(0.05, 0.05, 0.05, seed=3)
    rng = np.random.default_rng(3)
    b = bits_per_segment(decoder.codebook)
    t = transmit(rng.integers(2, size=b * 3).astype(np.uint8), decoder, noisy, rng, k=len(decoder.codebook))
    assert len(t.decoded_indices) == 3
    assert t.success == (t.recovered_bits is not None and np.array_equal(t.recovered_bits, t.bits))
