"""End-to-end demo: messages packed into codeword segments sent over an IDS channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import levenshtein as lev
from .codebook import Codebook, decode_index, encode
from .decoder import SegmentDecoder


@dataclass
class Transmission:
    bits: np.ndarray
    sent: str
    received: str
    sent_indices: list[int]
    decoded_indices: list[int | None]
    recovered_bits: np.ndarray | None

    @property
    def segments_ok(self) -> int:
        return sum(a == b for a, b in zip(self.sent_indices, self.decoded_indices))

    @property
    def success(self) -> bool:
        return self.recovered_bits is not None and np.array_equal(self.recovered_bits, self.bits)


def bits_per_segment(cb: Codebook) -> int:
    if len(cb) < 2:
        raise ValueError("need at least two codewords")
    return int(np.floor(np.log2(len(cb))))


def pack(bits: np.ndarray, cb: Codebook) -> tuple[str, list[int]]:
    b = bits_per_segment(cb)
    if bits.size % b:
        raise ValueError(f"message length must be a multiple of {b} bits")
    weights = 1 << np.arange(b - 1, -1, -1)
    idx = [int(chunk @ weights) for chunk in bits.reshape(-1, b)]
    return "".join(encode(cb, i) for i in idx), idx


def unpack(indices: list[int], cb: Codebook) -> np.ndarray:
    b = bits_per_segment(cb)
    return np.array([(i >> (b - 1 - j)) & 1 for i in indices for j in range(b)], dtype=np.uint8)


FAIL_COST = 3  # an undecodable window costs more than any single edit


def resegment(received: str, count: int, dec: SegmentDecoder, k: int = 4) -> list[int | None]:
    """Split the received stream into ``count`` windows of length n-1, n or n+1.

    Picks the split minimising the summed edit distance between each window
    and its decoded codeword, an undecodable window costing ``FAIL_COST``.
    Ties prefer length-n windows earlier in the stream. Falls back to
    :func:`resegment_greedy` when no split covers the stream exactly.
    """
    n, total = dec.n, len(received)
    if not (n - 1) * count <= total <= (n + 1) * count:
        return resegment_greedy(received, count, dec, k)
    cache: dict[tuple[int, int], tuple[int, int | None]] = {}

    def window(pos: int, w: int) -> tuple[int, int | None]:
        if (pos, w) not in cache:
            chunk = received[pos : pos + w]
            res = dec.correct(chunk, k)
            cache[pos, w] = (0 if res.codeword == chunk else 1, res.index) if res.corrected else (FAIL_COST, None)
        return cache[pos, w]

    # best[j][pos]: ((cost, window ranks), decoded indices) for j segments ending at pos
    best: list[dict[int, tuple[tuple, tuple]]] = [{0: ((0, ()), ())}]
    for j in range(count):
        nxt: dict[int, tuple[tuple, tuple]] = {}
        remaining = count - j - 1
        for pos, ((cost, ranks), idxs) in best[j].items():
            for rank, w in enumerate((n, n - 1, n + 1)):
                end = pos + w
                if not (n - 1) * remaining <= total - end <= (n + 1) * remaining:
                    continue
                c, idx = window(pos, w)
                key = (cost + c, ranks + (rank,))
                if end not in nxt or key < nxt[end][0]:
                    nxt[end] = (key, idxs + (idx,))
        best.append(nxt)
    return list(best[count][total][1])


def resegment_greedy(received: str, count: int, dec: SegmentDecoder, k: int = 4) -> list[int | None]:
    """Left-to-right split for streams whose length rules out an exact split.

    At each cursor the windows of length n, n-1 and n+1 are tried. A window
    whose decoded codeword matches exactly wins outright; otherwise the
    first decodable window is taken, preferring one after which the next
    length-n window also decodes. Undecodable positions advance by n.
    """
    n = dec.n
    out: list[int | None] = []
    pos = 0
    for seg_no in range(count):
        last = seg_no == count - 1
        windows = [len(received) - pos] if last else [n, n - 1, n + 1]
        options = []
        for w in windows:
            if w < 1 or pos + w > len(received) or abs(w - n) > 1:
                continue
            chunk = received[pos : pos + w]
            res = dec.correct(chunk, k)
            if res.corrected:
                exact = res.codeword == chunk
                ahead = True
                if not last and pos + w + n <= len(received):
                    ahead = dec.correct(received[pos + w : pos + w + n], k).corrected
                options.append((not exact, not ahead, windows.index(w), w, res.index))
        if options:
            _, _, _, w, idx = min(options)
            out.append(idx)
            pos += w
        else:
            out.append(None)
            pos += n
    return out


RESYNC = {"optimal": resegment, "greedy": resegment_greedy}


def transmit(
    bits: np.ndarray,
    dec: SegmentDecoder,
    channel: lev.ChannelConfig,
    rng: np.random.Generator,
    k: int = 4,
    resync: str = "optimal",
) -> Transmission:
    cb = dec.codebook
    sent, idx = pack(bits, cb)
    received = lev.ids_channel(sent, channel, rng, cb.q)
    split = RESYNC[resync]
    decoded = split(received, len(idx), dec, k)
    recovered = None if any(i is None for i in decoded) else unpack(decoded, cb)
    return Transmission(bits, sent, received, idx, decoded, recovered)


def simulate(
    dec: SegmentDecoder,
    channel: lev.ChannelConfig,
    messages: int,
    segments: int,
    k: int = 4,
    resync: str = "optimal",
) -> dict:
    """Monte-Carlo success rates over random messages of ``segments`` codewords each."""
    rng = np.random.default_rng(channel.seed)
    b = bits_per_segment(dec.codebook)
    ok_msgs = ok_segs = 0
    transcript = []
    for m in range(messages):
        bits = rng.integers(2, size=b * segments).astype(np.uint8)
        t = transmit(bits, dec, channel, rng, k, resync)
        ok_msgs += t.success
        ok_segs += t.segments_ok
        if m < 5:
            transcript.append(
                {
                    "sent": t.sent,
                    "received": t.received,
                    "decoded": t.decoded_indices,
                    "expected": t.sent_indices,
                    "success": t.success,
                }
            )
    return {
        "messages": messages,
        "segments_per_message": segments,
        "resync": resync,
        "bits_per_segment": b,
        "message_success_rate": ok_msgs / messages,
        "segment_success_rate": ok_segs / (messages * segments),
        "transcript": transcript,
    }


def decode_exact(received: str, cb: Codebook) -> list[int]:
    """Decode a noise-free stream by fixed-width splitting (reference for tests)."""
    n = cb.n
    return [decode_index(cb, received[i : i + n]) for i in range(0, len(received), n)]
