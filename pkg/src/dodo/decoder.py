"""Segment correction: exact K-d tree search in embedding space plus Levenshtein double check."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import levenshtein as lev
from .codebook import Codebook
from .model import ModelParams, embed_batch, embed_many

LEAF_SIZE = 16
# the decoder embeds in float32: same ranking up to ~1e-6, 2-3x cheaper than float64
INFER_DTYPE = np.float32


@dataclass(frozen=True)
class KdTree:
    """Static K-d tree; node ``i`` is a leaf when ``left[i] < 0``.

    ``perm[start[i]:stop[i]]`` lists the point indices under node ``i``;
    ``lo``/``hi`` are the node's bounding box, used as the pruning bound.
    """

    points: np.ndarray
    perm: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    stop: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    leaf_size: int

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def build_tree(embeddings, leaf_size: int = LEAF_SIZE) -> KdTree:
    """Median split on the axis of widest spread, recursively, down to ``leaf_size``."""
    pts = np.ascontiguousarray(embeddings, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("build_tree needs a nonempty (count, m) array")
    if leaf_size < 1:
        raise ValueError("leaf_size must be >= 1")
    perm = np.arange(pts.shape[0], dtype=np.int64)
    left, right, start, stop, lo, hi = [], [], [], [], [], []

    def node(a: int, b: int) -> int:
        idx = len(left)
        sub = pts[perm[a:b]]
        left.append(-1)
        right.append(-1)
        start.append(a)
        stop.append(b)
        lo.append(sub.min(axis=0))
        hi.append(sub.max(axis=0))
        spread = hi[idx] - lo[idx]
        if b - a <= leaf_size or spread.max() <= 0:
            return idx
        axis = int(np.argmax(spread))
        mid = (b - a) // 2
        seg = perm[a:b]
        perm[a:b] = seg[np.argsort(pts[seg, axis], kind="stable")]
        left[idx] = node(a, a + mid)
        right[idx] = node(a + mid, b)
        return idx

    node(0, pts.shape[0])
    return KdTree(
        pts,
        perm,
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(start, dtype=np.int64),
        np.array(stop, dtype=np.int64),
        np.array(lo),
        np.array(hi),
        leaf_size,
    )


@nb.njit(cache=True, nogil=True)
def _box_dist(v, lo, hi, bound):
    """Squared distance from ``v`` to a box, or a partial sum already above ``bound``."""
    s = 0.0
    for j in range(v.size):
        if v[j] < lo[j]:
            t = lo[j] - v[j]
            s += t * t
        elif v[j] > hi[j]:
            t = v[j] - hi[j]
            s += t * t
        if (j & 7) == 7 and s > bound:
            return s
    return s


@nb.njit(cache=True, nogil=True)
def _sqdist_bounded(a, b, bound):
    """Squared distance, or any partial sum already above ``bound``.

    Partial sums never decrease, so an early return is always > bound and
    the point could not have entered the result anyway.
    """
    s = 0.0
    for j in range(a.size):
        t = a[j] - b[j]
        s += t * t
        if (j & 7) == 7 and s > bound:
            return s
    return s


@nb.njit(cache=True, nogil=True)
def _before(d1, i1, d2, i2):
    return d1 < d2 or (d1 == d2 and i1 < i2)


@nb.njit(cache=True, nogil=True)
def _knn_one(points, perm, left, right, start, stop, lo, hi, v, k, out_i, out_d):
    for t in range(k):
        out_d[t] = np.inf
        out_i[t] = -1
    stack = np.empty(128, dtype=np.int64)
    bounds = np.empty(128)
    sp = 0
    stack[0] = 0
    bounds[0] = 0.0
    sp = 1
    while sp > 0:
        sp -= 1
        nd = stack[sp]
        if bounds[sp] > out_d[k - 1]:
            continue
        if left[nd] < 0:
            for p in range(start[nd], stop[nd]):
                i = perm[p]
                d = _sqdist_bounded(points[i], v, out_d[k - 1])
                if _before(d, i, out_d[k - 1], out_i[k - 1]):
                    pos = k - 1
                    while pos > 0 and _before(d, i, out_d[pos - 1], out_i[pos - 1]):
                        out_d[pos] = out_d[pos - 1]
                        out_i[pos] = out_i[pos - 1]
                        pos -= 1
                    out_d[pos] = d
                    out_i[pos] = i
            continue
        a = left[nd]
        b = right[nd]
        worst = out_d[k - 1]
        da = _box_dist(v, lo[a], hi[a], worst)
        db = _box_dist(v, lo[b], hi[b], worst)
        # push the farther child first so the nearer one is explored next;
        # children already beyond the k-th best are dropped
        if da > db:
            a, b = b, a
            da, db = db, da
        if db <= worst:
            stack[sp] = b
            bounds[sp] = db
            sp += 1
        if da <= worst:
            stack[sp] = a
            bounds[sp] = da
            sp += 1


@nb.njit(cache=True, nogil=True)
def _knn_batch(points, perm, left, right, start, stop, lo, hi, queries, k, out_i, out_d):
    for qi in range(queries.shape[0]):
        _knn_one(points, perm, left, right, start, stop, lo, hi, queries[qi], k, out_i[qi], out_d[qi])


def query_knn_batch(tree: KdTree, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest points for each query row; returns ``(indices, sq_distances)``."""
    if not 1 <= k <= len(tree):
        raise ValueError(f"k={k} outside [1, {len(tree)}]")
    Q = np.ascontiguousarray(queries, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[1] != tree.dim:
        raise ValueError(f"queries must have shape (count, {tree.dim})")
    out_i = np.empty((Q.shape[0], k), dtype=np.int64)
    out_d = np.empty((Q.shape[0], k))
    _knn_batch(tree.points, tree.perm, tree.left, tree.right, tree.start, tree.stop, tree.lo, tree.hi, Q, k, out_i, out_d)
    return out_i, out_d


def query_knn(tree: KdTree, v, k: int) -> list[tuple[int, float]]:
    """``k`` nearest stored points to ``v`` as ``(index, squared distance)``, ascending.

    Equal distances are ordered by index.
    """
    idx, dist = query_knn_batch(tree, np.asarray(v, dtype=np.float64)[None, :], k)
    return [(int(i), float(d)) for i, d in zip(idx[0], dist[0])]


# --------------------------------------------------------------- correction


@dataclass(frozen=True)
class DecodeResult:
    corrected: bool
    index: int | None
    codeword: str | None
    candidates: int
    distances: int
    diagnostic: str = ""

    @property
    def outcome(self) -> str:
        return "corrected" if self.corrected else "failed"


class SegmentDecoder:
    """Tree-search decoder over a codebook's embeddings.

    The tree indexes codewords in lexicographic order, so a decoded index is
    the same integer ``codebook.encode`` maps to that codeword.
    """

    def __init__(self, cb: Codebook, params: ModelParams, leaf_size: int = LEAF_SIZE):
        if params.config.q != cb.q:
            raise ValueError("model alphabet does not match the codebook")
        self.codebook = cb
        self.params = params
        self.words = cb.lexicographic
        self.arrays = np.stack([lev.as_array(w, cb.q) for w in self.words])
        self.tree = build_tree(embed_many(params, self.arrays, dtype=INFER_DTYPE), leaf_size)

    @property
    def n(self) -> int:
        return self.codebook.n

    def correct(self, segment: lev.SequenceLike, k: int = 4) -> DecodeResult:
        return correct_segment(segment, self.tree, self.codebook, self.params, k, self)

    def correct_batch(self, segs: np.ndarray, lens: np.ndarray, k: int) -> np.ndarray:
        """Decoded lexicographic index per segment, ``-1`` on failure."""
        lens = np.asarray(lens, dtype=np.int64)
        out = np.full(lens.size, -1, dtype=np.int64)
        ok = np.abs(lens - self.n) <= 1
        if not ok.any():
            return out
        sel = np.flatnonzero(ok)
        U = embed_many(self.params, segs[sel], lens[sel], dtype=INFER_DTYPE)
        cand, _ = query_knn_batch(self.tree, U, k)
        out[sel] = _double_check(np.ascontiguousarray(segs[sel]), lens[sel], self.arrays, self.n, cand)
        return out


@nb.njit(cache=True, nogil=True)
def _double_check(segs, lens, words, n, cand):
    out = np.full(segs.shape[0], -1, dtype=np.int64)
    for i in range(segs.shape[0]):
        for j in range(cand.shape[1]):
            c = cand[i, j]
            if lev._lev_bounded(segs[i], lens[i], words[c], n, 1) >= 0:
                out[i] = c
                break
    return out


def correct_segment(
    segment: lev.SequenceLike,
    tree: KdTree,
    cb: Codebook,
    params: ModelParams,
    k: int = 4,
    decoder: SegmentDecoder | None = None,
) -> DecodeResult:
    """Embed, take the ``k`` nearest codeword embeddings, accept the first within distance 1.

    ``tree`` must index ``cb.lexicographic`` in order.
    """
    seg = lev.as_array(segment, cb.q)
    if abs(seg.size - cb.n) > 1:
        return DecodeResult(False, None, None, 0, 0, f"segment length {seg.size} outside [{cb.n - 1}, {cb.n + 1}]")
    words = decoder.words if decoder is not None else cb.lexicographic
    k = min(k, len(tree))
    v = embed_batch(params, seg[None, :], np.array([seg.size]), dtype=INFER_DTYPE)[0]
    hits = query_knn(tree, v, k)
    computed = 0
    for idx, _ in hits:
        computed += 1
        if lev.distance_at_most(seg, words[idx], 1, cb.q) is not None:
            return DecodeResult(True, idx, words[idx], len(hits), computed)
    return DecodeResult(False, None, None, len(hits), computed, "no candidate within distance 1")


@nb.njit(cache=True, nogil=True)
def _brute_batch(segs, lens, words, n):
    out = np.full(segs.shape[0], -1, dtype=np.int64)
    for i in range(segs.shape[0]):
        for c in range(words.shape[0]):
            if lev._lev_bounded(segs[i], lens[i], words[c], n, 1) >= 0:
                out[i] = c
                break
    return out


def brute_force_batch(segs: np.ndarray, lens: np.ndarray, words: np.ndarray, n: int) -> np.ndarray:
    return _brute_batch(np.ascontiguousarray(segs, dtype=np.uint8), np.asarray(lens, dtype=np.int64), words, n)


def brute_force_correct(segment: lev.SequenceLike, cb: Codebook) -> DecodeResult:
    """Scan codewords in lexicographic order until one lies within distance 1.

    On failure the closest codeword is named in the diagnostic.
    """
    seg = lev.as_array(segment, cb.q)
    words = cb.lexicographic
    for i, w in enumerate(words):
        if lev.distance_at_most(seg, w, 1, cb.q) is not None:
            return DecodeResult(True, i, w, i + 1, i + 1)
    dists = [lev.distance(seg, w, cb.q) for w in words]
    best = int(np.argmin(dists)) if dists else -1
    diag = f"nearest codeword {words[best]} at distance {dists[best]}" if dists else "empty codebook"
    return DecodeResult(False, None, None, len(words), 2 * len(words), diag)


# ---------------------------------------------------------------- benchmark


def corruption_stream(cb: Codebook, trials: int, seed: int):
    """``trials`` single-edit corruptions of uniformly drawn codewords.

    Returns ``(truth_index, segments, lengths)`` with lexicographic indices.
    """
    rng = np.random.default_rng(seed)
    words = np.stack([lev.as_array(w, cb.q) for w in cb.lexicographic])
    truth = rng.integers(len(cb), size=trials)
    segs, lens = lev.random_edits(words[truth], np.full(trials, cb.n), rng, cb.q)
    return truth, segs, lens


def bench_correct(
    cb: Codebook,
    params: ModelParams,
    ks=(1, 2, 3, 4, 5),
    trials: int = 10**6,
    seed: int = 0,
    timing_trials: int | None = 10**5,
    chunk: int = 1 << 16,
    decoder: SegmentDecoder | None = None,
) -> list[dict]:
    """Failure counts per ``k`` on one corruption stream, plus wall-clock totals.

    Failures are counted over all ``trials``. Timing covers the first
    ``timing_trials`` segments: the full tree pipeline (embed, query, double
    check) separately for every ``k``, and the brute-force scan once.
    """
    dec = decoder or SegmentDecoder(cb, params)
    truth, segs, lens = corruption_stream(cb, trials, seed)
    ks = sorted(set(int(k) for k in ks))
    kmax = max(ks)
    failures = {k: 0 for k in ks}
    wrong = 0
    for a in range(0, trials, chunk):
        sl = slice(a, a + chunk)
        U = embed_many(params, segs[sl], lens[sl], dtype=INFER_DTYPE)
        cand, _ = query_knn_batch(dec.tree, U, kmax)
        for k in ks:
            got = _double_check(segs[sl], lens[sl], dec.arrays, cb.n, np.ascontiguousarray(cand[:, :k]))
            failures[k] += int((got < 0).sum())
            wrong += int(((got >= 0) & (got != truth[sl])).sum())
    if wrong:
        raise AssertionError(f"{wrong} segments decoded to a wrong codeword")

    t_n = min(trials, timing_trials or trials)
    tseg, tlen = segs[:t_n], lens[:t_n]
    tree_ns = {}
    for k in ks:
        t0 = time.perf_counter_ns()
        dec.correct_batch(tseg, tlen, k)
        tree_ns[k] = time.perf_counter_ns() - t0
    t0 = time.perf_counter_ns()
    brute = brute_force_batch(tseg, tlen, dec.arrays, cb.n)
    brute_ns = time.perf_counter_ns() - t0
    if np.any(brute != truth[:t_n]):
        raise AssertionError("brute-force decoder missed a single-edit corruption")

    model_hash = params.digest()
    return [
        {
            "n": cb.n,
            "k": k,
            "trials": trials,
            "failures": failures[k],
            "timing_trials": t_n,
            "tree_ns_total": tree_ns[k],
            "brute_ns_total": brute_ns,
            "seed": seed,
            "model": model_hash,
            "codebook": cb.digest(),
        }
        for k in ks
    ]
