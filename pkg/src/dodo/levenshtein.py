"""Levenshtein-domain primitives over small q-ary alphabets.

Sequences are handled in three forms:

* text: ``"0123"``, one character per symbol (the on-disk form);
* arrays: ``np.uint8`` vectors of symbols, used by the numeric code;
* codes: the integer rank of a length-``n`` sequence in base ``q`` with the
  first symbol most significant, so integer order is lexicographic order.

Hot loops (distances over many pairs, ball enumeration, bulk edits) are
numba kernels operating on arrays and codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence as _Seq, Union

import numba as nb
import numpy as np

MAX_LEN = 32
DEFAULT_ENUM_CAP = 4**12

INSERTION, DELETION, SUBSTITUTION = 0, 1, 2
_KIND_NAMES = {INSERTION: "insertion", DELETION: "deletion", SUBSTITUTION: "substitution"}

SequenceLike = Union[str, _Seq[int], np.ndarray]


class BudgetExceeded(ValueError):
    """Raised when an exhaustive enumeration would exceed the configured cap."""


# ---------------------------------------------------------------- conversion


def as_array(s: SequenceLike, q: int = 4) -> np.ndarray:
    """Coerce text, a list of ints or an array into a validated uint8 array."""
    if isinstance(s, str):
        arr = np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(s)
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0):
                raise ValueError(f"negative symbol in {s!r}")
            arr = arr.astype(np.uint8)
    if arr.ndim != 1:
        raise ValueError("a sequence must be one-dimensional")
    if arr.size > MAX_LEN:
        raise ValueError(f"sequence length {arr.size} exceeds {MAX_LEN}")
    if arr.size and arr.max() >= q:
        raise ValueError(f"symbol out of range for q={q}: {s!r}")
    return np.ascontiguousarray(arr)


def to_text(s: SequenceLike) -> str:
    if isinstance(s, str):
        return s
    return (np.asarray(s, dtype=np.uint8) + ord("0")).tobytes().decode("ascii")


def rank(s: SequenceLike, q: int = 4) -> int:
    """Lexicographic index of ``s`` among all sequences of its length."""
    code = 0
    for x in as_array(s, q):
        code = code * q + int(x)
    return code


def unrank(code: int, n: int, q: int = 4) -> str:
    out = []
    for _ in range(n):
        code, x = divmod(code, q)
        out.append(chr(48 + x))
    return "".join(reversed(out))


def all_sequences(n: int, q: int = 4, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Every length-``n`` sequence as rows of a ``(q**n, n)`` array, lexicographic."""
    total = q**n
    if total > cap:
        raise BudgetExceeded(f"{q}^{n} = {total} sequences exceeds cap {cap}")
    codes = np.arange(total, dtype=np.int64)
    return codes_to_arrays(codes, n, q)


def codes_to_arrays(codes: np.ndarray, n: int, q: int = 4) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.uint8)
    rest = codes.copy()
    for j in range(n - 1, -1, -1):
        out[:, j] = rest % q
        rest //= q
    return out


def arrays_to_codes(rows: np.ndarray, q: int = 4) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    codes = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(rows.shape[1]):
        codes = codes * q + rows[:, j]
    return codes


def enumerate_sequences(n: int, q: int = 4, cap: int = DEFAULT_ENUM_CAP) -> Iterator[str]:
    """Yield all ``q**n`` sequences of length ``n`` in lexicographic order."""
    if q**n > cap:
        raise BudgetExceeded(f"{q}^{n} = {q**n} sequences exceeds cap {cap}")
    chunk = 1 << 16
    for start in range(0, q**n, chunk):
        stop = min(start + chunk, q**n)
        rows = codes_to_arrays(np.arange(start, stop), n, q)
        for row in rows:
            yield to_text(row)


# ----------------------------------------------------------------- distances


@nb.njit(cache=True, nogil=True)
def _lev(a, la, b, lb):
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = np.empty(lb + 1, dtype=np.int32)
    cur = np.empty(lb + 1, dtype=np.int32)
    for j in range(lb + 1):
        prev[j] = j
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            x = prev[j] + 1
            if x < best:
                best = x
            x = cur[j - 1] + 1
            if x < best:
                best = x
            cur[j] = best
        prev, cur = cur, prev
    return prev[lb]


@nb.njit(cache=True, nogil=True)
def _lev_bounded(a, la, b, lb, k):
    """Banded Levenshtein; returns -1 once the distance must exceed ``k``."""
    diff = la - lb if la > lb else lb - la
    if diff > k:
        return -1
    if la == 0 or lb == 0:
        return diff
    big = k + 1
    prev = np.empty(lb + 1, dtype=np.int32)
    cur = np.empty(lb + 1, dtype=np.int32)
    for j in range(lb + 1):
        prev[j] = j if j <= k else big
    for i in range(1, la + 1):
        for j in range(lb + 1):
            cur[j] = big
        if i <= k:
            cur[0] = i
        row_min = cur[0]
        lo = max(1, i - k)
        hi = min(lb, i + k)
        ai = a[i - 1]
        for j in range(lo, hi + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            x = prev[j] + 1
            if x < best:
                best = x
            x = cur[j - 1] + 1
            if x < best:
                best = x
            if best > big:
                best = big
            cur[j] = best
            if best < row_min:
                row_min = best
        if row_min > k:
            return -1
        prev, cur = cur, prev
    d = prev[lb]
    return d if d <= k else -1


def distance(s: SequenceLike, t: SequenceLike, q: int = 4) -> int:
    """Exact Levenshtein distance (unit-cost insertions, deletions, substitutions)."""
    a, b = as_array(s, q), as_array(t, q)
    return int(_lev(a, a.size, b, b.size))


def distance_at_most(s: SequenceLike, t: SequenceLike, bound: int, q: int = 4) -> int | None:
    """Levenshtein distance if it is ``<= bound``, else ``None``."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    a, b = as_array(s, q), as_array(t, q)
    d = int(_lev_bounded(a, a.size, b, b.size, bound))
    return None if d < 0 else d


@nb.njit(cache=True, nogil=True)
def pairwise_distances(xs, xlens, ys, ylens):
    """Row-wise distances between two padded batches of sequences."""
    out = np.empty(xs.shape[0], dtype=np.int32)
    for i in range(xs.shape[0]):
        out[i] = _lev(xs[i], xlens[i], ys[i], ylens[i])
    return out


# -------------------------------------------------------------------- balls


@nb.njit(cache=True, nogil=True)
def _encode(buf, length, q):
    code = 0
    for i in range(length):
        code = code * q + buf[i]
    return code


@nb.njit(cache=True, nogil=True)
def _decode(code, n, q, out):
    for j in range(n - 1, -1, -1):
        out[j] = code % q
        code //= q


@nb.njit(cache=True, nogil=True)
def _substitutions(src, n, q, out, count, tmp):
    for p in range(n):
        old = src[p]
        for a in range(q):
            if a == old:
                continue
            for i in range(n):
                tmp[i] = src[i]
            tmp[p] = a
            out[count] = _encode(tmp, n, q)
            count += 1
    return count


@nb.njit(cache=True, nogil=True)
def _ball_raw(code, n, q, r, out):
    """Fill ``out`` with codes of length-``n`` sequences reachable by <= r edits.

    Duplicates are allowed; the caller dedupes if needed. Returns the count.
    """
    s = np.empty(n, dtype=np.int64)
    _decode(code, n, q, s)
    tmp = np.empty(n + 2, dtype=np.int64)
    mid = np.empty(n + 2, dtype=np.int64)
    count = 0
    out[count] = code
    count += 1
    count = _substitutions(s, n, q, out, count, tmp)
    if r < 2:
        return count
    # substitution then substitution
    for p in range(n):
        old = s[p]
        for a in range(q):
            if a == old:
                continue
            for i in range(n):
                mid[i] = s[i]
            mid[p] = a
            count = _substitutions(mid, n, q, out, count, tmp)
    # deletion then insertion
    for p in range(n):
        m = 0
        for i in range(n):
            if i != p:
                mid[m] = s[i]
                m += 1
        for p2 in range(n):
            for a in range(q):
                m = 0
                for i in range(n - 1):
                    if i == p2:
                        tmp[m] = a
                        m += 1
                    tmp[m] = mid[i]
                    m += 1
                if p2 == n - 1:
                    tmp[m] = a
                    m += 1
                out[count] = _encode(tmp, n, q)
                count += 1
    # insertion then deletion
    for p in range(n + 1):
        for a in range(q):
            m = 0
            for i in range(n):
                if i == p:
                    mid[m] = a
                    m += 1
                mid[m] = s[i]
                m += 1
            if p == n:
                mid[m] = a
                m += 1
            for p2 in range(n + 1):
                m = 0
                for i in range(n + 1):
                    if i != p2:
                        tmp[m] = mid[i]
                        m += 1
                out[count] = _encode(tmp, n, q)
                count += 1
    return count


def _ball_capacity(n: int, q: int) -> int:
    return 1 + n * (q - 1) + (n * (q - 1)) ** 2 + 2 * n * n * q + 2 * (n + 1) ** 2 * q


@nb.njit(cache=True, nogil=True)
def mark_ball(code, n, q, r, removed, buf):
    """Set ``removed[c] = True`` for every code in the radius-``r`` ball of ``code``."""
    cnt = _ball_raw(code, n, q, r, buf)
    for i in range(cnt):
        removed[buf[i]] = True


@nb.njit(cache=True, nogil=True)
def _ball_verified(code, n, q, r, buf):
    cnt = _ball_raw(code, n, q, r, buf)
    vals = np.unique(buf[:cnt])
    s = np.empty(n, dtype=np.int64)
    t = np.empty(n, dtype=np.int64)
    _decode(code, n, q, s)
    keep = np.zeros(vals.size, dtype=np.bool_)
    for i in range(vals.size):
        _decode(vals[i], n, q, t)
        keep[i] = _lev_bounded(s, n, t, n, r) >= 0
    return vals[keep]


def ball_codes(code: int, n: int, q: int = 4, r: int = 2) -> np.ndarray:
    """Sorted codes of the length-``n`` sequences within distance ``r`` of ``code``."""
    if r not in (1, 2):
        raise ValueError("radius must be 1 or 2")
    buf = np.empty(_ball_capacity(n, q), dtype=np.int64)
    return _ball_verified(np.int64(code), n, q, r, buf)


def ball(s: SequenceLike, r: int, n: int | None = None, q: int = 4) -> set[str]:
    """Length-``n`` sequences within Levenshtein distance ``r`` of ``s`` (``s`` included)."""
    arr = as_array(s, q)
    if n is None:
        n = arr.size
    if n != arr.size:
        raise ValueError(f"sequence has length {arr.size}, expected {n}")
    return {unrank(int(c), n, q) for c in ball_codes(rank(arr, q), n, q, r)}


# -------------------------------------------------------------------- edits


@dataclass(frozen=True)
class EditOp:
    kind: int
    position: int
    symbol: int | None = None

    def __post_init__(self):
        if self.kind not in _KIND_NAMES:
            raise ValueError(f"unknown edit kind {self.kind}")
        if self.kind == DELETION and self.symbol is not None:
            raise ValueError("a deletion carries no symbol")
        if self.kind != DELETION and self.symbol is None:
            raise ValueError(f"{_KIND_NAMES[self.kind]} needs a symbol")

    @property
    def name(self) -> str:
        return _KIND_NAMES[self.kind]


def apply_edit(s: SequenceLike, op: EditOp, q: int = 4) -> str:
    arr = list(as_array(s, q))
    L = len(arr)
    if op.kind == INSERTION:
        if not 0 <= op.position <= L:
            raise ValueError("insertion position out of range")
        arr.insert(op.position, op.symbol)
    elif op.kind == DELETION:
        if not 0 <= op.position < L:
            raise ValueError("deletion position out of range")
        del arr[op.position]
    else:
        if not 0 <= op.position < L:
            raise ValueError("substitution position out of range")
        if arr[op.position] == op.symbol:
            raise ValueError("substitution must change the symbol")
        arr[op.position] = op.symbol
    return to_text(np.array(arr, dtype=np.uint8))


def random_edit_op(s: SequenceLike, rng: np.random.Generator, q: int = 4) -> EditOp:
    """Edit kind uniform over the three kinds, then position and symbol uniform."""
    arr = as_array(s, q)
    L = arr.size
    if L < 1:
        raise ValueError("cannot edit an empty sequence")
    kind = int(rng.integers(3))
    if kind == INSERTION:
        return EditOp(kind, int(rng.integers(L + 1)), int(rng.integers(q)))
    if kind == DELETION:
        return EditOp(kind, int(rng.integers(L)))
    pos = int(rng.integers(L))
    sym = (int(arr[pos]) + 1 + int(rng.integers(q - 1))) % q
    return EditOp(kind, pos, sym)


def apply_random_edit(s: SequenceLike, rng: np.random.Generator, q: int = 4) -> str:
    return apply_edit(s, random_edit_op(s, rng, q), q)


def draw_edits(lengths: np.ndarray, rng: np.random.Generator, q: int = 4):
    """Vectorised random edit parameters for a batch of sequences.

    Returns ``(kind, position, offset)`` arrays; ``offset`` is the inserted
    symbol for insertions and the nonzero shift ``1..q-1`` for substitutions.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    size = lengths.size
    kind = rng.integers(3, size=size)
    span = np.where(kind == INSERTION, lengths + 1, lengths)
    pos = np.floor(rng.random(size) * span).astype(np.int64)
    sym = rng.integers(q, size=size)
    shift = 1 + rng.integers(q - 1, size=size)
    offset = np.where(kind == INSERTION, sym, shift)
    return kind.astype(np.int64), pos, offset.astype(np.int64)


@nb.njit(cache=True, nogil=True)
def apply_edits_batch(seqs, lens, kind, pos, offset, q, out, out_lens):
    """Apply one edit per row of a padded batch; ``out`` needs one extra column."""
    for i in range(seqs.shape[0]):
        L = lens[i]
        p = pos[i]
        k = kind[i]
        if k == 0:
            for j in range(p):
                out[i, j] = seqs[i, j]
            out[i, p] = offset[i]
            for j in range(p, L):
                out[i, j + 1] = seqs[i, j]
            out_lens[i] = L + 1
        elif k == 1:
            m = 0
            for j in range(L):
                if j != p:
                    out[i, m] = seqs[i, j]
                    m += 1
            out_lens[i] = L - 1
        else:
            for j in range(L):
                out[i, j] = seqs[i, j]
            out[i, p] = (seqs[i, p] + offset[i]) % q
            out_lens[i] = L
        for j in range(out_lens[i], out.shape[1]):
            out[i, j] = 0


def random_edits(seqs: np.ndarray, lens: np.ndarray, rng: np.random.Generator, q: int = 4):
    """One uniformly drawn edit applied to each row; returns a padded batch."""
    seqs = np.ascontiguousarray(seqs, dtype=np.uint8)
    lens = np.asarray(lens, dtype=np.int64)
    kind, pos, offset = draw_edits(lens, rng, q)
    out = np.zeros((seqs.shape[0], seqs.shape[1] + 1), dtype=np.uint8)
    out_lens = np.empty(seqs.shape[0], dtype=np.int64)
    apply_edits_batch(seqs, lens, kind, pos, offset, q, out, out_lens)
    return out, out_lens


# ------------------------------------------------------------------ channel


@dataclass(frozen=True)
class ChannelConfig:
    p_ins: float = 0.0
    p_del: float = 0.0
    p_sub: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_ins", "p_del", "p_sub"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.p_ins + self.p_del + self.p_sub > 1.0 + 1e-12:
            raise ValueError("p_ins + p_del + p_sub must not exceed 1")


def ids_channel(
    s: SequenceLike,
    cfg: ChannelConfig,
    rng: np.random.Generator | None = None,
    q: int = 4,
) -> str:
    """Pass ``s`` through a memoryless insertion/deletion/substitution channel.

    Each input position independently gets an inserted random symbol before
    it (and is then copied), is deleted, is substituted, or is copied.
    Without an explicit ``rng`` the stream is seeded from ``cfg.seed``.
    """
    arr = as_array(s, q)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    u = rng.random(arr.size)
    ins_sym = rng.integers(q, size=arr.size)
    shift = 1 + rng.integers(q - 1, size=arr.size)
    out: list[int] = []
    t1 = cfg.p_ins
    t2 = t1 + cfg.p_del
    t3 = t2 + cfg.p_sub
    for i, x in enumerate(arr):
        if u[i] < t1:
            out.append(int(ins_sym[i]))
            out.append(int(x))
        elif u[i] < t2:
            continue
        elif u[i] < t3:
            out.append((int(x) + int(shift[i])) % q)
        else:
            out.append(int(x))
    return to_text(np.array(out, dtype=np.uint8))
