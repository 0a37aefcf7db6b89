"""Codebooks with minimum Levenshtein distance 3 and their greedy construction."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numba as nb
import numpy as np

from . import levenshtein as lev
from .model import ModelParams, embed_many

MAGIC_LINE = "#dodo-codebook v1"


class CodebookFormatError(ValueError):
    pass


class DegenerateCovariance(np.linalg.LinAlgError):
    pass


@dataclass
class Codebook:
    """Codewords of one length ``n`` kept in the order they were selected.

    ``encode``/``decode_index`` use lexicographic order instead, so the
    integer mapping does not depend on how the book was searched.
    """

    n: int
    q: int
    codewords: list[str]
    method: str = "unknown"
    seed: int | None = None
    model: str | None = None
    extra: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for w in self.codewords:
            if len(w) != self.n:
                raise ValueError(f"codeword {w!r} does not have length {self.n}")
        if len(set(self.codewords)) != len(self.codewords):
            raise ValueError("duplicate codewords")
        self._sorted = sorted(self.codewords)
        self._index = {w: i for i, w in enumerate(self._sorted)}

    def __len__(self) -> int:
        return len(self.codewords)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    @property
    def lexicographic(self) -> list[str]:
        return list(self._sorted)

    def arrays(self) -> np.ndarray:
        if not self.codewords:
            return np.zeros((0, self.n), dtype=np.uint8)
        return np.stack([lev.as_array(w, self.q) for w in self.codewords])

    def codes(self) -> np.ndarray:
        return lev.arrays_to_codes(self.arrays(), self.q)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.codewords).encode()).hexdigest()[:16]


def encode(cb: Codebook, index: int) -> str:
    if not 0 <= index < len(cb):
        raise IndexError(f"index {index} outside [0, {len(cb)})")
    return cb._sorted[index]


def decode_index(cb: Codebook, word: str) -> int:
    try:
        return cb._index[word]
    except KeyError:
        raise KeyError(f"{word!r} is not a codeword") from None


def code_rate(size: int, n: int, q: int = 4) -> float:
    """Information per symbol, ``log_q(size) / n``."""
    if size < 1:
        raise ValueError("codebook size must be >= 1")
    return math.log(size) / math.log(q) / n


# ------------------------------------------------------------ verification


class MinDistanceCheck(NamedTuple):
    ok: bool
    witness: tuple[str, str, int] | None

    def __bool__(self) -> bool:
        return self.ok


@nb.njit(cache=True)
def _first_close_pair(words, n, bound):
    N = words.shape[0]
    for i in range(N):
        for j in range(i + 1, N):
            d = lev._lev_bounded(words[i], n, words[j], n, bound)
            if d >= 0:
                return i, j, d
    return -1, -1, -1


def verify_min_distance(cb: Codebook, dmin: int = 3) -> MinDistanceCheck:
    """Check every pair is at Levenshtein distance ``>= dmin``; report one violator."""
    if len(cb) < 2 or dmin <= 0:
        return MinDistanceCheck(True, None)
    i, j, d = _first_close_pair(cb.arrays(), cb.n, dmin - 1)
    if i < 0:
        return MinDistanceCheck(True, None)
    return MinDistanceCheck(False, (cb.codewords[i], cb.codewords[j], int(d)))


@nb.njit(cache=True)
def _cover(codes, n, q, r, removed, buf):
    for c in codes:
        lev.mark_ball(c, n, q, r, removed, buf)


def covered_mask(cb: Codebook, r: int = 2, cap: int = lev.DEFAULT_ENUM_CAP) -> np.ndarray:
    """Boolean mask over all ``q**n`` sequences: within distance ``r`` of a codeword."""
    if cb.q**cb.n > cap:
        raise lev.BudgetExceeded(f"{cb.q}^{cb.n} sequences exceeds cap {cap}")
    removed = np.zeros(cb.q**cb.n, dtype=np.bool_)
    buf = np.empty(lev._ball_capacity(cb.n, cb.q), dtype=np.int64)
    _cover(cb.codes(), cb.n, cb.q, r, removed, buf)
    return removed


def find_isolated(cb: Codebook, cap: int = lev.DEFAULT_ENUM_CAP) -> set[str]:
    """Sequences neither in the book nor within distance 2 of any codeword."""
    mask = covered_mask(cb, 2, cap)
    return {lev.unrank(int(c), cb.n, cb.q) for c in np.flatnonzero(~mask)}


# -------------------------------------------------------------- covariance


@dataclass
class CovarianceModel:
    sigma: np.ndarray
    sigma_inv: np.ndarray
    ridge: float


def covariance_from_moment(second_moment: np.ndarray, ridge: float | None = None) -> CovarianceModel:
    sigma = 0.5 * (second_moment + second_moment.T)
    m = sigma.shape[0]
    if ridge is None:
        ridge = 1e-6 * float(np.trace(sigma)) / m
    reg = sigma + ridge * np.eye(m)
    eig = np.linalg.eigvalsh(reg)
    if eig[-1] <= 0 or eig[0] <= eig[-1] * m * np.finfo(np.float64).eps:
        raise DegenerateCovariance("covariance is singular even after the ridge")
    chol = np.linalg.cholesky(reg)
    inv_chol = np.linalg.solve(chol, np.eye(m))
    sigma_inv = inv_chol.T @ inv_chol
    return CovarianceModel(sigma, 0.5 * (sigma_inv + sigma_inv.T), float(ridge))


def estimate_covariance(vectors: np.ndarray, ridge: float | None = None) -> CovarianceModel:
    """Second-moment matrix about the origin (the embeddings are centred by batch norm).

    ``ridge=None`` uses ``1e-6 * trace / m``.
    """
    V = np.asarray(vectors, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] == 0:
        raise ValueError("expected a nonempty (count, m) array")
    return covariance_from_moment(V.T @ V / V.shape[0], ridge)


def density_score(u: np.ndarray, cov: CovarianceModel) -> float:
    """``u^T Sigma^-1 u``; larger means lower Gaussian density."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (cov.sigma_inv.shape[0],):
        raise ValueError(f"dimension mismatch: {u.shape} vs {cov.sigma_inv.shape[0]}")
    return float(u @ cov.sigma_inv @ u)


def density_scores(U: np.ndarray, cov: CovarianceModel) -> np.ndarray:
    return np.einsum("ij,jk,ik->i", U, cov.sigma_inv, U)


def gaussian_logpdf(U: np.ndarray, cov: CovarianceModel) -> np.ndarray:
    """Log density of a zero-mean normal with the regularised covariance."""
    m = cov.sigma.shape[0]
    _, logdet = np.linalg.slogdet(cov.sigma + cov.ridge * np.eye(m))
    return -0.5 * (m * np.log(2 * np.pi) + logdet + density_scores(U, cov))


# ----------------------------------------------------------- greedy search


@nb.njit(cache=True)
def _greedy(order, n, q, removed, buf):
    selected = np.empty(order.size, dtype=np.int64)
    k = 0
    for c in order:
        if removed[c]:
            continue
        selected[k] = c
        k += 1
        lev.mark_ball(c, n, q, 2, removed, buf)
    return selected[:k]


def greedy_select(order: np.ndarray, n: int, q: int = 4) -> np.ndarray:
    """Take candidates in ``order``, skipping any within distance 2 of a previous pick.

    ``order`` must be a permutation of all ``q**n`` codes. Picking the first
    surviving code of a fixed priority order is the same as repeatedly taking
    the best remaining candidate, since priorities never change.
    """
    order = np.ascontiguousarray(order, dtype=np.int64)
    if order.size != q**n:
        raise ValueError("order must cover every sequence exactly once")
    removed = np.zeros(q**n, dtype=np.bool_)
    buf = np.empty(lev._ball_capacity(n, q), dtype=np.int64)
    return _greedy(order, n, q, removed, buf)


def _book(codes, n, q, **kw) -> Codebook:
    words = [lev.to_text(r) for r in lev.codes_to_arrays(codes, n, q)]
    return Codebook(n, q, words, **kw)


def embedding_scores(
    params: ModelParams,
    n: int,
    ridge: float | None = None,
    chunk: int = 1 << 15,
    cache_limit: int = 1 << 29,
    cap: int = lev.DEFAULT_ENUM_CAP,
) -> tuple[np.ndarray, CovarianceModel]:
    """Density scores of every length-``n`` sequence under the fitted covariance.

    Embeddings are kept in memory when they fit within ``cache_limit`` bytes;
    otherwise they are recomputed for the scoring pass.
    """
    q, m = params.config.q, params.config.m
    total = q**n
    if total > cap:
        raise lev.BudgetExceeded(f"{q}^{n} sequences exceeds cap {cap}")
    keep = total * m * 8 <= cache_limit
    stored = np.empty((total, m)) if keep else None
    moment = np.zeros((m, m))
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        U = embed_many(params, lev.codes_to_arrays(codes, n, q))
        moment += U.T @ U
        if keep:
            stored[start : start + U.shape[0]] = U
    cov = covariance_from_moment(moment / total, ridge)
    scores = np.empty(total)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        if keep:
            U = stored[start:stop]
        else:
            U = embed_many(params, lev.codes_to_arrays(np.arange(start, stop), n, q))
        scores[start:stop] = density_scores(U, cov)
    return scores, cov


def degs_search(
    n: int,
    params: ModelParams,
    ridge: float | None = None,
    tie_seed: int | None = None,
    model_hash: str | None = None,
    scores: np.ndarray | None = None,
) -> Codebook:
    """Greedy search taking the lowest-density embedding first.

    Ties in score go to the lexicographically smaller sequence, or to a
    random order drawn from ``tie_seed``. Precomputed ``scores`` may be
    passed to skip the embedding pass.
    """
    q = params.config.q
    if scores is None:
        scores, _ = embedding_scores(params, n, ridge)
    if tie_seed is None:
        order = np.lexsort((np.arange(scores.size), -scores))
    else:
        key = np.random.default_rng(tie_seed).permutation(scores.size)
        order = np.lexsort((key, -scores))
    codes = greedy_select(order, n, q)
    return _book(codes, n, q, method="degs", seed=tie_seed, model=model_hash or params.digest())


def random_search(n: int, seed: int, q: int = 4, cap: int = lev.DEFAULT_ENUM_CAP) -> Codebook:
    """Greedy search with uniformly random selection among remaining candidates."""
    if q**n > cap:
        raise lev.BudgetExceeded(f"{q}^{n} sequences exceeds cap {cap}")
    order = np.random.default_rng(seed).permutation(q**n)
    return _book(greedy_select(order, n, q), n, q, method="rand", seed=seed)


def vt_codebook(n: int, residue: int = 0) -> Codebook:
    """Binary Varshamov-Tenengolts code ``sum_i i*x_i = residue (mod n+1)``, i from 1.

    Its minimum Levenshtein distance is 2, not 3, so the book is tagged
    ``min_distance=waived``.
    """
    if not 1 <= n <= 20:
        raise ValueError("VT codebooks are built for 1 <= n <= 20")
    rows = lev.all_sequences(n, 2, cap=1 << 20)
    checksum = rows.astype(np.int64) @ np.arange(1, n + 1)
    keep = rows[checksum % (n + 1) == residue]
    words = [lev.to_text(r) for r in keep]
    return Codebook(n, 2, words, method="vt", seed=residue, extra={"min_distance": "waived"})


# ------------------------------------------------------------------ file io


def format_codebook(cb: Codebook) -> str:
    lines = [
        MAGIC_LINE,
        f"#n={cb.n} q={cb.q} method={cb.method} seed={cb.seed if cb.seed is not None else '-'} "
        f"model={cb.model or '-'}",
    ]
    lines += [f"#{k}={v}" for k, v in sorted(cb.extra.items())]
    lines += cb.codewords
    return "\n".join(lines) + "\n"


def save_codebook(cb: Codebook, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_codebook(cb), encoding="ascii")
    return path


def parse_codebook(text: str) -> Codebook:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC_LINE:
        raise CodebookFormatError("missing '#dodo-codebook v1' header")
    if len(lines) < 2 or not lines[1].startswith("#"):
        raise CodebookFormatError("missing parameter header line")
    try:
        header = dict(tok.split("=", 1) for tok in lines[1][1:].split())
        n, q = int(header["n"]), int(header["q"])
    except (KeyError, ValueError) as exc:
        raise CodebookFormatError(f"bad parameter header: {lines[1]!r}") from exc
    if q not in (2, 4) or not 1 <= n <= lev.MAX_LEN:
        raise CodebookFormatError(f"unsupported n={n} q={q}")
    extra, words = {}, []
    alphabet = set("0123"[:q])
    for lineno, raw in enumerate(lines[2:], start=3):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "=" in line:
                k, v = line[1:].split("=", 1)
                extra[k.strip()] = v.strip()
            continue
        if len(line) != n or not set(line) <= alphabet:
            raise CodebookFormatError(f"line {lineno}: {line!r} is not a length-{n} word over q={q}")
        words.append(line)
    seed = header.get("seed", "-")
    model = header.get("model", "-")
    try:
        return Codebook(
            n,
            q,
            words,
            method=header.get("method", "unknown"),
            seed=None if seed == "-" else int(seed),
            model=None if model == "-" else model,
            extra=extra,
        )
    except ValueError as exc:
        raise CodebookFormatError(str(exc)) from exc


def load_codebook(path: str | Path) -> Codebook:
    return parse_codebook(Path(path).read_text(encoding="ascii"))
