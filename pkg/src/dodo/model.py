"""Siamese 1D-CNN embedding whose squared Euclidean distances track Levenshtein distance.

Architecture: one-hot input -> ``layers`` x (same-padded conv, ReLU) ->
mean pool over valid positions -> affine projection to ``m`` dims ->
batch normalisation without learned affine. Everything is float64 numpy
with hand-written backpropagation.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import levenshtein as lev

log = logging.getLogger(__name__)

BN_EPS = 1e-9
LOG_CLAMP = 1e-8

MAGIC = b"DODOEMB\0"
FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


class ConfigMismatch(ModelError):
    pass


class Divergence(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    q: int = 4
    m: int = 64
    layers: int = 10
    channels: int = 64
    kernel: int = 3
    max_len: int = 13
    bn_scale: bool = True

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError("kernel must be a positive odd integer")
        if self.m < 1 or self.channels < 1:
            raise ValueError("m and channels must be >= 1")
        if not 1 <= self.max_len <= lev.MAX_LEN:
            raise ValueError(f"max_len must be in [1, {lev.MAX_LEN}]")


@dataclass
class TrainConfig:
    n: int = 7
    batch_size: int = 256
    steps: int = 50_000
    lr: float = 1e-3
    lr_final: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    bn_momentum: float = 0.1
    mix: tuple[float, float, float] = (0.4, 0.4, 0.2)
    loss: str = "revised"
    seed: int = 0
    log_every: int = 500
    precision: str = "float32"  # convolution stack only

    def __post_init__(self):
        if self.precision not in ("float32", "float64"):
            raise ValueError("precision must be 'float32' or 'float64'")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 for batch statistics")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.loss not in ("revised", "pnll"):
            raise ValueError("loss must be 'revised' or 'pnll'")
        self.mix = tuple(float(x) for x in self.mix)
        if len(self.mix) != 3 or min(self.mix) < 0 or abs(sum(self.mix) - 1) > 1e-9:
            raise ValueError("mix must be three nonnegative proportions summing to 1")


@dataclass
class ModelParams:
    """Learnable weights (``weights``) plus batch-norm running statistics."""

    config: ModelConfig
    weights: dict[str, np.ndarray]
    running_mean: np.ndarray
    running_var: np.ndarray
    step: int = 0
    meta: dict = field(default_factory=dict)

    def names(self) -> list[str]:
        return param_names(self.config)

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.config,
            {k: v.copy() for k, v in self.weights.items()},
            self.running_mean.copy(),
            self.running_var.copy(),
            self.step,
            dict(self.meta),
        )

    def digest(self) -> str:
        return hashlib.sha256(serialize_params(self)).hexdigest()[:16]


def param_names(cfg: ModelConfig) -> list[str]:
    names = []
    for i in range(cfg.layers):
        names += [f"conv{i}.w", f"conv{i}.b"]
    names += ["proj.w", "proj.b"]
    if cfg.bn_scale:
        names.append("bn.scale")
    return names


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    cin = cfg.q
    for i in range(cfg.layers):
        shapes[f"conv{i}.w"] = (cfg.kernel * cin, cfg.channels)
        shapes[f"conv{i}.b"] = (cfg.channels,)
        cin = cfg.channels
    shapes["proj.w"] = (cfg.channels, cfg.m)
    shapes["proj.b"] = (cfg.m,)
    if cfg.bn_scale:
        shapes["bn.scale"] = (cfg.m,)
    return shapes


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """He-normal conv weights, zero biases, unit running variance."""
    weights = {}
    for name, shape in param_shapes(cfg).items():
        if name == "bn.scale":
            weights[name] = np.ones(shape)
        elif name.endswith(".b"):
            weights[name] = np.zeros(shape)
        else:
            weights[name] = rng.normal(0.0, np.sqrt(2.0 / shape[0]), size=shape)
    return ModelParams(cfg, weights, np.zeros(cfg.m), np.ones(cfg.m))


# ------------------------------------------------------------------ forward


def one_hot(seqs: np.ndarray, lens: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Padded one-hot batch ``(B, L, q)`` and validity mask ``(B, L)``."""
    B, L = seqs.shape
    mask = (np.arange(L)[None, :] < np.asarray(lens)[:, None]).astype(np.float64)
    x = np.zeros((B, L, q))
    x[np.arange(B)[:, None], np.arange(L)[None, :], seqs.astype(np.intp)] = 1.0
    return x * mask[..., None], mask


def _im2col(h: np.ndarray, kernel: int) -> np.ndarray:
    """``(B, L, kernel*C)`` windows of a zero-padded ``(B, L, C)`` input."""
    B, L, C = h.shape
    pad = kernel // 2
    cols = np.zeros((B, L, kernel * C), dtype=h.dtype)
    for j in range(kernel):
        shift = j - pad
        dst = cols[:, max(0, -shift) : L - max(0, shift), j * C : (j + 1) * C]
        dst[...] = h[:, max(0, shift) : L + min(0, shift)]
    return cols


def _col2im(dcols: np.ndarray, kernel: int, C: int) -> np.ndarray:
    """Adjoint of :func:`_im2col`."""
    B, L, _ = dcols.shape
    pad = kernel // 2
    dh = dcols[:, :, pad * C : (pad + 1) * C].copy()
    for j in range(kernel):
        shift = j - pad
        if shift == 0:
            continue
        dh[:, max(0, shift) : L + min(0, shift)] += dcols[:, max(0, -shift) : L - max(0, shift), j * C : (j + 1) * C]
    return dh


def _trunk(params: ModelParams, seqs, lens, keep_cache: bool, dtype=np.float64):
    cfg = params.config
    lens = np.asarray(lens, dtype=np.int64)
    if lens.size and lens.max() > cfg.max_len:
        raise ModelError(f"input length {lens.max()} exceeds max_len {cfg.max_len}")
    if lens.size and lens.min() < 1:
        raise ModelError("empty input sequence")
    h, mask = one_hot(seqs, lens, cfg.q)
    h, mask = h.astype(dtype), mask.astype(dtype)
    cache = []
    for i in range(cfg.layers):
        cols = _im2col(h, cfg.kernel)
        B, L, K = cols.shape
        w = params.weights[f"conv{i}.w"].astype(dtype, copy=False)
        z = (cols.reshape(-1, K) @ w).reshape(B, L, -1) + params.weights[f"conv{i}.b"].astype(dtype, copy=False)
        h = np.maximum(z, 0.0) * mask[..., None]
        if keep_cache:
            cache.append((cols, z))
    pooled = h.sum(axis=1, dtype=np.float64) / lens[:, None]
    y = pooled @ params.weights["proj.w"] + params.weights["proj.b"]
    return y, (mask, lens, cache, pooled)


def _batch_norm_train(y: np.ndarray):
    mu = y.mean(axis=0)
    var = y.var(axis=0)
    inv = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (y - mu) * inv
    return xhat, mu, var, inv


def embed_batch(
    params: ModelParams, seqs: np.ndarray, lens: np.ndarray, train: bool = False, dtype=np.float64
) -> np.ndarray:
    """Embed a padded batch of sequences; infer mode uses running statistics.

    ``dtype`` sets the precision of the convolution stack only.
    """
    y, _ = _trunk(params, np.asarray(seqs), lens, keep_cache=False, dtype=dtype)
    if train:
        if y.shape[0] < 2:
            raise ModelError("train-mode batch norm needs at least two inputs")
        out = _batch_norm_train(y)[0]
    else:
        out = (y - params.running_mean) / np.sqrt(params.running_var + BN_EPS)
    if params.config.bn_scale:
        out = out * params.weights["bn.scale"]
    return out


def embed(params: ModelParams | None, s: lev.SequenceLike, train: bool = False) -> np.ndarray:
    if params is None:
        raise ModelError("model parameters are not initialised")
    arr = lev.as_array(s, params.config.q)
    return embed_batch(params, arr[None, :], np.array([arr.size]), train=train)[0]


def embed_many(
    params: ModelParams,
    seqs: np.ndarray,
    lens: np.ndarray | None = None,
    chunk: int = 2048,
    dtype=np.float64,
) -> np.ndarray:
    """Infer-mode embeddings of many sequences, computed in chunks."""
    seqs = np.asarray(seqs, dtype=np.uint8)
    if lens is None:
        lens = np.full(seqs.shape[0], seqs.shape[1], dtype=np.int64)
    lens = np.asarray(lens, dtype=np.int64)
    out = np.empty((seqs.shape[0], params.config.m))
    for start in range(0, seqs.shape[0], chunk):
        sl = slice(start, start + chunk)
        width = int(lens[sl].max()) if lens[sl].size else 1
        out[sl] = embed_batch(params, seqs[sl, :width], lens[sl], dtype=dtype)
    return out


def sq_euclidean(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    diff = u - v
    return float(diff @ diff)


# --------------------------------------------------------------------- loss


def pnll_loss(d, d_hat):
    """Poisson negative log-likelihood ``d_hat - d*ln(d_hat)``."""
    d_hat = np.maximum(d_hat, LOG_CLAMP)
    return d_hat - d * np.log(d_hat)


def revised_loss(d, d_hat):
    """PNLL for distance-1 pairs; for farther pairs only penalise ``d_hat < 2``."""
    d = np.asarray(d)
    d_hat = np.asarray(d_hat, dtype=np.float64)
    near = pnll_loss(d, d_hat)
    far = np.where(d_hat < 2.0, pnll_loss(2.0, d_hat), 0.0)
    out = np.where(d == 1, near, far)
    return out if out.ndim else float(out)


def _loss_grad(d: np.ndarray, d_hat: np.ndarray, kind: str) -> tuple[np.ndarray, np.ndarray]:
    clamped = np.maximum(d_hat, LOG_CLAMP)
    live = d_hat >= LOG_CLAMP
    if kind == "pnll":
        loss = pnll_loss(d, d_hat)
        g = (1.0 - d / clamped) * live
        return loss, g
    loss = revised_loss(d, d_hat)
    target = np.where(d == 1, 1.0, 2.0)
    active = (d == 1) | (d_hat < 2.0)
    g = (1.0 - target / clamped) * live * active
    return loss, g


def loss_and_gradient(params: ModelParams, s_batch, t_batch, d, loss: str = "revised", dtype=np.float64):
    """Mean loss over a batch of pairs and its gradient for every weight.

    ``s_batch`` and ``t_batch`` are ``(seqs, lens)`` padded batches. Both
    Siamese branches run through one forward pass so they share weights and
    batch-norm statistics. Returns ``(loss, grads, stats)`` where ``stats``
    holds the batch mean/variance used to update running statistics.
    ``dtype`` sets the precision of the convolution stack; the projection,
    batch norm and returned gradients are always float64.
    """
    s_seqs, s_lens = s_batch
    t_seqs, t_lens = t_batch
    B = s_seqs.shape[0]
    if B < 2:
        raise ModelError("batch size must be >= 2")
    width = max(s_seqs.shape[1], t_seqs.shape[1])
    seqs = np.zeros((2 * B, width), dtype=np.uint8)
    seqs[:B, : s_seqs.shape[1]] = s_seqs
    seqs[B:, : t_seqs.shape[1]] = t_seqs
    lens = np.concatenate([s_lens, t_lens]).astype(np.int64)
    d = np.asarray(d, dtype=np.float64)

    cfg = params.config
    W = params.weights
    y, (mask, lens, cache, pooled) = _trunk(params, seqs, lens, keep_cache=True, dtype=dtype)
    xhat, mu, var, inv = _batch_norm_train(y)
    out = xhat * W["bn.scale"] if cfg.bn_scale else xhat
    u, v = out[:B], out[B:]
    diff = u - v
    d_hat = np.einsum("ij,ij->i", diff, diff)
    losses, g = _loss_grad(d, d_hat, loss)
    total = float(losses.mean())
    if not np.isfinite(total):
        raise Divergence(f"non-finite loss {total}")

    dd = (2.0 / B) * g[:, None] * diff
    dout = np.concatenate([dd, -dd])
    N = 2 * B
    grads = {}
    if cfg.bn_scale:
        grads["bn.scale"] = (dout * xhat).sum(axis=0)
        dxhat = dout * W["bn.scale"]
    else:
        dxhat = dout
    dy = inv * (dxhat - dxhat.mean(axis=0) - xhat * (dxhat * xhat).mean(axis=0))

    grads["proj.w"] = pooled.T @ dy
    grads["proj.b"] = dy.sum(axis=0)
    dpooled = dy @ W["proj.w"].T
    dpooled = (dpooled / lens[:, None]).astype(dtype)
    dh = np.broadcast_to(dpooled[:, None, :], (N, width, cfg.channels)) * mask[..., None]
    for i in range(cfg.layers - 1, -1, -1):
        cols, z = cache[i]
        dz = dh * (z > 0)
        wname = f"conv{i}.w"
        flat_cols = cols.reshape(-1, cols.shape[2])
        flat_dz = dz.reshape(-1, dz.shape[2])
        grads[wname] = (flat_cols.T @ flat_dz).astype(np.float64)
        grads[f"conv{i}.b"] = flat_dz.sum(axis=0, dtype=np.float64)
        if i > 0:
            dcols = (flat_dz @ W[wname].T.astype(dtype)).reshape(cols.shape)
            dh = _col2im(dcols, cfg.kernel, cfg.channels) * mask[..., None]
    return total, grads, {"mean": mu, "var": var, "d_hat": d_hat, "batch": N}


# ----------------------------------------------------------------- training


def sample_training_pairs(n: int, count: int, rng: np.random.Generator, q: int = 4, mix=(0.4, 0.4, 0.2)):
    """Draw ``count`` (anchor, partner, distance) triples as padded batches.

    Partners come from three categories: one random edit of the anchor,
    two random edits (zero-distance results redrawn), or an independent
    uniform sequence of length ``n``. Returns ``(s, s_lens, t, t_lens, d, cat)``.
    """
    s = rng.integers(q, size=(count, n)).astype(np.uint8)
    s_lens = np.full(count, n, dtype=np.int64)
    cat = rng.choice(3, size=count, p=np.asarray(mix))
    t = np.zeros((count, n + 2), dtype=np.uint8)
    t_lens = np.full(count, n, dtype=np.int64)

    one, ol = lev.random_edits(s, s_lens, rng, q)
    two, tl = lev.random_edits(one, ol, rng, q)
    uni = rng.integers(q, size=(count, n)).astype(np.uint8)

    sel = cat == 0
    t[sel, : n + 1] = one[sel]
    t_lens[sel] = ol[sel]
    sel = cat == 1
    t[sel] = two[sel]
    t_lens[sel] = tl[sel]
    sel = cat == 2
    t[sel, :n] = uni[sel]

    d = lev.pairwise_distances(s, s_lens, t, t_lens).astype(np.int64)
    # redraw partners identical to their anchor (cancelled edits, equal draws)
    while True:
        bad = np.flatnonzero(d == 0)
        if bad.size == 0:
            break
        two_bad = bad[cat[bad] == 1]
        o2, l2 = lev.random_edits(s[two_bad], s_lens[two_bad], rng, q)
        t2, tl2 = lev.random_edits(o2, l2, rng, q)
        t[two_bad] = t2
        t_lens[two_bad] = tl2
        uni_bad = bad[cat[bad] == 2]
        t[uni_bad] = 0
        t[uni_bad, :n] = rng.integers(q, size=(uni_bad.size, n))
        d[bad] = lev.pairwise_distances(s[bad], s_lens[bad], t[bad], t_lens[bad])
    return s, s_lens, t, t_lens, d, cat


def sample_training_pair(n: int, rng: np.random.Generator, q: int = 4, mix=(0.4, 0.4, 0.2)):
    s, sl, t, tl, d, _ = sample_training_pairs(n, 1, rng, q, mix)
    return lev.to_text(s[0, : sl[0]]), lev.to_text(t[0, : tl[0]]), int(d[0])


class Adam:
    def __init__(self, shapes: dict[str, tuple[int, ...]], lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros(s) for k, s in shapes.items()}
        self.v = {k: np.zeros(s) for k, s in shapes.items()}
        self.t = 0

    def step(self, weights: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float | None = None):
        lr = self.lr if lr is None else lr
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            weights[k] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    callback=None,
    checkpoint=None,
) -> ModelParams:
    """Fit the embedding with Adam on freshly sampled pairs.

    Deterministic for a given seed. ``callback(step, loss)`` is invoked every
    ``log_every`` steps when given; ``checkpoint(step, params)`` likewise,
    with the live parameters (copy them to keep a snapshot).
    """
    if model_cfg.max_len < train_cfg.n + 2:
        raise ValueError(f"max_len {model_cfg.max_len} too small for n={train_cfg.n} (needs n+2)")
    root = np.random.SeedSequence(train_cfg.seed)
    init_seq, data_seq = root.spawn(2)
    params = init_params(model_cfg, np.random.default_rng(init_seq))
    data_rng = np.random.default_rng(data_seq)
    opt = Adam(param_shapes(model_cfg), train_cfg.lr, train_cfg.beta1, train_cfg.beta2, train_cfg.adam_eps)
    mom = train_cfg.bn_momentum
    running_loss = None
    for step in range(1, train_cfg.steps + 1):
        s, sl, t, tl, d, _ = sample_training_pairs(
            train_cfg.n, train_cfg.batch_size, data_rng, model_cfg.q, train_cfg.mix
        )
        loss, grads, stats = loss_and_gradient(
            params, (s, sl), (t, tl), d, train_cfg.loss, dtype=np.dtype(train_cfg.precision)
        )
        lr = train_cfg.lr
        if train_cfg.lr_final is not None:
            frac = (step - 1) / max(1, train_cfg.steps - 1)
            lr = train_cfg.lr * (train_cfg.lr_final / train_cfg.lr) ** frac
        opt.step(params.weights, grads, lr)
        N = stats["batch"]
        params.running_mean = (1 - mom) * params.running_mean + mom * stats["mean"]
        params.running_var = (1 - mom) * params.running_var + mom * stats["var"] * N / (N - 1)
        params.step = step
        running_loss = loss if running_loss is None else 0.98 * running_loss + 0.02 * loss
        if step % train_cfg.log_every == 0 or step == train_cfg.steps:
            if callback is not None:
                callback(step, running_loss)
            if checkpoint is not None:
                checkpoint(step, params)
    params.meta = {"train": asdict(train_cfg), "model": asdict(model_cfg)}
    return params


def evaluate(params: ModelParams, n: int, count: int, seed: int) -> dict:
    """Held-out quality: mean |d_hat - 1| on d=1 pairs, share of far pairs with d_hat >= 2."""
    rng = np.random.default_rng(seed)
    s, sl, t, tl, d, _ = sample_training_pairs(n, count, rng, params.config.q)
    u = embed_many(params, s, sl)
    v = embed_many(params, t, tl)
    d_hat = ((u - v) ** 2).sum(axis=1)
    near = d == 1
    far = d >= 2
    return {
        "near_pairs": int(near.sum()),
        "far_pairs": int(far.sum()),
        "near_mean_abs_err": float(np.abs(d_hat[near] - 1).mean()),
        "far_separated": float((d_hat[far] >= 2).mean()),
    }


# -------------------------------------------------------------- persistence

_CFG_FIELDS = ("q", "m", "layers", "channels", "kernel", "max_len", "bn_scale")


def serialize_params(params: ModelParams) -> bytes:
    """Binary layout (all little-endian):

    magic (8 bytes) | version u32 | seven u32 config fields (q, m, layers,
    channels, kernel, max_len, bn_scale) | step u64 | weights as float64 in
    ``param_names`` order, each row-major | running mean | running var.
    """
    cfg = params.config
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    buf.write(struct.pack("<7I", *(int(getattr(cfg, f)) for f in _CFG_FIELDS)))
    buf.write(struct.pack("<Q", params.step))
    for name in param_names(cfg):
        buf.write(np.ascontiguousarray(params.weights[name], dtype="<f8").tobytes())
    buf.write(np.ascontiguousarray(params.running_mean, dtype="<f8").tobytes())
    buf.write(np.ascontiguousarray(params.running_var, dtype="<f8").tobytes())
    return buf.getvalue()


def deserialize_params(data: bytes, expect: ModelConfig | None = None) -> ModelParams:
    head = 8 + 4 + 28 + 8
    if len(data) < head:
        raise ModelError("truncated model file")
    if data[:8] != MAGIC:
        raise ModelError("bad magic: not a model file")
    (version,) = struct.unpack_from("<I", data, 8)
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version}")
    fields = dict(zip(_CFG_FIELDS, struct.unpack_from("<7I", data, 12)))
    fields["bn_scale"] = bool(fields["bn_scale"])
    cfg = ModelConfig(**fields)
    if expect is not None and cfg != expect:
        raise ConfigMismatch(f"model file has {cfg}, expected {expect}")
    (step,) = struct.unpack_from("<Q", data, 40)
    shapes = param_shapes(cfg)
    total = sum(int(np.prod(s)) for s in shapes.values()) + 2 * cfg.m
    if len(data) != head + 8 * total:
        raise ModelError(f"model file size {len(data)} != expected {head + 8 * total}")
    flat = np.frombuffer(data, dtype="<f8", offset=head).astype(np.float64)
    weights, pos = {}, 0
    for name in param_names(cfg):
        size = int(np.prod(shapes[name]))
        weights[name] = flat[pos : pos + size].reshape(shapes[name]).copy()
        pos += size
    rmean = flat[pos : pos + cfg.m].copy()
    rvar = flat[pos + cfg.m : pos + 2 * cfg.m].copy()
    if not np.all(np.isfinite(flat)):
        raise ModelError("model file contains non-finite values")
    if np.any(rvar <= 0):
        raise ModelError("running variance must be positive")
    return ModelParams(cfg, weights, rmean, rvar, int(step))


def save_params(params: ModelParams, path: str | Path, manifest: dict | None = None) -> Path:
    """Write the weight file and a JSON manifest next to it (``<path>.json``)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = serialize_params(params)
    path.write_bytes(data)
    info = dict(params.meta)
    info.update(manifest or {})
    # fields describing this exact file always win over carried-over metadata
    info.update(
        {
            "format": "dodo-embedding",
            "version": FORMAT_VERSION,
            "sha256": hashlib.sha256(data).hexdigest(),
            "config": asdict(params.config),
            "step": params.step,
        }
    )
    Path(str(path) + ".json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    return path


def load_params(path: str | Path, expect: ModelConfig | None = None) -> ModelParams:
    path = Path(path)
    params = deserialize_params(path.read_bytes(), expect)
    side = Path(str(path) + ".json")
    if side.exists():
        params.meta = json.loads(side.read_text())
    return params


def file_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
