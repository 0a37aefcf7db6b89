import hashlib
import json
import math

import numpy as np
import pytest

from dodo import levenshtein as lev
from dodo import model as M
from oracles import central_difference

TINY = M.ModelConfig(q=4, m=4, layers=2, channels=4, kernel=3, max_len=7)


@pytest.fixture
def tiny_params():
    rng = np.random.default_rng(1)
    p = M.init_params(TINY, rng)
    for name in p.weights:
        if name.endswith(".b"):
            p.weights[name] = rng.normal(0, 0.1, size=p.weights[name].shape)
    return p


def test_pnll_values():
    assert M.pnll_loss(1, 1.0) == pytest.approx(1.0)
    assert M.pnll_loss(2, 2.0) == pytest.approx(2 - 2 * math.log(2))
    grid = np.linspace(0.2, 6, 2901)
    for d in (1, 2, 3):
        assert grid[np.argmin(M.pnll_loss(d, grid))] == pytest.approx(d, abs=2e-3)


def test_revised_loss_cases():
    assert M.revised_loss(1, 0.5) == pytest.approx(0.5 - math.log(0.5))
    assert M.revised_loss(3, 2.5) == 0.0
    assert M.revised_loss(3, 1.5) == pytest.approx(1.5 - 2 * math.log(1.5))
    d_hat = np.geomspace(1e-3, 50, 200)
    assert np.allclose(M.revised_loss(np.ones_like(d_hat, dtype=int), d_hat), M.pnll_loss(1, d_hat))


def test_loss_clamps_at_zero():
    assert np.isfinite(M.pnll_loss(1, 0.0))
    assert M.pnll_loss(1, 0.0) == pytest.approx(1e-8 - math.log(1e-8))


def test_sq_euclidean():
    assert M.sq_euclidean([0, 0], [1, 1]) == 2.0
    rng = np.random.default_rng(0)
    u, v = rng.normal(size=8), rng.normal(size=8)
    assert M.sq_euclidean(u, u) == 0.0
    assert M.sq_euclidean(u, v) == M.sq_euclidean(v, u) > 0
    with pytest.raises(ValueError):
        M.sq_euclidean([0, 0], [0, 0, 0])


def test_embed_shapes_and_determinism(tiny_params):
    for s in ("01230", "012301", "0123012"):
        assert M.embed(tiny_params, s).shape == (4,)
    assert np.array_equal(M.embed(tiny_params, "01230"), M.embed(tiny_params, "01230"))
    with pytest.raises(M.ModelError):
        M.embed(tiny_params, "01230123")
    with pytest.raises(M.ModelError):
        M.embed(None, "0")


def test_embed_independent_of_batch(tiny_params):
    rng = np.random.default_rng(2)
    seqs = rng.integers(4, size=(50, 7)).astype(np.uint8)
    lens = rng.integers(4, 8, size=50)
    batch = M.embed_batch(tiny_params, seqs, lens)
    for i in (0, 17, 49):
        alone = M.embed(tiny_params, seqs[i, : lens[i]])
        assert np.allclose(batch[i], alone, atol=1e-12)


def test_zero_conv_weights_give_constant_embedding(tiny_params):
    p = tiny_params.copy()
    for name in p.weights:
        if name.startswith("conv"):
            p.weights[name][:] = 0
    p.weights["proj.b"][:] = 0
    outs = {tuple(np.round(M.embed(p, s), 12)) for s in ("0", "0123", "333333", "1212")}
    assert len(outs) == 1


def test_batch_norm_train_statistics(tiny_params):
    rng = np.random.default_rng(3)
    seqs = rng.integers(4, size=(64, 6)).astype(np.uint8)
    out = M.embed_batch(tiny_params, seqs, np.full(64, 6), train=True)
    assert np.all(np.abs(out.mean(axis=0)) < 1e-6)
    assert np.all(np.abs(out.var(axis=0) - 1) < 1e-6 + M.BN_EPS / out.var(axis=0).min())


def test_sample_pair_categories():
    rng = np.random.default_rng(4)
    s, sl, t, tl, d, cat = M.sample_training_pairs(8, 10_000, rng)
    check = lev.pairwise_distances(s, sl, t, tl)
    assert np.array_equal(check, d)
    assert np.all(d[cat == 0] == 1)
    assert set(np.unique(d[cat == 1])) <= {1, 2}
    far = (d[cat == 2] >= 2).mean()
    assert far > 0.99
    assert np.all(d >= 1)
    a, b, dd = M.sample_training_pair(7, np.random.default_rng(0))
    assert lev.distance(a, b) == dd and len(a) == 7


def _batch(rng, n=5, count=8):
    s, sl, t, tl, d, _ = M.sample_training_pairs(n, count, rng)
    return (s, sl), (t, tl), d


@pytest.mark.parametrize("loss", ["revised", "pnll"])
def test_gradient_matches_finite_differences(tiny_params, loss):
    S, T, d = _batch(np.random.default_rng(5))
    _, grads, stats = M.loss_and_gradient(tiny_params, S, T, d, loss)
    # keep d_hat away from the indicator's jump at 2
    assert np.all(np.abs(stats["d_hat"] - 2) > 1e-3)

    def f():
        return M.loss_and_gradient(tiny_params, S, T, d, loss)[0]

    for name, w in tiny_params.weights.items():
        num = central_difference(f, w)
        if name == "proj.b":
            # a bias in front of affine-free batch norm has an identically zero gradient
            assert np.abs(grads[name]).max() < 1e-12 and np.abs(num).max() < 1e-8
            continue
        rel = np.linalg.norm(num - grads[name]) / (np.linalg.norm(num) + np.linalg.norm(grads[name]))
        assert rel < 1e-4, name


def test_zero_gradient_when_far_pairs_separated(tiny_params):
    rng = np.random.default_rng(6)
    S, T, d = _batch(rng, count=16)
    _, _, stats = M.loss_and_gradient(tiny_params, S, T, d)
    far = (d >= 2) & (stats["d_hat"] >= 2)
    sel = np.flatnonzero(far)
    S2 = (S[0][sel], S[1][sel])
    T2 = (T[0][sel], T[1][sel])
    loss, grads, st = M.loss_and_gradient(tiny_params, S2, T2, d[sel])
    if np.all(st["d_hat"] >= 2):
        assert loss == 0.0
        assert all(np.all(g == 0) for g in grads.values())


def test_training_is_deterministic_and_loss_falls():
    cfg = M.ModelConfig(q=4, m=8, layers=2, channels=16, max_len=9)
    tc = M.TrainConfig(n=7, steps=200, batch_size=64, lr=3e-3, seed=7, log_every=50)
    trace = []
    a = M.train(tc, cfg, callback=lambda s, l: trace.append(l))
    b = M.train(tc, cfg)
    assert M.serialize_params(a) == M.serialize_params(b)
    assert trace[-1] < trace[0]


def test_train_rejects_short_max_len():
    with pytest.raises(ValueError):
        M.train(M.TrainConfig(n=7, steps=1), M.ModelConfig(max_len=8))


def test_config_validation():
    with pytest.raises(ValueError):
        M.ModelConfig(kernel=4)
    with pytest.raises(ValueError):
        M.TrainConfig(batch_size=1)
    with pytest.raises(ValueError):
        M.TrainConfig(mix=(0.5, 0.5, 0.5))


def test_save_load_roundtrip(tmp_path, tiny_params):
    path = M.save_params(tiny_params, tmp_path / "m.bin")
    loaded = M.load_params(path)
    assert M.serialize_params(loaded) == M.serialize_params(tiny_params)
    M.save_params(loaded, tmp_path / "m2.bin")
    assert (tmp_path / "m.bin").read_bytes() == (tmp_path / "m2.bin").read_bytes()
    assert (tmp_path / "m.bin.json").exists()


def test_load_errors(tmp_path, tiny_params):
    data = M.serialize_params(tiny_params)
    (tmp_path / "bad.bin").write_bytes(b"XXXXXXXX" + data[8:])
    with pytest.raises(M.ModelError):
        M.load_params(tmp_path / "bad.bin")
    (tmp_path / "short.bin").write_bytes(data[:-8])
    with pytest.raises(M.ModelError):
        M.load_params(tmp_path / "short.bin")
    (tmp_path / "ok.bin").write_bytes(data)
    with pytest.raises(M.ConfigMismatch):
        M.load_params(tmp_path / "ok.bin", expect=M.ModelConfig(q=4, m=8, layers=2, channels=4, max_len=7))


def test_manifest_hash_tracks_rewritten_weights(tmp_path, tiny_params):
    M.save_params(tiny_params, tmp_path / "a.bin", manifest={"note": "x"})
    loaded = M.load_params(tmp_path / "a.bin")
    loaded.weights["proj.w"][0, 0] += 1.0
    M.save_params(loaded, tmp_path / "b.bin")
    info = json.loads((tmp_path / "b.bin.json").read_text())
    assert info["sha256"] == hashlib.sha256((tmp_path / "b.bin").read_bytes()).hexdigest()
    assert info["note"] == "x"
