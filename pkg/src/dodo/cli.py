"""Command-line entry point: ``dodo <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import codebook as C
from . import levenshtein as lev
from . import model as M
from . import rates
from .decoder import SegmentDecoder, bench_correct
from .transmission import simulate

log = logging.getLogger("dodo")


class CliError(Exception):
    pass


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _load_model(path: str | None) -> M.ModelParams:
    if not path:
        raise CliError("--model is required")
    p = Path(path)
    if not p.exists():
        raise CliError(f"model file not found: {p}")
    return M.load_params(p)


def _load_book(path: str | None) -> C.Codebook:
    if not path:
        raise CliError("--codebook is required")
    p = Path(path)
    if not p.exists():
        raise CliError(f"codebook file not found: {p}")
    return C.load_codebook(p)


# ------------------------------------------------------------------ commands


def cmd_train(args) -> int:
    model_cfg = M.ModelConfig(
        q=args.q,
        m=args.m,
        layers=args.layers,
        channels=args.channels,
        kernel=args.kernel,
        max_len=args.n + 2,
        bn_scale=not args.no_bn_scale,
    )
    train_cfg = M.TrainConfig(
        n=args.n,
        batch_size=args.batch,
        steps=args.steps,
        lr=args.lr,
        lr_final=args.lr_final,
        loss=args.loss,
        mix=tuple(args.mix),
        seed=args.seed,
        log_every=args.log_every,
    )
    t0 = time.time()
    params = M.train(
        train_cfg,
        model_cfg,
        callback=lambda s, l: log.info("step %d loss %.4f (%.0fs)", s, l, time.time() - t0),
    )
    out = Path(args.out)
    quality = M.evaluate(params, args.n, 20_000, args.seed + 1)
    M.save_params(params, out, manifest={"heldout": quality})
    log.info("held-out %s", quality)
    print(out)
    return 0


def _summary(paths: list[Path]) -> dict:
    sizes = [len(C.load_codebook(p)) for p in paths]
    return {
        "runs": len(sizes),
        "sizes": sizes,
        "mean": statistics.fmean(sizes),
        "std": statistics.pstdev(sizes) if len(sizes) > 1 else 0.0,
        "max": max(sizes),
        "files": [str(p) for p in paths],
    }


def cmd_search(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if args.method == "degs":
        models = args.model or []
        if not models:
            raise CliError("--model is required for degs")
        for run in range(args.runs):
            mpath = models[run % len(models)]
            params = _load_model(mpath)
            # with fewer models than runs, repeated models differ only in tie order
            tie = None if len(models) >= args.runs else args.seed + run
            cb = C.degs_search(args.n, params, ridge=args.ridge, tie_seed=tie, model_hash=M.file_hash(mpath))
            paths.append(C.save_codebook(cb, out / f"degs_n{args.n}_run{run}.txt"))
            log.info("degs run %d: %d codewords", run, len(cb))
    elif args.method == "rand":
        for run in range(args.runs):
            cb = C.random_search(args.n, args.seed + run, q=args.q)
            paths.append(C.save_codebook(cb, out / f"rand_n{args.n}_run{run}.txt"))
            log.info("rand run %d: %d codewords", run, len(cb))
    else:
        cb = C.vt_codebook(args.n)
        paths.append(C.save_codebook(cb, out / f"vt_n{args.n}.txt"))
    for p in paths:
        book = C.load_codebook(p)
        if book.method != "vt" and not C.verify_min_distance(book, 3):
            raise CliError(f"{p} violates the minimum distance")
    summary = {"method": args.method, "n": args.n, **_summary(paths)}
    _write_json(out / f"summary_{args.method}_n{args.n}.json", summary)
    print(f"{args.method} n={args.n}: {summary['mean']:.1f} ± {summary['std']:.1f}, max {summary['max']}")
    return 0


def cmd_verify(args) -> int:
    try:
        cb = _load_book(args.codebook)
    except C.CodebookFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    check = C.verify_min_distance(cb, args.dmin)
    if check:
        print(f"ok: {len(cb)} codewords, n={cb.n}, minimum distance >= {args.dmin}")
        return 0
    a, b, d = check.witness
    print(f"violation: {a} {b} distance {d} < {args.dmin}")
    return 1


def cmd_rate_table(args) -> int:
    best: dict[int, tuple[int, str]] = {}
    for s in args.summary or []:
        summary = json.loads(Path(s).read_text())
        for f in summary["files"]:
            cb = C.load_codebook(f)
            if cb.n not in best or len(cb) > best[cb.n][0]:
                best[cb.n] = (len(cb), f)
    for f in args.codebook or []:
        cb = C.load_codebook(f)
        if cb.n not in best or len(cb) > best[cb.n][0]:
            best[cb.n] = (len(cb), f)
    rows = [rates.rate_row(n, size, src) for n, (size, src) in sorted(best.items())]
    if args.paper_max:
        rows += [rates.rate_row(n, s, "paper-max") for n, s in sorted(rates.PAPER_MAX_SIZES.items())]
    text = rates.rows_to_csv(rows)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_bench_correct(args) -> int:
    cb = _load_book(args.codebook)
    params = _load_model(args.model)
    records = bench_correct(
        cb,
        params,
        ks=args.k,
        trials=args.trials,
        seed=args.seed,
        timing_trials=args.timing_trials,
    )
    mh = M.file_hash(args.model)
    for r in records:
        r["model"] = mh
    report = {"records": records}
    if args.out:
        _write_json(Path(args.out), report)
    for r in records:
        print(json.dumps(r, sort_keys=True))
    return 0


def cmd_export_embeddings(args) -> int:
    params = _load_model(args.model)
    book = _load_book(args.codebook) if args.codebook else None
    q = book.q if book else params.config.q
    if q > params.config.q:
        raise CliError(f"codebook alphabet {q} exceeds the model's {params.config.q}")
    if args.all or book is None:
        n = args.n if args.n else (book.n if book else None)
        if n is None:
            raise CliError("--n or --codebook is required")
        rows = lev.all_sequences(n, q)
        source = f"all:{q}^{n}"
    else:
        n = book.n
        rows = book.arrays()
        source = f"codebook:{args.codebook}"
    U = M.embed_many(params, rows)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    U.astype("<f4").tofile(str(out) + ".f32")
    flags = np.zeros(rows.shape[0], dtype=np.uint8)
    if book is not None:
        codes = lev.arrays_to_codes(rows, q)
        member = np.isin(codes, book.codes())
        flags |= member.astype(np.uint8)
        if rows.shape[0] == q**n:
            isolated = ~C.covered_mask(book, 2)
            flags |= isolated[codes].astype(np.uint8) << 1
    flags.tofile(str(out) + ".flags.u8")
    _write_json(
        Path(str(out) + ".json"),
        {
            "rows": int(rows.shape[0]),
            "m": int(U.shape[1]),
            "dtype": "float32-le",
            "order": "row-major",
            "source": source,
            "n": n,
            "q": q,
            "flags": {"bit0": "codeword", "bit1": "isolated (distance > 2 from every codeword)"},
            "codebook": args.codebook,
            "model": M.file_hash(args.model),
        },
    )
    print(f"{rows.shape[0]} x {U.shape[1]} -> {out}.f32")
    return 0


def read_embedding_matrix(base: str | Path) -> tuple[np.ndarray, dict]:
    meta = json.loads(Path(str(base) + ".json").read_text())
    data = np.fromfile(str(base) + ".f32", dtype="<f4")
    return data.reshape(meta["rows"], meta["m"]), meta


def cmd_channel_sim(args) -> int:
    cb = _load_book(args.codebook)
    params = _load_model(args.model)
    dec = SegmentDecoder(cb, params)
    channel = lev.ChannelConfig(args.p_ins, args.p_del, args.p_sub, args.seed)
    report = simulate(dec, channel, args.messages, args.segments, args.k, args.resync)
    report["channel"] = asdict(channel)
    report["n"] = cb.n
    if args.out:
        _write_json(Path(args.out), report)
    print(
        f"message success {report['message_success_rate']:.4f}, "
        f"segment success {report['segment_success_rate']:.4f} over {args.messages} messages"
    )
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dodo", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train an embedding model")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--q", type=int, default=4)
    t.add_argument("--m", type=int, default=64)
    t.add_argument("--layers", type=int, default=10)
    t.add_argument("--channels", type=int, default=64)
    t.add_argument("--kernel", type=int, default=3)
    t.add_argument("--no-bn-scale", action="store_true", help="batch norm without the learned scale")
    t.add_argument("--batch", type=int, default=256)
    t.add_argument("--steps", type=int, default=50_000)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--lr-final", type=float, default=None)
    t.add_argument("--loss", choices=["revised", "pnll"], default="revised")
    t.add_argument(
        "--mix",
        type=float,
        nargs=3,
        default=[0.4, 0.4, 0.2],
        metavar=("ONE", "TWO", "UNIFORM"),
        help="shares of one-edit, two-edit and independent pairs per batch",
    )
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log-every", type=int, default=500)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("search", help="construct codebooks")
    s.add_argument("--method", choices=["degs", "rand", "vt"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=int, default=4)
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ridge", type=float, default=None)
    s.add_argument("--model", action="append", help="model file; repeat to give one per run")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", help="check a codebook's minimum distance")
    v.add_argument("--codebook", required=True)
    v.add_argument("--dmin", type=int, default=3)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("rate-table", help="code rates vs reference redundancy curves (CSV)")
    r.add_argument("--summary", action="append")
    r.add_argument("--codebook", action="append")
    r.add_argument("--paper-max", action="store_true", help="append rows for the published best sizes")
    r.add_argument("--out")
    r.set_defaults(func=cmd_rate_table)

    b = sub.add_parser("bench-correct", help="segment-correction failures and timing (JSON)")
    b.add_argument("--codebook", required=True)
    b.add_argument("--model", required=True)
    b.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    b.add_argument("--trials", type=int, default=10**6)
    b.add_argument("--timing-trials", type=int, default=10**5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench_correct)

    e = sub.add_parser("export-embeddings", help="write embeddings as a float32 matrix")
    e.add_argument("--model", required=True)
    e.add_argument("--n", type=int)
    e.add_argument("--codebook")
    e.add_argument("--all", action="store_true", help="export every length-n sequence")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export_embeddings)

    c = sub.add_parser("channel-sim", help="segmented transmission over an IDS channel")
    c.add_argument("--codebook", required=True)
    c.add_argument("--model", required=True)
    c.add_argument("--p-ins", type=float, default=0.0)
    c.add_argument("--p-del", type=float, default=0.0)
    c.add_argument("--p-sub", type=float, default=0.01)
    c.add_argument("--messages", type=int, default=1000)
    c.add_argument("--segments", type=int, default=8)
    c.add_argument("--k", type=int, default=4)
    c.add_argument("--resync", choices=["optimal", "greedy"], default="optimal")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_channel_sim)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (CliError, C.CodebookFormatError, M.ModelError, lev.BudgetExceeded, ValueError) as exc:
        print(f"dodo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
