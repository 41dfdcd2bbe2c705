"""Command-line interface.

Subcommands: generate (synthetic graphs), split (train/test partition), fit
(collapsed Gibbs chains, snapshots to JSON), eval (held-out link prediction
metrics), summarize (posterior and degree summaries).

Every option can also be supplied through a `key=value` config file
(--config); explicit flags win over the file, the file wins over defaults.
Each run echoes its fully resolved configuration to stdout, so a run can be
reproduced from its log alone. Errors print one `error: ...` line on stderr
and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .crp import rng_from_seed
from .evalkit import (auc_pr, auc_roc, block_summary, degree_distribution_csv,
                      degree_distribution_svg, format_block_summary,
                      sample_negatives, score_edges)
from .genmodel import gen_mdnd, gen_ndmdnd, make_synthetic_benchmark
from .gibbs import (FitConfig, HyperParams, fit, save_checkpoint,
                    snapshot_from_dict, snapshot_to_dict)
from .netcore import (MultiGraph, SplitSpec, Vocabulary, load_edge_list,
                      save_edge_list, split_edges)

log = logging.getLogger("crpblocks")

SNAPSHOT_FORMAT = "crpblocks-snapshots v1"

_REQUIRED = object()


def _int_or_all(text: str) -> int | None:
    if str(text).strip().lower() == "all":
        return None
    return int(text)


_HYPER = {
    "tau_pair": (float, 100.0, "pair-table concentration"),
    "tau_block": (float, 10.0, "block-table concentration (each role)"),
    "gamma_block": (float, 10.0, "block-menu concentration"),
    "tau_node": (float, 10.0, "node-table concentration (per block)"),
    "gamma_node": (float, 10.0, "base-measure concentration"),
}

_OPTIONS: dict[str, dict[str, tuple]] = {
    "generate": {
        "preset": (str, None, "benchmark preset: mixed or diagonal"),
        "model": (str, "sparse", "generator without preset: mdnd or ndmdnd"),
        "num_edges": (int, None, "edges to draw (forward models)"),
        "seed": (int, 0, "random seed"),
        "out": (str, _REQUIRED, "edge-list output path"),
        "truth": (str, None, "write planted assignments / chain here"),
        **_HYPER,
    },
    "split": {
        "input": (str, _REQUIRED, "edge-list input path"),
        "train_out": (str, _REQUIRED, "training edge-list output"),
        "test_out": (str, _REQUIRED, "test edge-list output"),
        "train_fraction": (float, 0.8, "fraction of edges assigned to train"),
        "seed": (int, 0, "random seed"),
        "weight_mode": (str, "multiplicity", "weight handling: multiplicity, round, ignore"),
    },
    "fit": {
        "input": (str, _REQUIRED, "training edge-list path"),
        "out": (str, _REQUIRED, "snapshots JSON output"),
        "model": (str, "ndmdnd", "ndmdnd or mdnd"),
        "epochs": (int, 100, "sampler epochs"),
        "burn_in": (int, 0, "epochs discarded before collecting"),
        "thin": (int, 1, "epochs between collected snapshots"),
        "t1": (int, None, "edge updates per epoch (default: one full pass)"),
        "t2": (int, None, "block-table updates per epoch (default: all tables)"),
        "chains": (int, 1, "independent chains, pooled snapshots"),
        "seed": (int, 0, "random seed"),
        "trace": (str, None, "per-epoch trace CSV output"),
        "checkpoint": (str, None, "final-state checkpoint (chains=1 only)"),
        "weight_mode": (str, "multiplicity", "weight handling for the input"),
        **_HYPER,
    },
    "eval": {
        "snapshots": (str, _REQUIRED, "snapshots JSON from fit"),
        "train": (str, _REQUIRED, "training edge list (excluded from negatives)"),
        "test": (str, _REQUIRED, "held-out edge list to score"),
        "out": (str, _REQUIRED, "metrics JSON output"),
        "negatives": (_int_or_all, 100000, "negative pairs to sample, or 'all'"),
        "seed": (int, 0, "random seed for negative sampling"),
        "weight_mode": (str, "multiplicity", "weight handling for the inputs"),
    },
    "summarize": {
        "snapshots": (str, _REQUIRED, "snapshots JSON from fit"),
        "index": (int, -1, "snapshot to summarize (python indexing)"),
        "top": (int, 3, "top nodes listed per block"),
        "out": (str, None, "summary text output (default: stdout)"),
        "input": (str, None, "edge list for degree exports"),
        "degree_csv": (str, None, "degree histogram CSV output"),
        "degree_svg": (str, None, "degree histogram SVG output"),
        "weight_mode": (str, "multiplicity", "weight handling for --input"),
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crpblocks",
        description="Edge-exchangeable block models: generate, fit, evaluate.")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, table in _OPTIONS.items():
        p = sub.add_parser(cmd)
        p.add_argument("--config", default=None,
                       help="key=value file supplying defaults for any option")
        for key, (_conv, default, help_text) in table.items():
            flag = "--" + key.replace("_", "-")
            if default is _REQUIRED:
                help_text += " (required)"
            p.add_argument(flag, dest=key, default=None, help=help_text)
    return parser


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _resolve(cmd: str, args: argparse.Namespace) -> dict:
    table = _OPTIONS[cmd]
    file_vals = _read_config(args.config) if args.config else {}
    for key in file_vals:
        if key not in table:
            raise ValueError(f"unknown config key {key!r} for {cmd}")
    opts = {}
    for key, (conv, default, _help) in table.items():
        raw = getattr(args, key)
        if raw is None and key in file_vals:
            raw = file_vals[key]
        if raw is None:
            if default is _REQUIRED:
                raise ValueError(f"missing required option --{key.replace('_', '-')}")
            opts[key] = default
        else:
            try:
                opts[key] = conv(raw)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"bad value for --{key.replace('_', '-')}: {raw!r}") from exc
    return opts


def _echo(cmd: str, opts: dict) -> None:
    print(f"# {cmd} configuration")
    for key in sorted(opts):
        val = opts[key]
        print(f"{key}={'' if val is None else val}")


def _hyperparams(opts: dict) -> HyperParams:
    return HyperParams(**{k: opts[k] for k in _HYPER})


# -- generate ------------------------------------------------------------


def _cmd_generate(opts: dict) -> int:
    if opts["preset"]:
        g, truth = make_synthetic_benchmark(opts["preset"], opts["seed"])
        save_edge_list(g, opts["out"])
        if opts["truth"]:
            truth.save(opts["truth"])
    else:
        model = opts["model"]
        if model not in ("mdnd", "ndmdnd"):
            raise ValueError("without --preset, --model must be mdnd or ndmdnd")
        if not opts["num_edges"]:
            raise ValueError("--num-edges is required for forward model draws")
        gen = gen_mdnd if model == "mdnd" else gen_ndmdnd
        rng = rng_from_seed(opts["seed"], f"generate-{model}")
        draw = gen(_hyperparams(opts), opts["num_edges"], rng)
        g = draw.graph
        save_edge_list(g, opts["out"])
        if opts["truth"]:
            draw.save_chain(opts["truth"])
    print(f"wrote {g.num_edges} edges over {g.num_nodes} nodes to {opts['out']}")
    return 0


# -- split ---------------------------------------------------------------


def _cmd_split(opts: dict) -> int:
    g = load_edge_list(opts["input"], weight_mode=opts["weight_mode"])
    train, test = split_edges(g, SplitSpec(opts["train_fraction"], opts["seed"]))
    save_edge_list(train, opts["train_out"])
    save_edge_list(test, opts["test_out"])
    print(f"split {g.num_edges} edges into {train.num_edges} train / "
          f"{test.num_edges} test")
    return 0


# -- fit -----------------------------------------------------------------


def _fit_chain(graph: MultiGraph, hp: HyperParams, cfg: FitConfig, kind: str,
               chain: int) -> tuple[list[dict], list[list]]:
    rng = rng_from_seed(cfg.seed, f"fit-{kind}-chain{chain}")
    res = fit(graph, hp, cfg, kind=kind, rng=rng)
    snaps = [snapshot_to_dict(s) for s in res.snapshots]
    trace = [[chain, *row] for row in res.trace]
    return snaps, trace


def _cmd_fit(opts: dict) -> int:
    model = opts["model"]
    if model not in ("ndmdnd", "mdnd"):
        raise ValueError("--model must be ndmdnd or mdnd")
    chains = opts["chains"]
    if chains < 1:
        raise ValueError("--chains must be >= 1")
    if opts["checkpoint"] and chains != 1:
        raise ValueError("--checkpoint requires --chains 1")
    g = load_edge_list(opts["input"], weight_mode=opts["weight_mode"])
    hp = _hyperparams(opts)
    cfg = FitConfig(epochs=opts["epochs"], burn_in=opts["burn_in"],
                    thin=opts["thin"], t1=opts["t1"], t2=opts["t2"],
                    seed=opts["seed"])
    snap_dicts: list[dict] = []
    trace_rows: list[list] = []
    if chains == 1:
        rng = rng_from_seed(cfg.seed, f"fit-{model}-chain0")
        res = fit(g, hp, cfg, kind=model, rng=rng)
        snap_dicts = [snapshot_to_dict(s) for s in res.snapshots]
        trace_rows = [[0, *row] for row in res.trace]
        if opts["checkpoint"]:
            save_checkpoint(res.state, opts["checkpoint"])
    else:
        workers = min(chains, os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_fit_chain, g, hp, cfg, model, c)
                       for c in range(chains)]
            for fut in futures:
                snaps, trace = fut.result()
                snap_dicts.extend(snaps)
                trace_rows.extend(trace)
    payload = {
        "format": SNAPSHOT_FORMAT,
        "model": model,
        "labels": g.vocab.labels if g.vocab is not None else None,
        "num_nodes": g.num_nodes,
        "num_train_edges": g.num_edges,
        "hyperparams": {k: float(getattr(hp, k)) for k in _HYPER},
        "config": {"epochs": cfg.epochs, "burn_in": cfg.burn_in,
                   "thin": cfg.thin, "t1": cfg.t1, "t2": cfg.t2,
                   "seed": cfg.seed, "chains": chains},
        "snapshots": snap_dicts,
        "trace": trace_rows,
    }
    with open(opts["out"], "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    if opts["trace"]:
        with open(opts["trace"], "w") as fh:
            fh.write("chain,epoch,num_blocks,num_pair_tables,num_block_tables,log_score\n")
            for row in trace_rows:
                fh.write(",".join(repr(x) if isinstance(x, float) else str(x)
                                  for x in row) + "\n")
    last = trace_rows[-1]
    print(f"fit {model}: {chains} chain(s) x {cfg.epochs} epochs on "
          f"{g.num_edges} edges; {len(snap_dicts)} snapshots; "
          f"final blocks={last[2]} log_score={last[5]:.2f}")
    return 0


# -- eval ----------------------------------------------------------------


def _load_snapshot_file(path: str) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"{path} is not a '{SNAPSHOT_FORMAT}' file")
    if not payload["snapshots"]:
        raise ValueError(f"{path} holds no snapshots (all epochs burned in?)")
    return payload


def _remap_to_vocab(g: MultiGraph, vocab: Vocabulary, role: str) -> MultiGraph:
    """Express g in the fitted vocabulary; unknown nodes become the atom.

    Nodes absent from training carry id J = len(vocab) and are scored
    through the unseen-node atom.
    """
    J = len(vocab)
    lut = np.empty(len(g.vocab.labels) if g.vocab else 0, dtype=np.int64)
    missing = 0
    for i, lab in enumerate(g.vocab.labels):
        if lab in vocab:
            lut[i] = vocab.id_of(lab)
        else:
            lut[i] = J
            missing += 1
    if missing:
        log.warning("%d %s node(s) absent from the fitted vocabulary; "
                    "scored through the unseen atom", missing, role)
    return MultiGraph(lut[g.senders], lut[g.receivers], num_nodes=J + 1)


def _cmd_eval(opts: dict) -> int:
    payload = _load_snapshot_file(opts["snapshots"])
    snaps = [snapshot_from_dict(d) for d in payload["snapshots"]]
    labels = payload.get("labels")
    train = load_edge_list(opts["train"], weight_mode=opts["weight_mode"])
    test = load_edge_list(opts["test"], weight_mode=opts["weight_mode"])
    if labels is not None:
        vocab = Vocabulary.from_labels(labels)
        train = _remap_to_vocab(train, vocab, "train")
        test = _remap_to_vocab(test, vocab, "test")
    # negatives come from the training vocabulary; known pairs are excluded,
    # and pairs touching the atom cannot collide with them anyway
    J = snaps[0].num_nodes
    ss = np.concatenate([train.senders, test.senders])
    rr = np.concatenate([train.receivers, test.receivers])
    seen = (ss < J) & (rr < J)
    full = MultiGraph(ss[seen], rr[seen], num_nodes=J)
    rng = rng_from_seed(opts["seed"], "negatives")
    neg_s, neg_r = sample_negatives(full, opts["negatives"], rng)
    pos_scores = score_edges(snaps, test.senders, test.receivers)
    neg_scores = score_edges(snaps, neg_s, neg_r)
    metrics = {
        "model": payload["model"],
        "num_snapshots": len(snaps),
        "num_test_edges": int(test.num_edges),
        "num_negatives": int(neg_s.shape[0]),
        "auc_roc": auc_roc(pos_scores, neg_scores),
        "auc_pr": auc_pr(pos_scores, neg_scores),
        "mean_test_score": float(pos_scores.mean()),
        "mean_negative_score": float(neg_scores.mean()),
    }
    with open(opts["out"], "w") as fh:
        json.dump(metrics, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"auc_roc={metrics['auc_roc']:.6f} auc_pr={metrics['auc_pr']:.6f} "
          f"({test.num_edges} positives, {neg_s.shape[0]} negatives)")
    return 0


# -- summarize -----------------------------------------------------------


def _cmd_summarize(opts: dict) -> int:
    payload = _load_snapshot_file(opts["snapshots"])
    snaps = payload["snapshots"]
    idx = opts["index"]
    try:
        snap = snapshot_from_dict(snaps[idx])
    except IndexError:
        raise ValueError(f"snapshot index {idx} out of range for {len(snaps)} snapshots")
    labels = payload.get("labels")
    labeler = (lambda v: labels[v]) if labels else str
    text = format_block_summary(block_summary(snap, top=opts["top"]), labeler)
    header = (f"snapshot {idx} of {len(snaps)} (epoch {snap.epoch}, "
              f"model {payload['model']})\n")
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(header + text + "\n")
    else:
        print(header + text)
    if opts["degree_csv"] or opts["degree_svg"]:
        if not opts["input"]:
            raise ValueError("degree exports need --input")
        g = load_edge_list(opts["input"], weight_mode=opts["weight_mode"])
        if opts["degree_csv"]:
            degree_distribution_csv(g, opts["degree_csv"])
        if opts["degree_svg"]:
            degree_distribution_svg(g, opts["degree_svg"])
    return 0


_DISPATCH = {
    "generate": _cmd_generate,
    "split": _cmd_split,
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "summarize": _cmd_summarize,
}


def main(argv=None) -> int:
    level = os.environ.get("CRPBLOCKS_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        opts = _resolve(args.command, args)
        _echo(args.command, opts)
        return _DISPATCH[args.command](opts)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        log.debug("unhandled failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
