"""Command-line entry point: ``symbolact <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .errors import SymbolActError
from .evaluation import (
    bottleneck_grid,
    confusion_pairs,
    coverage_stats,
    load_dataset,
    map_from_predictions,
    operation_count,
    render_table,
    top1_accuracy,
)
from .files import load_system, read_json, save_system, write_json
from .grounding import (
    GroundingCache,
    Policy,
    SymbolTree,
    TableBackend,
    grounding_row,
    ground_symbols,
    ground_with_pruning,
    load_grounding,
    load_variants,
    save_grounding,
)
from .inference import FusionConfig, fuse_files, infer_images, load_activities, load_predictions, save_predictions
from .instantiate import LoopConfig, instantiate_system
from .oracle import HttpBackend, ReplayBackend, ReplayCache, ScriptedBackend


def shipped(name: str) -> Path:
    return Path(str(resources.files("symbolact") / "data" / name))


def _backend(args: argparse.Namespace):
    if args.backend == "scripted":
        inner = ScriptedBackend.from_jsonl(args.script or shipped("airplane_trace.jsonl"))
    elif args.backend == "http":
        inner = HttpBackend(args.url, model=args.model, max_in_flight=args.max_in_flight)
    else:
        if not args.record:
            raise SystemExit("--backend replay needs --record <cache file>")
        return ReplayBackend(ReplayCache(args.record))
    if args.record:
        return ReplayBackend(ReplayCache(args.record), fallback=inner)
    return inner


def cmd_instantiate(args: argparse.Namespace) -> int:
    config = LoopConfig.from_dict(read_json(args.config)) if args.config else LoopConfig()
    items = [(a.text, a.object) for a in load_activities(args.activities)]
    result = instantiate_system(items, _backend(args), config)
    save_system(args.out, result.system)
    if args.ledger:
        write_json(args.ledger, result.report())
    for name, res in result.results.items():
        print(f"{name}: {len(res.subsystem.premise_symbols())} symbols, {len(res.subsystem.rules)} rules, "
              f"{res.round_count} rounds, {res.ledger.total} queries (predicted {res.ledger.predicted(config.n_ent)})")
    if result.failed:
        print(f"failed: {', '.join(result.failed)}", file=sys.stderr)
        return 2
    return 0


def cmd_ground(args: argparse.Namespace) -> int:
    system = load_system(args.system)
    table = TableBackend.load(args.images)
    tree = None if args.tree in (None, "none") else SymbolTree.load(args.tree)
    checker = args.checker == "on"
    if tree is not None and checker:
        raise SystemExit("--tree and --checker on cannot be combined")
    variants = load_variants(args.variants) if args.variants else None
    rows = {}
    calls = 0
    for image in table.images():
        cache = GroundingCache(table)
        if tree is not None:
            probs, n = ground_with_pruning(image, system, tree, cache)
        else:
            probs = ground_symbols(image, system, cache, checker=checker, variants=variants, policy=args.policy)
            n = cache.calls
        calls += n
        rows[image] = grounding_row(system, probs)
    save_grounding(args.out, rows)
    print(f"grounded {len(rows)} images with {calls} scoring calls")
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    system = load_system(args.system)
    objects = read_json(args.objects) if args.objects else None
    preds, explain = infer_images(system, load_grounding(args.grounding), load_activities(args.activities), objects)
    save_predictions(args.out, preds)
    if args.explain:
        write_json(args.explain, explain)
    print(f"scored {len(preds)} images")
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    config = FusionConfig(args.policy, args.alpha1, args.alpha2)
    fused = fuse_files(load_predictions(args.sys1), load_predictions(args.sys2), config)
    save_predictions(args.out, fused)
    return 0


def _emit(report: dict, out: str | None) -> None:
    if out:
        write_json(out, report)
    print(render_table(report))


def cmd_eval(args: argparse.Namespace) -> int:
    if args.metric == "top1":
        acc = top1_accuracy(read_json(args.pred), read_json(args.dataset))
        _emit({"top1": round(100 * acc, 2)}, args.out)
        return 0
    report = map_from_predictions(load_predictions(args.pred), load_dataset(args.dataset))
    _emit(report.to_dict(), args.out)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    system = load_system(args.system)
    if args.report == "cost":
        if not args.activities:
            raise SystemExit("--report cost needs --activities")
        acts = [a.text for a in load_activities(args.activities)]
        tree = SymbolTree.load(args.tree) if args.tree else None
        table = TableBackend.load(args.images) if args.images else None
        oc = operation_count(system, acts, tree=tree, backend=table,
                             images=table.images() if table else ())
        _emit(oc.to_dict(), args.out)
        return 0
    dataset = load_dataset(args.dataset)
    if args.report == "coverage":
        _emit(coverage_stats(dataset, system).to_dict(), args.out)
    elif args.report == "confusion":
        _emit(confusion_pairs(dataset, system).to_dict(), args.out)
    else:
        _emit(bottleneck_grid(dataset, system).to_dict(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symbolact", description="Rule-based activity reasoning toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("instantiate", help="build a symbolic system with an oracle")
    p.add_argument("--activities", required=True)
    p.add_argument("--backend", choices=["http", "scripted", "replay"], default="scripted")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--ledger")
    p.add_argument("--record", help="replay cache file (recorded into unless --backend replay)")
    p.add_argument("--script", help="scripted table (JSONL); defaults to the shipped airplane trace")
    p.add_argument("--url", help="chat-completion endpoint (else SYMBOLACT_ORACLE_URL)")
    p.add_argument("--model", default="gpt-3.5-turbo")
    p.add_argument("--max-in-flight", type=int, default=8)
    p.set_defaults(func=cmd_instantiate)

    p = sub.add_parser("ground", help="turn symbols into per-image probabilities")
    p.add_argument("--system", required=True)
    p.add_argument("--images", required=True, help="probability-table file")
    p.add_argument("--tree", default="none")
    p.add_argument("--checker", choices=["on", "off"], default="off")
    p.add_argument("--policy", choices=[x.value for x in Policy], default="neutral")
    p.add_argument("--variants", help="paraphrase variants per symbol (JSON)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("infer", help="score activities from a grounding file")
    p.add_argument("--system", required=True)
    p.add_argument("--grounding", required=True)
    p.add_argument("--activities", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--explain")
    p.add_argument("--objects", help="known objects per image (JSON) for conditional scoring")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("fuse", help="combine two prediction files")
    p.add_argument("--sys1", required=True)
    p.add_argument("--sys2", required=True)
    p.add_argument("--policy", choices=["maxnorm", "fixed"], default="maxnorm")
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--alpha2", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="mAP or top-1 accuracy")
    p.add_argument("--pred", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--metric", choices=["map", "top1"], default="map")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="coverage, confusion, bottleneck or cost reports")
    p.add_argument("--dataset")
    p.add_argument("--system", required=True)
    p.add_argument("--report", choices=["coverage", "confusion", "bottleneck", "cost"], required=True)
    p.add_argument("--activities")
    p.add_argument("--tree")
    p.add_argument("--images")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "analyze" and args.report != "cost" and not args.dataset:
        raise SystemExit(f"--report {args.report} needs --dataset")
    try:
        return args.func(args)
    except SymbolActError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
