"""Command line entry point: ``lifetrace generate | build-memory | evaluate``.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .demographics import PriorError, load_prior
from .event_memory import build_memory
from .footprint import load_jsonl
from .gateway import GatewayError
from .metrics import JUDGE_AXES, JudgeParseFailed, llm_judge, render_table, subsampled_eval
from .pipeline import canonical_hash, prepare_memory, read_descriptions, run
from .providers import ConfigError, ProviderConfig, build_gateway

logger = logging.getLogger("lifetrace")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _provider(path: str | None) -> ProviderConfig:
    return ProviderConfig.load(path) if path else ProviderConfig()


def _provider_fingerprint(cfg: ProviderConfig, offline: bool) -> dict:
    d = asdict(cfg)
    d["offline"] = offline
    return d


def cmd_generate(args) -> int:
    from .config import RunConfig

    overrides = {"seed": args.seed, "personas": args.personas, "out_dir": args.out}
    if args.config:
        cfg = RunConfig.load(args.config, **overrides)
    else:
        cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    if args.budget_cap is not None:
        cfg.budget_cap_usd = args.budget_cap
    provider_cfg = _provider(cfg.provider_config)
    if cfg.budget_cap_usd is None and provider_cfg.budget_cap_usd is not None:
        cfg.budget_cap_usd = provider_cfg.budget_cap_usd
    prior = load_prior(cfg.prior)
    gateway = build_gateway(provider_cfg, seed=cfg.seed, offline=args.offline, budget_cap=str(cfg.budget_cap))
    config_hash = cfg.fingerprint(_provider_fingerprint(provider_cfg, args.offline))
    try:
        memory = prepare_memory(gateway, cfg.memory, cfg.descriptions, cfg.per_persona, cfg.seed)
    except GatewayError as exc:
        logger.error("event memory preparation failed: %s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME
    results = run(gateway, prior, memory, personas=cfg.personas, seed=cfg.seed, out_dir=Path(cfg.out_dir),
                  forest_cap=cfg.forest_cap, max_cycles=cfg.max_cycles, workers=cfg.workers,
                  config_hash=config_hash)
    ok = sum(r.ok for r in results)
    print(f"{ok}/{len(results)} personas generated into {cfg.out_dir} "
          f"(cost {float(gateway.ledger.total):.4f} USD, {len(gateway.ledger)} calls)")
    for r in results:
        if not r.ok:
            print(f"  {r.persona_id}: {r.error}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_build_memory(args) -> int:
    provider_cfg = _provider(args.config)
    gateway = build_gateway(provider_cfg, seed=args.seed, offline=args.offline)
    try:
        descriptions = read_descriptions(args.descriptions)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read descriptions: {exc}") from exc
    memory = build_memory(gateway, descriptions, args.per_persona, threshold=args.threshold, seed=args.seed)
    memory.save(args.out)
    for w in memory.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{len(memory)} events written to {args.out}")
    return EXIT_OK


def read_corpus(path: str | Path, kinds: set[str] | None = None) -> list[str]:
    """Documents from a footprint JSONL, a generate output dir, a JSON list, or a text file."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*/footprint.jsonl")) or sorted(path.glob("*.jsonl"))
        if not files:
            raise UsageError(f"no footprint files under {path}")
        return [doc for f in files for doc in read_corpus(f, kinds)]
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read corpus {path}: {exc}") from exc
    if path.suffix == ".jsonl":
        try:
            arts = load_jsonl(path)
        except (ValueError, KeyError, TypeError):
            docs = [json.loads(line) for line in text.splitlines() if line.strip()]
            return [d if isinstance(d, str) else d.get("text", "") for d in docs]
        return [a.text() for a in arts if kinds is None or a.kind in kinds]
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"corpus {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, list):
            raise UsageError(f"corpus {path} must be a JSON list of strings")
        return [str(d) for d in data]
    return [chunk.strip() for chunk in text.split("\n\n") if chunk.strip()]


def cmd_evaluate(args) -> int:
    provider_cfg = _provider(args.config)
    gateway = build_gateway(provider_cfg, seed=args.seed, offline=args.offline or not args.config)
    kinds = set(args.kind) if args.kind else None
    corpora = []
    for p in args.corpus:
        docs = read_corpus(p, kinds)
        if not docs:
            raise UsageError(f"corpus {p} has no documents")
        corpora.append((p, docs))
    rows, report = [], []
    for p, docs in corpora:
        m = subsampled_eval(docs, gateway.embed_many, args.threshold, args.repeats, args.seed)
        entry = {"name": Path(p).name or str(p), "path": str(p), "metrics": m.to_dict()}
        if args.judge:
            entry["judge"] = _judge(gateway, docs[: args.judge])
        rows.append((entry["name"], m))
        report.append(entry)
    doc = {"seed": args.seed, "threshold": args.threshold, "repeats": args.repeats,
           "embedder": gateway.embedder.provider_id, "corpora": report}
    doc["report_hash"] = canonical_hash(doc)
    table = render_table(rows)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    out.with_suffix(".txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def _judge(gateway, docs: list[str]) -> dict:
    scores = []
    for d in docs:
        try:
            scores.append(llm_judge(gateway, d))
        except JudgeParseFailed as exc:
            logger.warning("judge failed: %s", exc)
    if not scores:
        return {"n": 0}
    out = {"n": len(scores)}
    for axis in [a.lower() for a in JUDGE_AXES] + ["overall"]:
        out[axis] = float(np.mean([getattr(s, axis).score for s in scores]))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lifetrace", description="Persona-grounded digital footprint synthesis.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate footprints for sampled personas")
    g.add_argument("--config", help="run config JSON")
    g.add_argument("--seed", type=int)
    g.add_argument("--personas", type=int)
    g.add_argument("--out")
    g.add_argument("--offline", action="store_true", help="force the mock backend")
    g.add_argument("--budget-cap", help="override the run budget cap in USD")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("build-memory", help="brainstorm and dedup an event memory")
    b.add_argument("--descriptions", required=True, help="persona descriptions, one per line or a JSON list")
    b.add_argument("--out", required=True, help="output JSONL; a .index.json sidecar is written next to it")
    b.add_argument("--config", help="provider config JSON")
    b.add_argument("--per-persona", type=int, default=10)
    b.add_argument("--threshold", type=float, default=0.8)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--offline", action="store_true")
    b.set_defaults(func=cmd_build_memory)

    e = sub.add_parser("evaluate", help="intrinsic metrics for one or more corpora")
    e.add_argument("corpus", nargs="+")
    e.add_argument("--out", default="report.json")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--threshold", type=int, default=1000)
    e.add_argument("--repeats", type=int, default=5)
    e.add_argument("--kind", action="append", help="only artifacts of this kind (repeatable)")
    e.add_argument("--judge", type=int, default=0, help="score the first N documents with the LLM judge")
    e.add_argument("--config", help="provider config JSON (embedder and judge)")
    e.add_argument("--offline", action="store_true")
    e.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, PriorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GatewayError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
