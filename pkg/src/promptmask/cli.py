"""Command-line entry points: serve, mask, unmask, generate, evaluate."""

from __future__ import annotations

import argparse
import json
import sys
import uuid
from pathlib import Path

from .config import GatewayConfig, load_config
from .detection import detect_pattern, load_gazetteer_file, resolve_overlaps
from .errors import PromptMaskError
from .evaluation import (
    derive_gazetteer,
    gold_detector,
    make_degraded_detector,
    run_evaluation,
    write_report,
)
from .masking import Vault, load_vault, mask, save_vault, unmask
from .synthgen import build_dataset, read_dataset, write_dataset
from .upstream import ChatClient, make_transport


def _load_or_create_vault(path: Path) -> Vault:
    if path.exists():
        return load_vault(path)
    return Vault(session_id=uuid.uuid4().hex)


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
    return 0


def cmd_mask(args) -> int:
    text = Path(args.infile).read_text(encoding="utf-8")
    vault_path = Path(args.vault)
    vault = _load_or_create_vault(vault_path)
    gazetteer, rules = ({}, {})
    if args.gazetteer:
        gazetteer, rules = load_gazetteer_file(args.gazetteer)
    mentions = resolve_overlaps(detect_pattern(text, gazetteer, rules))
    result = mask(text, mentions, vault)
    save_vault(vault, vault_path)
    _write_out(args.out, result.masked_text)
    for applied in result.applied:
        print(f"{applied.placeholder}\t{applied.mention.label.name}\t{applied.mention.surface}",
              file=sys.stderr)
    return 0


def cmd_unmask(args) -> int:
    text = Path(args.infile).read_text(encoding="utf-8")
    vault = load_vault(args.vault)
    result = unmask(text, vault)
    _write_out(args.out, result.text)
    for token in result.unresolved:
        print(f"unresolved: {token}", file=sys.stderr)
    return 0


def cmd_generate(args) -> int:
    llm = None
    if args.mode == "llm":
        transport = make_transport(args.upstream, timeout=args.timeout)
        llm = ChatClient(transport, args.model)
    records, manifest = build_dataset(args.n, args.seed, args.mode, llm=llm)
    manifest_path = write_dataset(records, manifest, args.out)
    print(f"wrote {len(records)} records to {args.out} "
          f"({manifest['total_entities']} entities; manifest {manifest_path})")
    return 0


def _build_eval_detector(name: str, records, args):
    if name == "gold":
        return gold_detector
    if name == "degraded":
        return make_degraded_detector()
    if name == "pattern":
        if args.gazetteer:
            gazetteer, rules = load_gazetteer_file(args.gazetteer)
        else:
            gazetteer, rules = derive_gazetteer(records), {}
        return lambda record: detect_pattern(record.prompt, gazetteer, rules)
    raise ValueError(f"unknown detector {name!r} (expected gold, degraded, or pattern)")


def cmd_evaluate(args) -> int:
    records = read_dataset(args.dataset)
    manifest_path = Path(args.dataset + ".manifest.json")
    manifest = None
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    transport = None
    if args.upstream and args.upstream != "none":
        transport = make_transport(args.upstream, timeout=args.timeout)
    named = []
    for name in args.detector:
        detector = _build_eval_detector(name, records, args)
        report = run_evaluation(records, detector, name, transport=transport,
                                model=args.model, dataset_manifest=manifest)
        named.append((name, report))
    paths = write_report(named, args.out)
    for name, report in named:
        o = report.overall
        print(f"{name}: precision={o.precision:.3f} recall={o.recall:.3f} f1={o.f1:.3f} "
              f"(skipped {len(report.skipped)})")
    print(f"report written to {paths['report'].parent}")
    return 0


def _write_out(out, text: str) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="promptmask",
                                     description="Reversible PII masking gateway and tooling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--config", required=True, help="TOML or JSON gateway config file")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("mask", help="mask a text file with the pattern detector")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vault", required=True, help="vault file (created if missing)")
    p.add_argument("--gazetteer", help="gazetteer/rules JSON file")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("unmask", help="restore placeholders in a text file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vault", required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_unmask)

    p = sub.add_parser("generate", help="build a synthetic prompt dataset")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--mode", choices=("offline", "llm"), default="offline")
    p.add_argument("--out", required=True, help="dataset JSONL path")
    p.add_argument("--upstream", default="echo", help="chat upstream for llm mode")
    p.add_argument("--model", default="generator-llm")
    p.add_argument("--timeout", type=float, default=60.0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score detectors over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--detector", action="append", required=True,
                   help="gold | degraded | pattern (repeatable)")
    p.add_argument("--upstream", default="none", help="echo, a base URL, or none")
    p.add_argument("--model", default="eval-upstream")
    p.add_argument("--gazetteer", help="gazetteer file for the pattern detector")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--out", required=True, help="report output directory")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PromptMaskError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
