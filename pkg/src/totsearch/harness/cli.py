"""Command line: ``totsearch {run,bench,presets,replay,generate}``.

Exit codes: 0 ok, 1 replay mismatch, 2 usage, 3 instance data, 4 backend
failure, 5 configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from ..backends.base import BackendError
from ..domains import domain_to_dict, random_blocks_instance, random_game24_instance
from ..errors import ConfigError, InstanceFormatError
from ..search.config import SearchAborted
from .presets import PRESETS
from .runner import BACKENDS, RunConfig, bench, replay_run, run_instance

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_DATA, EXIT_BACKEND, EXIT_CONFIG = 0, 1, 2, 3, 4, 5


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", required=True, help="preset name (see `totsearch presets`)")
    p.add_argument("--backend", choices=[b for b in BACKENDS if b != "replay"], default="oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.add_argument("--error-rate", type=float, default=0.0, help="mock: wrong-evaluation probability")
    p.add_argument("--invalid-rate", type=float, default=0.0, help="mock: off-policy proposal probability")
    p.add_argument("--endpoint", help="http: base URL (else $TOTSEARCH_BASE_URL)")
    p.add_argument("--model", help="http: model name (else $TOTSEARCH_MODEL)")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--max-expansions", type=int)
    p.add_argument("--width", type=int, help="beam width override")
    p.add_argument("--iterations", type=int, help="MCTS iteration override")
    p.add_argument("--no-labels", action="store_true", help="skip oracle reachability labels")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="totsearch", description="Tree-of-thoughts search runs")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="search one instance")
    p.add_argument("instance", help="instance file (JSON)")
    _add_run_options(p)

    p = sub.add_parser("bench", help="search every instance in a directory")
    p.add_argument("instances", help="directory of instance files")
    _add_run_options(p)
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("presets", help="list registered presets")

    p = sub.add_parser("replay", help="re-execute a run from its transcript")
    p.add_argument("run_dir")
    p.add_argument("--out", help="write the replayed run here")

    p = sub.add_parser("generate", help="write random instance files")
    p.add_argument("domain", choices=["blocksworld", "game24"])
    p.add_argument("out", help="output directory")
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, nargs=2, default=(3, 5), metavar=("MIN", "MAX"))
    return ap


def _config(args, instance: str) -> RunConfig:
    out = args.out
    return RunConfig(
        instance=instance, preset=args.preset, backend=args.backend, seed=args.seed,
        out_dir=out, error_rate=args.error_rate, invalid_rate=args.invalid_rate,
        endpoint=args.endpoint, model=args.model, max_depth=args.max_depth,
        max_expansions=args.max_expansions, width=args.width, iterations=args.iterations,
        labels=not args.no_labels)


def _cmd_run(args) -> int:
    cfg = _config(args, str(Path(args.instance).resolve()))
    out = run_instance(cfg)
    print(json.dumps(out.summary(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_bench(args) -> int:
    folder = Path(args.instances)
    if not folder.is_dir():
        raise InstanceFormatError(f"{folder} is not a directory")
    files = sorted(str(p.resolve()) for p in folder.glob("*.json"))
    if not files:
        raise InstanceFormatError(f"no instance files in {folder}")
    cfg = _config(args, files[0])
    total = bench(files, cfg, Path(args.out or "bench-out"), workers=args.workers)
    print(json.dumps(total.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name, p in sorted(PRESETS.items()):
        m = p.manifest
        tags = " / ".join(str(x) for x in (
            "+".join([m["sampling"]] + m["constraints"]), m["pruning"] or "-", m["strategy"],
            m["cost"], m["heuristic"], m["goal"]))
        print(f"{name:22s} {p.domain:12s} {tags}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    out, same = replay_run(Path(args.run_dir), None if args.out is None else Path(args.out))
    print(f"{out.instance_id}: {out.result.outcome}; log {'identical' if same else 'DIFFERS'}")
    return EXIT_OK if same else EXIT_MISMATCH


def _cmd_generate(args) -> int:
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi = args.blocks
    for i in range(args.n):
        if args.domain == "blocksworld":
            d = random_blocks_instance(rng.randint(lo, hi), rng, instance_id=f"bw-{args.seed}-{i:03d}")
        else:
            d = random_game24_instance(rng)
            d.instance_id = f"g24-{args.seed}-{i:03d}"
        (out / f"{d.instance_id}.json").write_text(json.dumps(domain_to_dict(d), indent=2) + "\n")
    print(f"wrote {args.n} instances to {out}")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "bench": _cmd_bench, "presets": _cmd_presets,
            "replay": _cmd_replay, "generate": _cmd_generate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)  # exits 2 on bad flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BackendError, SearchAborted) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
