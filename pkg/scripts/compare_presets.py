#!/usr/bin/env python3
"""Run every preset over a set of random instances and print one metrics row each.

    python3 scripts/compare_presets.py --n 10 --backend mock --error-rate 0.2
"""
import argparse
import csv
import random
import sys

from totsearch.domains import random_blocks_instance, random_game24_instance
from totsearch.harness import PRESETS, RunConfig, aggregate, run_instance

COLUMNS = ["preset", "instances", "success_rate", "expansions", "generated_thoughts", "tokens",
           "backend_calls", "distinct_valid_paths", "candidate_diversity", "discriminative_accuracy",
           "calibration_error"]


def instances(domain, n, rng):
    if domain == "game24":
        # half solvable, half not, so success rates are comparable
        return [random_game24_instance(rng, want_solvable=i % 2 == 0) for i in range(n)]
    return [random_blocks_instance(rng.randint(3, 4), rng) for _ in range(n)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10, help="instances per domain")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--backend", choices=["oracle", "mock"], default="oracle")
    ap.add_argument("--error-rate", type=float, default=0.0)
    ap.add_argument("--presets", nargs="*", default=sorted(PRESETS))
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    pools = {dom: instances(dom, args.n, rng) for dom in ("game24", "blocksworld")}
    rows = []
    for name in args.presets:
        dom = PRESETS[name].domain
        reports = []
        for d in pools[dom]:
            cfg = RunConfig(instance="<memory>", preset=name, backend=args.backend, seed=args.seed,
                            error_rate=args.error_rate)
            reports.append((d.instance_id, run_instance(cfg, domain=d).metrics))
        total = aggregate(reports).as_dict()
        rows.append({"preset": name, **total})

    w = csv.DictWriter(sys.stdout, COLUMNS, extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.3f}" if isinstance(v, float) else v) for k, v in r.items()})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            cw = csv.DictWriter(fh, COLUMNS, extrasaction="ignore")
            cw.writeheader()
            cw.writerows(rows)


if __name__ == "__main__":
    main()
