#!/usr/bin/env python3
"""Success rate of UCT search against iteration budget, under a noisy evaluator.

    python3 scripts/mcts_budget_sweep.py --iterations 4 16 64 256 --error-rate 0.3
"""
import argparse
import random
import time

from totsearch.backends import MockBackend
from totsearch.core import SearchBudget
from totsearch.domains import random_blocks_instance
from totsearch.generation import DomainActions, ProposalConfig
from totsearch.scoring import CostModel, HeuristicModel
from totsearch.search import Mcts, StrategyConfig, run_search


def successes(seed, iterations, n, error_rate, depth):
    rng = random.Random(seed)
    solved = expansions = 0
    for _ in range(n):
        d = random_blocks_instance(rng.choice([3, 4]), rng)
        be = MockBackend(d, seed=seed, error_rate=error_rate, evaluator_mode="scalar", horizon=depth)
        r = run_search(d.problem(), be, ProposalConfig(branch=3, retries=0),
                       constraints=[DomainActions(d.is_action)], cost=CostModel("none"),
                       heuristic=HeuristicModel("value", value_range=(0.0, 10.0)),
                       config=StrategyConfig(Mcts(iterations=iterations), seed=seed,
                                             budget=SearchBudget(max_depth=depth)))
        solved += r.solved
        expansions += r.stats.expansions
    return solved, expansions


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, nargs="+", default=[4, 16, 64, 256])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--error-rate", type=float, default=0.3)
    ap.add_argument("--max-depth", type=int, default=8)
    args = ap.parse_args(argv)

    print("seed,iterations,solved,instances,success_rate,expansions,seconds")
    for seed in args.seeds:
        for it in args.iterations:
            t0 = time.perf_counter()
            solved, exp = successes(seed, it, args.n, args.error_rate, args.max_depth)
            print(f"{seed},{it},{solved},{args.n},{solved / args.n:.3f},{exp},{time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()
