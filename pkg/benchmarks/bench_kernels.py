"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from brgames import _fallback
from brgames.experiments import GeneratorSpec, generate_game

try:
    from brgames import _kernels
except ImportError:
    _kernels = None


def pair_terms_case(states, actions, types):
    g = generate_game(GeneratorSpec(num_states=states, num_actions=(actions, actions), num_types=types), 0)
    rng = np.random.default_rng(0)
    th1 = rng.normal(size=(types, states, actions))
    th2 = rng.normal(size=(types, states, actions))
    args = (th1, th2, g.transition, g.rewards, g.discount, g.initial_state_dist, True)
    return lambda mod: mod.pair_terms(*args)


def rollout_case(n, horizon):
    S, m = 3, 12
    rng = np.random.default_rng(0)
    cdf = np.cumsum(rng.dirichlet(np.ones(m), size=S), axis=1)
    cdf[:, -1] = 1.0
    rew = rng.normal(size=(2, S, m))
    state0 = rng.integers(0, S, n).astype(np.int64)
    u = rng.random((n, horizon))
    return lambda mod: mod.rollout_returns(cdf, rew, state0, u, 0.9)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = [
        ("pair_terms S=3 A=2 K=2", pair_terms_case(3, 2, 2), 200),
        ("pair_terms S=10 A=3 K=3", pair_terms_case(10, 3, 3), 50),
        ("rollout_returns n=8192 H=131", rollout_case(8192, 131), 3),
    ]
    print(f"{'case':32s} {'numpy':>12s} {'compiled':>12s} {'speedup':>8s}")
    for name, fn, number in cases:
        slow = min(timeit.repeat(lambda: fn(_fallback), number=number, repeat=args.repeat)) / number
        if _kernels is None:
            print(f"{name:32s} {slow * 1e6:10.1f}us {'n/a':>12s}")
            continue
        fast = min(timeit.repeat(lambda: fn(_kernels), number=number, repeat=args.repeat)) / number
        print(f"{name:32s} {slow * 1e6:10.1f}us {fast * 1e6:10.1f}us {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
