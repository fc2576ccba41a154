"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on both backends with the same inputs, and the outputs
are checked for bitwise equality before timing.
"""
import argparse
import random
import timeit

from edgeprov import _kernels_py as py

try:
    from edgeprov import _kernels as cy
except ImportError:
    cy = None


def inputs(seed=0, n_dev=3, n_cand=8, slots=10_000):
    rng = random.Random(seed)
    score = (10.0, [rng.uniform(0, 40)], [rng.uniform(0, 3)],
             [[rng.uniform(0, 1)] for _ in range(n_cand)],
             [rng.uniform(0, n_dev) for _ in range(n_cand)],
             [rng.uniform(0, 5) for _ in range(n_dev)],
             [[rng.uniform(-0.5, 0.5) for _ in range(n_dev)] for _ in range(n_cand)])
    replay = (0.0, [float(rng.randint(0, 4)) for _ in range(slots)],
              [rng.uniform(0, 4) for _ in range(slots)])
    virtual = (0.0, [rng.uniform(-1, 1) for _ in range(slots)])
    return {"score_candidates": score, "replay_queue": replay, "replay_virtual": virtual}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels not built; only the Python backend is available")
    cases = inputs()
    loops = {"score_candidates": 20_000, "replay_queue": 20, "replay_virtual": 20}
    print(f"{'kernel':<18}{'python us':>12}{'cython us':>12}{'speedup':>9}")
    for name, argv_ in cases.items():
        n = loops[name]
        fp = getattr(py, name)
        t_py = min(timeit.repeat(lambda: fp(*argv_), number=n, repeat=args.repeat)) / n * 1e6
        if cy is None:
            print(f"{name:<18}{t_py:>12.2f}{'-':>12}{'-':>9}")
            continue
        fc = getattr(cy, name)
        assert fc(*argv_) == fp(*argv_), f"{name}: backends disagree"
        t_cy = min(timeit.repeat(lambda: fc(*argv_), number=n, repeat=args.repeat)) / n * 1e6
        print(f"{name:<18}{t_py:>12.2f}{t_cy:>12.2f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
