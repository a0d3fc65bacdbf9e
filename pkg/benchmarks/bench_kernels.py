"""Time the numba kernels against their numpy twins, then a full training run
under each backend (selected via THOR_ORDINAL_DISABLE_NUMBA in a subprocess).

    python benchmarks/bench_kernels.py --n 100000 --repeat 20
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from thor_ordinal import _kernels_numba as nb
from thor_ordinal import _kernels_numpy as npk


def _inputs(n, k, rng):
    thr = np.arange(k + 1, dtype=np.float64) - 1.0
    return {
        "thor_pair_terms": (rng.normal(1, 2, n), rng.normal(1, 2, n), rng.integers(1, k, n), thr, 0.5),
        "thor_violations": (rng.normal(1, 2, n), rng.normal(1, 2, n), rng.integers(1, k, n), thr),
        "threshold_ranks": (rng.normal(1, 2, n), thr),
        "bce_logits": (rng.normal(size=(n, k - 1)), rng.integers(0, 2, (n, k - 1)).astype(np.float64)),
        "softmax_xent": (rng.normal(size=(n, k)), rng.integers(0, k, n)),
        "inconsistent_rows": (rng.integers(0, 2, (n, k - 1)),),
        "relu_backward": (rng.normal(size=(n, 32)), rng.normal(size=(n, 32))),
    }


def _best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, k, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':20s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, args in _inputs(n, k, rng).items():
        getattr(nb, name)(*args)  # compile outside the timed region
        t_np = _best_of(getattr(npk, name), args, repeat)
        t_nb = _best_of(getattr(nb, name), args, repeat)
        print(f"{name:20s} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.2f}")


_TRAIN_SNIPPET = """
import time
from thor_ordinal import data, trainer, kernels
ds = data.generate_synthetic(data.SyntheticSpec(k=5, per_class=200, d=8, noise=0.5, seed=42, transform_seed=42))
tr, va, te = data.split(ds, seed=42)
trainer.train(tr, va, trainer.TrainConfig(method="thor", epochs=2))  # warm-up / compile
t0 = time.perf_counter()
rep = trainer.train(tr, va, trainer.TrainConfig(method="thor", epochs={epochs}))
print(kernels.BACKEND, time.perf_counter() - t0, rep.val_mae[-1])
"""


def bench_training(epochs):
    print(f"\nend-to-end thor training, {epochs} epochs")
    for disabled in ("0", "1"):
        env = dict(os.environ, THOR_ORDINAL_DISABLE_NUMBA=disabled)
        out = subprocess.run(
            [sys.executable, "-c", _TRAIN_SNIPPET.format(epochs=epochs)],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.split()
        print(f"  backend={out[0]:6s} seconds={float(out[1]):.3f} final_val_mae={out[2]}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--skip-training", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.n, args.k, args.repeat)
    if not args.skip_training:
        bench_training(args.epochs)


if __name__ == "__main__":
    main()
