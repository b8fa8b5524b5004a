"""Compare the compiled and numpy kernel backends on reach-step sized inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--grid 1024] [--images 32] [--repeat 5]

Each kernel runs on both backends with identical inputs. The script reports
the best wall time over ``--repeat`` runs, the speed-up and the largest
difference between the two outputs.
"""

import argparse
import timeit

import numpy as np

from eigensets.kernels import get_backend
from eigensets.matops import expm
from eigensets.starset import make_polygon


def reach_images(grid, images, seed):
    """Boundary points of ``images`` random linear images of a triangle."""
    rng = np.random.default_rng(seed)
    S = make_polygon([[0, 0], [1, 1], [0, 1]], grid)
    V = S.vertices()
    pts = [V @ expm(rng.standard_normal((2, 2)), 0.05).T for _ in range(images)]
    return np.concatenate([p[:, 0] for p in pts]), np.concatenate([p[:, 1] for p in pts]), S.radii


def cases(grid, images, seed):
    qx, qy, radii = reach_images(grid, images, seed)
    k = len(qx) // images
    phi = np.random.default_rng(seed + 1).uniform(-np.pi, 3 * np.pi, 100_000)
    # one image at a time, as reach_step rasterizes before taking the union
    return {
        "rasterize": lambda b: [b.rasterize(qx[i * k:(i + 1) * k], qy[i * k:(i + 1) * k], grid)
                                for i in range(images)],
        "radial_at": lambda b: b.radial_at(radii, phi),
        "directed_hausdorff": lambda b: b.directed_hausdorff(qx[:k], qy[:k], radii),
    }


def max_diff(a, b):
    if isinstance(a, list):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--images", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    py = get_backend("python")
    try:
        cy = get_backend("cython")
    except ImportError:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1

    print(f"grid {args.grid}, {args.images} images, best of {args.repeat}")
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speed-up':>10}{'max diff':>12}")
    for name, fn in cases(args.grid, args.images, args.seed).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        diff = max_diff(fn(py), fn(cy))
        print(f"{name:<20}{t_py:>14.3f}{t_cy:>14.3f}{t_py / t_cy:>10.1f}{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
