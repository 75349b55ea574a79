#!/usr/bin/env python3
"""Generate the bundled 281-region point set and its planted-zone scenarios.

A dense town of 150 points sits in the south-west; 131 rural points are
spread over the remaining area. The hot zone is the 40 regions nearest to a
town point, the cold zone the 61 regions nearest to a rural point far from
it. Output is deterministic for the fixed seed below.
"""

import argparse
from pathlib import Path

import numpy as np

SEED = 20240513
N_TOWN = 150
N_RURAL = 131
HOT_SIZE = 40
COLD_SIZE = 61


def nearest(points, center, m):
    d = np.hypot(points[:, 0] - points[center, 0], points[:, 1] - points[center, 1])
    order = np.lexsort((np.arange(len(points)), d))
    return sorted(order[:m].tolist())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(SEED)
    town = rng.normal(loc=(20.0, 20.0), scale=(6.0, 5.0), size=(N_TOWN, 2))
    rural = rng.uniform(low=(0.0, 0.0), high=(100.0, 80.0), size=(N_RURAL, 2))
    points = np.round(np.vstack([town, rural]), 4)
    baseline = np.round(rng.uniform(0.5, 2.0, size=len(points)), 4)
    ids = [f"R{i + 1:03d}" for i in range(len(points))]

    hot_center = int(np.argmin(np.hypot(points[:N_TOWN, 0] - 24.0, points[:N_TOWN, 1] - 24.0)))
    rural_idx = np.arange(N_TOWN, len(points))
    far = np.hypot(points[rural_idx, 0] - 75.0, points[rural_idx, 1] - 55.0)
    cold_center = int(rural_idx[np.argmin(far)])
    hot = nearest(points, hot_center, HOT_SIZE)
    cold = nearest(points, cold_center, COLD_SIZE)
    if set(hot) & set(cold):
        raise SystemExit("planted zones overlap; choose other centers")

    with open(out / "synthetic_281.csv", "w") as f:
        f.write("id,x,y,outcome,baseline\n")
        for i, (x, y) in enumerate(points):
            f.write(f"{ids[i]},{x:.4f},{y:.4f},0,{baseline[i]:.4f}\n")

    for mode in ("population", "expectation"):
        with open(out / f"synthetic_281_{mode}.ini", "w") as f:
            f.write(f"# planted zones on synthetic_281.csv: hot = 40 nearest of {ids[hot_center]},"
                    f" cold = 61 nearest of {ids[cold_center]}\n")
            f.write(f"mode = {mode}\n")
            f.write("hot_zone = " + ",".join(ids[i] for i in hot) + "\n")
            f.write("cold_zone = " + ",".join(ids[i] for i in cold) + "\n")
            f.write("alpha_pop = 5\ntheta_hot = 5\ntheta_cold = -5\nsigma = 0.5\nseed = 1\n")


if __name__ == "__main__":
    main()
