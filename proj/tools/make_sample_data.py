#!/usr/bin/env python3
"""Regenerates the bundled benchmark datasets under data/.

Both files are synthetic but shaped like their widely used namesakes
(dimensions, class balance, value ranges), with a deterministic seed so the
bytes never change between runs.

fourclass.csv      862 points, 2 features, labels -1/+1 (555/307), four
                   well-separated blobs arranged so no single linear
                   threshold separates the classes.
breast_cancer.csv  683 points, 10 integer-valued features in 1..10, labels
                   2/4 (444/239). The class structure lives in a handful of
                   low-variance coordinates while the highest-variance
                   features are pure noise, so variance-ranked projections
                   miss it.
"""

import os

import numpy as np


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")


def make_fourclass(rng):
    # class -1: two blobs on the main diagonal; class +1: the anti-diagonal.
    blobs = [
        ((-2.5, -2.5), 278, -1),
        ((2.5, 2.5), 277, -1),
        ((-2.5, 2.5), 154, 1),
        ((2.5, -2.5), 153, 1),
    ]
    rows = []
    for (cx, cy), count, label in blobs:
        pts = rng.normal(loc=(cx, cy), scale=0.7, size=(count, 2))
        for x, y in pts:
            rows.append((f"{x:.4f}", f"{y:.4f}", str(label)))
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def make_breast_cancer(rng):
    def ints(values):
        return np.clip(np.rint(values), 1, 10).astype(int)

    def block(n, label):
        cols = {}
        # f1, f2: four clusters; the class alternates corners, so the class
        # means coincide and only the joint density tells them apart.
        if label == -1:
            corners = np.array([[3.0, 3.0], [7.0, 7.0]])
        else:
            corners = np.array([[3.0, 7.0], [7.0, 3.0]])
        which = rng.integers(0, 2, size=n)
        xy = corners[which] + rng.normal(scale=0.8, size=(n, 2))
        cols["f1"], cols["f2"] = ints(xy[:, 0]), ints(xy[:, 1])
        # f3..f6: weak monotone class signal, the flavor of cytology scores.
        for name in ("f3", "f4", "f5", "f6"):
            if label == -1:
                cols[name] = ints(rng.normal(3.2, 1.2, size=n))
            else:
                cols[name] = ints(rng.normal(5.2, 1.8, size=n))
        # f7..f10: high-variance noise, identical in both classes.
        for name in ("f7", "f8", "f9", "f10"):
            cols[name] = rng.integers(1, 11, size=n)
        out = np.column_stack([cols[f"f{i}"] for i in range(1, 11)])
        labels = np.full(n, 2 if label == -1 else 4)
        return out, labels

    benign_x, benign_y = block(444, -1)
    malignant_x, malignant_y = block(239, 1)
    x = np.vstack([benign_x, malignant_x])
    y = np.concatenate([benign_y, malignant_y])
    order = rng.permutation(len(y))
    rows = []
    for i in order:
        rows.append(tuple(str(v) for v in x[i]) + (str(y[i]),))
    return rows


def main():
    rng = np.random.default_rng(20240817)
    out_dir = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data")
    os.makedirs(out_dir, exist_ok=True)
    write_csv(
        os.path.join(out_dir, "fourclass.csv"),
        ["x1", "x2", "label"],
        make_fourclass(rng),
    )
    write_csv(
        os.path.join(out_dir, "breast_cancer.csv"),
        [f"f{i}" for i in range(1, 11)] + ["label"],
        make_breast_cancer(rng),
    )


if __name__ == "__main__":
    main()
