#!/usr/bin/env python3
"""Rebuild the LIBSVM-format benchmark files shipped in data/libsvm.

  breast      UCI Breast Cancer Wisconsin (original), as distributed in R's
              MASS::biopsy. Rows with missing values dropped (683 remain);
              feature 1 is the sample code number, features 2..10 the nine
              cytology attributes; labels 2 (benign) / 4 (malignant).
  ionosphere  UCI Ionosphere (351 x 34), labels 1 (good) / -1 (bad).

Each file also gets a *_scale copy with every feature mapped linearly to
[-1, 1] from its column min/max, as svm-scale does; constant columns are
left out.

usage: make_reference_data.py BIOPSY_CSV IONOSPHERE_TAB OUT_DIR
"""
import csv
import sys
from pathlib import Path


def fmt(v):
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def line(label, values):
    feats = " ".join(f"{i}:{fmt(v)}" for i, v in enumerate(values, 1) if float(v) != 0.0)
    return f"{label} {feats}".rstrip() + "\n"


def parse(path):
    rows = []
    for l in Path(path).read_text().splitlines():
        label, *pairs = l.split()
        rows.append((label, {int(k): float(v) for k, v in (p.split(":") for p in pairs)}))
    return rows


def scale(src, dst, lower=-1.0, upper=1.0):
    rows = parse(src)
    dim = max(max(r, default=0) for _, r in rows)
    lo = [min(r.get(i, 0.0) for _, r in rows) for i in range(1, dim + 1)]
    hi = [max(r.get(i, 0.0) for _, r in rows) for i in range(1, dim + 1)]
    with open(dst, "w") as out:
        for label, r in rows:
            vals = []
            for i in range(dim):
                if hi[i] == lo[i]:
                    vals.append(0.0)
                    continue
                v = r.get(i + 1, 0.0)
                vals.append(round(lower + (upper - lower) * (v - lo[i]) / (hi[i] - lo[i]), 6))
            # keep the trailing index so the dimension survives sparse output
            feats = " ".join(f"{i}:{fmt(v)}" for i, v in enumerate(vals, 1) if v != 0.0 or i == dim)
            out.write(f"{label} {feats}\n")


def breast(src, dst):
    with open(src, newline="") as f, open(dst, "w") as out:
        rows = csv.reader(f)
        next(rows)
        for r in rows:
            if "NA" in r:
                continue
            values = [r[1]] + r[2:11]
            out.write(line(2 if r[11] == "benign" else 4, values))


def ionosphere(src, dst):
    with open(src) as f, open(dst, "w") as out:
        lines = f.read().splitlines()[3:]
        for l in lines:
            cols = l.split("\t")
            out.write(line(1 if cols[34] == "g" else -1, cols[:34]))


if __name__ == "__main__":
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    out = Path(sys.argv[3])
    out.mkdir(parents=True, exist_ok=True)
    breast(sys.argv[1], out / "breast")
    ionosphere(sys.argv[2], out / "ionosphere")
    for name in ("breast", "ionosphere"):
        scale(out / name, out / f"{name}_scale")
