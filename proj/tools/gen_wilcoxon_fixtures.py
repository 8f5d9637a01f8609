#!/usr/bin/env python3
"""Generate reference Wilcoxon signed-rank fixtures with SciPy.

Paired samples with n >= 10 non-zero differences use the normal
approximation with tie-corrected variance and continuity correction;
smaller samples use the exact null distribution. Zero differences are
dropped (Wilcoxon's convention).

usage: gen_wilcoxon_fixtures.py OUT_JSON
"""
import json
import sys

import numpy as np
from scipy import stats


def case(name, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    n = int(np.count_nonzero(d))
    method = "asymptotic" if n >= 10 else "exact"
    r = stats.wilcoxon(x, y, zero_method="wilcox", correction=True,
                       alternative="two-sided", method=method)
    return {"name": name, "x": x.tolist(), "y": y.tolist(), "method": method,
            "n": n, "statistic": float(r.statistic), "p_value": float(r.pvalue)}


def main(out):
    rng = np.random.default_rng(20240615)
    cases = [
        # classic 10-pair textbook example (before/after measurements)
        case("textbook_10", [125, 115, 130, 140, 140, 115, 140, 125, 140, 135],
             [110, 122, 125, 120, 140, 124, 123, 137, 135, 145]),
        case("textbook_12", [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30, 2.01, 2.70, 1.94],
             [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29, 1.55, 2.22, 1.81]),
        case("exact_6", [1.1, 2.3, 3.2, 4.8, 5.0, 6.7], [1.0, 2.0, 3.5, 4.1, 4.3, 5.2]),
        case("exact_8_onesided", [10, 11, 12, 13, 14, 15, 16, 17], [1, 2, 3, 4, 5, 6, 7, 8.5]),
        case("exact_9_ties", [3, 5, 2, 8, 7, 6, 4, 9, 1], [1, 3, 4, 6, 9, 4, 6, 7, 0]),
        case("zeros_dropped", [0.9, 0.8, 0.85, 0.9, 0.7, 0.95, 0.6, 0.75, 0.8, 0.88, 0.91, 0.5, 0.66],
             [0.9, 0.7, 0.80, 0.9, 0.72, 0.90, 0.65, 0.7, 0.8, 0.80, 0.93, 0.45, 0.60]),
    ]
    for i in range(12):
        n = int(rng.integers(10, 40))
        x = rng.normal(0.8, 0.05, n)
        y = x + rng.normal(0.01 * (i % 4), 0.03, n)
        cases.append(case(f"random_{i}", x, y))
    for i in range(4):
        n = 20
        # accuracies on a coarse grid produce tied differences
        x = np.round(rng.uniform(0.5, 1.0, n), 2)
        y = np.round(x + rng.integers(-3, 4, n) * 0.01, 2)
        cases.append(case(f"ties_{i}", x, y))
    with open(out, "w") as f:
        json.dump({"generator": f"scipy {__import__('scipy').__version__}", "cases": cases}, f, indent=1)


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
