"""Brute-force dip values by linear programming.

For sorted distinct x_1..x_n the dip is min over unimodal F of
max_i max(|F(x_i) - i/n|, |F(x_i) - (i-1)/n|). A candidate F is linear
between sample points; its slopes must be non-decreasing up to a mode segment
and non-increasing after it. One LP per mode segment, keep the smallest D.

Writes tests/data/dip_oracle.txt: one case per line, "n dip x_1 ... x_n".
"""
import pathlib
import sys

import numpy as np
from scipy.optimize import linprog


def dip_lp(x):
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    best = np.inf
    # variables: F_1..F_n, D
    nv = n + 1
    for k in range(n - 1):
        a_ub, b_ub = [], []

        def row():
            return np.zeros(nv)

        for i in range(n):
            lo, hi = i / n, (i + 1) / n
            r = row(); r[i] = 1; r[-1] = -1; a_ub.append(r); b_ub.append(lo)    # F_i - D <= i/n
            r = row(); r[i] = -1; r[-1] = -1; a_ub.append(r); b_ub.append(-hi)  # -F_i - D <= -(i+1)/n
        for i in range(n - 1):
            r = row(); r[i] = 1; r[i + 1] = -1; a_ub.append(r); b_ub.append(0.0)  # monotone
        for i in range(n - 2):
            h0, h1 = x[i + 1] - x[i], x[i + 2] - x[i + 1]
            # slope_i = (F_{i+1}-F_i)/h0, slope_{i+1} = (F_{i+2}-F_{i+1})/h1
            r = row()
            r[i] += 1 / h0; r[i + 1] += -1 / h0 - 1 / h1; r[i + 2] += 1 / h1
            # r.F = slope_{i+1} - slope_i
            if i + 1 <= k:
                a_ub.append(-r)  # slope_i <= slope_{i+1}
            else:
                a_ub.append(r)   # slope_i >= slope_{i+1}
            b_ub.append(0.0)
        c = row(); c[-1] = 1
        bounds = [(0.0, 1.0)] * n + [(0.0, None)]
        res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=bounds, method="highs")
        if res.status == 0:
            best = min(best, res.fun)
    return best


def cases():
    rng = np.random.default_rng(20240611)
    for n in (4, 5, 6, 8):
        for _ in range(6):
            yield rng.uniform(-1, 1, n)
    for n in (12, 20, 30):
        yield rng.normal(size=n)
        yield np.concatenate([rng.normal(-3, 0.5, n // 2), rng.normal(3, 0.5, n - n // 2)])
        yield rng.uniform(size=n)
        yield rng.exponential(size=n)


def main():
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).parents[1] / "data" / "dip_oracle.txt"
    lines = []
    for x in cases():
        x = np.sort(x)
        d = dip_lp(x)
        lines.append(" ".join([str(len(x)), repr(float(d))] + [repr(float(v)) for v in x]))
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} cases to {out}")


if __name__ == "__main__":
    main()
