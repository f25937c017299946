"""Straight-line scalar reimplementations used as test oracles.

Nothing here imports the package; every formula is written out with plain
floats so that a shared bug cannot hide on both sides of a comparison.
"""

from __future__ import annotations


def tdrr_oracle(lams, c1, c2, tau, power):
    s = []
    for lam in lams:
        s.append(lam / (1.0 + lam))
    u = []
    for v in s:
        u.append(v * v if power == 2 else v)
    first = []
    for j in range(len(u) - 1):
        first.append((u[j] + c1) / (u[j + 1] + c1) - 1.0)
    second = []
    for j in range(len(first) - 1):
        second.append((first[j + 1] + c2) / (first[j] + c2))
    q = 0
    for j in range(len(second)):
        if second[j] <= tau:
            q = j + 1
    return q, first, second


def rre_oracle(lams, c):
    best, best_j = None, 0
    for j in range(len(lams) - 1):
        r = (lams[j + 1] + c) / (lams[j] + c)
        if best is None or r < best:
            best, best_j = r, j + 1
    return best_j
