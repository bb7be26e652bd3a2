#!/usr/bin/env python3
"""Reference values used by the C++ tests, computed independently.

Run: python3 scripts/oracles.py
"""
import math


def weighted_bce(batch):
    total = 0.0
    for y, p, w in batch:
        total += w * (y * math.log(p) + (1 - y) * math.log(1 - p))
    return -total / len(batch)


def entropy(counts):
    n = sum(counts)
    return -sum(c / n * math.log(c / n) for c in counts if c)


def ecdf(values):
    ordered = sorted(values)
    n = len(ordered)
    out = []
    for rank, v in enumerate(ordered, start=1):
        if rank < n and ordered[rank] == v:
            continue
        out.append((v, rank / n))
    return out


if __name__ == "__main__":
    print(f"weighted_bce {{(1,0.8,2),(0,0.3,1)}} = {weighted_bce([(1, 0.8, 2), (0, 0.3, 1)]):.10f}")
    print(f"entropy {{3,1}} = {entropy([3, 1]):.10f}")
    print(f"entropy uniform-4 = {entropy([1, 1, 1, 1]):.15f} (ln 4 = {math.log(4):.15f})")
    print(f"ecdf [1,2,3] = {ecdf([1, 2, 3])}")
    print(f"ecdf [2,1,2,5] = {ecdf([2, 1, 2, 5])}")
