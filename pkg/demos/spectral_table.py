"""Spectral types of every catalog pipeline at random generic parameters."""
import sys

from qmc import spectral

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 20240601
for row in spectral.table1(seed=seed, draws=3):
    mark = "ok " if row["pass"] else "MISMATCH"
    print(f"{row['row']:<24} expected {row['expected']:<14} got {', '.join(row['got']):<44} {mark}")
