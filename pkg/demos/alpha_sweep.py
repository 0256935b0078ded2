"""Exact and numeric functional values across orders and grid sizes."""

from fracvar.harness import SWEEP_COLUMNS, alpha_sweep

rows = alpha_sweep({"problem": "p1", "c": 1.0}, [0.25, 0.5, 0.75, 1.0], [129, 513, 2049])
print("  ".join(f"{c:>12s}" for c in SWEEP_COLUMNS))
for r in rows:
    print("  ".join(f"{r[c]:>12.6g}" if isinstance(r[c], float) else f"{r[c]!s:>12s}" for c in SWEEP_COLUMNS))
