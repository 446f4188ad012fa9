"""Polynomial epsilon-weights (1 + eps d)^delta recover the unweighted norm as eps shrinks.

Twenty random banded kernels are measured at eps = 2^-j. The weighted norm
decreases with eps and the remaining excess is first order in eps.
"""

from _common import run

recs = run("eps-limit").records()
last = max(r["j"] for r in recs)
worst = {}
for r in recs:
    if r["j"] == last:
        worst[r["p"]] = max(worst.get(r["p"], 0.0), abs(r["rel_diff"]))
for p, val in sorted(worst.items()):
    print(f"p={p}: worst relative excess at eps=2^-{last} over all kernels = {val:.2e}")
