"""Which radial weights are admissible, and which have weak growth?

Subexponential profiles such as log-polynomial and root weights pass every
check. The linear profile is submultiplicative but fails the GRS condition,
so it is reported as not admissible.
"""

from _common import run

for r in run("weights-audit").records():
    flags = " ".join(f"{k}={'y' if r[k] else 'n'}" for k in ("concave_ok", "grs_ok", "submult_ok", "even_ok"))
    print(f"  {r['weight']:<26} admissible={r['admissible']!s:<5} weak growth={r['weak_growth_ok']!s:<5} {flags}")
