"""A twisted-convolution element is inverted through finite sections of its matrix realization.

The inverse found by solving on a box of radius R is compared against a
Neumann series, and its weighted norm is tracked as R grows. Stable norms
and a vanishing Neumann deviation mean the truncation is no longer visible.
"""

from _common import run

for r in run("wiener-twisted").records():
    print(f"  R={r['op_radius']:>3} p={r['p']:<4} ||b||={r['norm_b']:.10f}"
          f"  residual={r['residual']:.1e}  vs Neumann={r['oracle_deviation']:.1e}")
