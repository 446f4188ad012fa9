"""Inverses keep exponential off-diagonal decay, and the rate does not depend on the section size.

For tridiag(1, 4, 1) the bi-infinite inverse decays like lambda^|k-l| with
lambda = 2 - sqrt(3). Finite sections recover this rate from the middle rows,
and the inverse norm settles once the section is a few decay lengths wide.
"""

import math

from _common import run

lam = 2 - math.sqrt(3)
print(f"oracle decay ratio lambda = {lam:.8f}, log lambda = {math.log(lam):.8f}")
for r in run("inverse-closed").records():
    print(f"  N={r['size']:>4}  ||A^-1||={r['inv_norm']:.8f}  rate={r['decay_rate']:.8f}"
          f"  ratio={r['decay_ratio']:.8f}  fit residual={r['fit_residual']:.1e}")
