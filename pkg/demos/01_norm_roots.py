"""Norm roots of a tridiagonal Toeplitz section converge down to its operator norm.

The 64-point section of tridiag(1, 4, 1) is hermitian with top eigenvalue
4 + 2cos(pi/65). In every weighted p-algebra the j-th norm roots
s_j = ||A^(2^j)||^(2^-j) decrease towards that value raised to p, which is
the finite-dimensional shadow of inverse-closedness in B(l^2).
"""

from _common import run

table = run("barnes")
print(f"{'p':>5} {'weight':<24} {'j':>2} {'s_j':>12} {'op^p':>12} {'gap':>9}")
for r in table.records():
    if r["j"] in (0, 4, 8):
        print(f"{r['p']:>5} {r['weight']:<24} {r['j']:>2} {r['s_j']:12.6f} {r['eig_oracle']:12.6f} {r['rel_gap']:9.2e}")

print("\nA random hermitian kernel on a point cloud, and a 2-D lattice kernel (last root):")
for name in ("barnes-random", "barnes-plane"):
    recs = run(name).records()
    last = max(r["j"] for r in recs)
    for r in recs:
        if r["j"] == last:
            target = r["eig_oracle"] if r["eig_oracle"] is not None else r["op_norm_p"]
            print(f"  {r['matrix']:<12} p={r['p']:<4} s_{last}={r['s_j']:.6f}  target={target:.6f}"
                  f"  r_p={r['rp_estimate']:.4f} <= {r['barnes_rhs']:.4f}")
