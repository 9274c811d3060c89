"""Tangent directions of the cross |sin x1| = |sin x2| at the origin.

The equality set near 0 is the union of the two diagonals, a nonconvex
cone.  No single choice of sub/superdifferential elements sees all of it,
but each vertex selection yields one convex piece, and the four pieces
together cover the whole thing.
"""
import numpy as np

from qdopt import load_bundled
from qdopt.cq import passing_selections
from qdopt.optimality import build_cone_k, sample_cone_rays
from qdopt.oracle import SamplingConfig, contingent_membership

p = load_bundled("sine_cross")
q = p.qd_equalities[0]
print("sub =", q.sub.canonical())
print("sup =", q.sup.canonical())

# Every vertex pair (x*, y*) passes; each gives one ray.
cfg = SamplingConfig(steps=(1e-3, 1e-4))
for k, (sel, witness) in enumerate(passing_selections(p), 1):
    K = build_cone_k(p, sel)
    rays = sample_cone_rays(K, 20, seed=k)
    worst = max(contingent_membership(p, p.anchor, v, cfg).score for v in rays)
    print(f"K{k}: {sel.describe(p.active):32s} {K.describe():22s} worst score {worst:.1e}")

# A direction off both diagonals is far from the feasible set.
off = contingent_membership(p, p.anchor, (1, 0), cfg)
print("score of (1, 0):", np.round(off.scores, 3))
