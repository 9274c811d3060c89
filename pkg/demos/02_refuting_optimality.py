"""Catching a non-optimal point without guessing a descent direction.

Minimise |x1| - |x2| over the half-plane x2 <= x1.  The origin looks
plausible, but the concave part -|x2| has two superdifferential vertices
and the multiplier inclusion must hold for every one of them.  It fails
for y0* = (0, 1); the sampling oracle then finds a better point exactly.
"""
from qdopt import analyze, load_bundled
from qdopt.oracle import local_improvement

p = load_bundled("dc_halfplane")
report = analyze(p)
print(report.to_text())

better = local_improvement(p, directions=[(1, -2)])
print(f"better point {tuple(map(str, better.point))}, objective {better.value}, exact={better.exact}")

# Same story in one dimension: min x s.t. min(x, x^3) <= 0.  The constraint
# has a zero subdifferential, so a smooth KKT check has nothing to hold on to.
cubic = load_bundled("degenerate_cubic")
print(analyze(cubic).classification, local_improvement(cubic))
