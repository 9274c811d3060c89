"""Selections can pass where classical regularity tests fail.

Three constraints, three different reasons a textbook check gives up:
  * the wedge pair is not in general position along (1, 1),
  * the sine kernel constraint has a diagonal ray the linearisation would
    admit but the feasible set does not,
  * the flat-face constraint has a non-singleton max-face along (1, 0).
The vertex-selection CQ still holds in each case.
"""
from qdopt import check_cq, check_qd_mfcq, load_bundled, search_selection
from qdopt.cq import Selection
from qdopt.geometry import general_position_at, max_face_singleton, negate
from qdopt.oracle import SamplingConfig, contingent_membership

wedge = load_bundled("max_min_wedge")
g = wedge.qd_inequalities[0]
print("general position at (1,1):", general_position_at((1, 1), g.sub, negate(g.sup)))
r = search_selection(wedge)
print("wedge:", r.status, r.selection.describe(wedge.active))

gap = load_bundled("sine_kernel_gap")
print("kernel gap CQ:", check_cq(gap, Selection(((0, 0),), ((1, 0),))) is not None)
score = contingent_membership(gap, (0, 0), (1, 1), SamplingConfig(steps=(1e-2, 1e-3)))
print("diagonal ray scores:", [round(s, 3) for s in score.scores])

flat = load_bundled("flat_face")
f = flat.qd_equalities[0]
print("singleton max-face at (1,0):", max_face_singleton(f.sub, (1, 0)))
print("flat-face CQ:", check_cq(flat, Selection(((0, 0),), ((0, 2),))) is not None)
print("q.d.-MFCQ on the flat face:", check_qd_mfcq(flat).holds)
