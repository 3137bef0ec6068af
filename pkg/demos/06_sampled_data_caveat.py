"""
When sampled sensitivity bounds are too optimistic
==================================================

The sampled-data method needs bounds on the flow sensitivity over the whole
initial box. They are estimated from a hundred samples, padded by a fraction
of their width. On larger boxes that estimate can miss the extremes and the
resulting box then misses some true successors. More padding restores
soundness at the cost of tightness.
"""

from mmreach import IntervalVector, ReachSpec, fpa_model, reach, sample_successors, tightness

model = fpa_model()
pairs = [(0, 1), (2, 3), (3, 4)]

for a in (0.1, 0.3, 1.0):
    x0 = IntervalVector([-a] * 5, [a] * 5)
    cloud = sample_successors(model, x0, 2.0, 10_000, seed=1)
    for method, pad in (("ct_mm", None), ("sd_mm", 0.05), ("sd_mm", 1.0)):
        spec = ReachSpec(model, x0, 2.0, method=method)
        if pad is not None:
            spec = spec.with_(sensitivity_inflation=pad)
        rep = tightness(reach(spec), cloud, pairs)
        label = method if pad is None else f"{method} pad {pad}"
        ratios = ", ".join(f"{r:.2f}" for r in rep.per_projection.values())
        print(f"a = {a:<4} {label:<16} ratios {ratios:<22} misses {rep.soundness_violations}")
