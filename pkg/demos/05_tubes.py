"""
Reachable tubes
===============

Jacobian bounds are only valid over a region that contains every trajectory
for the whole horizon. The Lipschitz tube is a guaranteed fallback; the
sampled tube is tighter but heuristic.
"""

from mmreach import IntervalVector, fpa_model, load_model, tube_lipschitz, tube_monte_carlo

model = fpa_model()
x0 = IntervalVector([-0.1] * 5, [0.1] * 5)

lip = tube_lipschitz(model, x0, 2.0)
mc = tube_monte_carlo(model, x0, 2.0, n_samples=2000, inflation=0.1, seed=0)
print(f"Lipschitz L_f = {lip.lipschitz:.4f}, certified by Picard check: {lip.certified}")
print("  lipschitz widths:", lip.box.width.round(3))
print("  sampled widths:  ", mc.box.width.round(3))

# short horizons are easier to certify
for t in (0.05, 0.2, 1.0):
    print(f"T = {t}: certified {tube_lipschitz(model, x0, t).certified}")

spiral = load_model("spiral-synthetic")
print("spiral tube:", tube_lipschitz(spiral, IntervalVector([1.9, -0.1], [2.1, 0.1]), 0.5).box)
