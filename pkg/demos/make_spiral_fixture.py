"""Regenerate the synthetic spiral model shipped in ``mmreach/data``.

The benchmark spiral network has a 2 -> 10 -> 2 tanh architecture whose
trained weights are not published with it. This script builds a stand-in of
the same shape: random hidden features ``tanh(W1 x + b1)`` (fixed seed) and an
output layer fitted by least squares to the damped linear spiral
``x' = A x`` with ``A = [[-0.1, 2.0], [-2.0, -0.1]]`` on ``[-2, 2]^2``.

    python demos/make_spiral_fixture.py src/mmreach/data/spiral_synthetic.json
"""

import json
import sys

import numpy as np

A = np.array([[-0.1, 2.0], [-2.0, -0.1]])


def build(seed=7, hidden=10):
    rng = np.random.default_rng(seed)
    W1 = rng.normal(scale=0.5, size=(hidden, 2))
    b1 = rng.normal(scale=0.1, size=hidden)
    grid = np.stack(np.meshgrid(np.linspace(-2, 2, 41), np.linspace(-2, 2, 41)), -1).reshape(-1, 2)
    feats = np.hstack([np.tanh(grid @ W1.T + b1), np.ones((len(grid), 1))])
    coef, *_ = np.linalg.lstsq(feats, grid @ A.T, rcond=None)
    W2, b2 = coef[:-1].T, coef[-1]
    return {
        "name": "spiral-synthetic",
        "state_dim": 2,
        "layers": [
            {"kind": "linear", "W": W1.tolist(), "b": b1.tolist()},
            {"kind": "tanh"},
            {"kind": "linear", "W": W2.tolist(), "b": b2.tolist()},
        ],
    }


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "spiral_synthetic.json"
    with open(out, "w") as fh:
        json.dump(build(), fh, indent=1)
    print(f"wrote {out}")
