"""Finite shots and device noise.

Shot noise shrinks as shots grow, and reconstructed entries can dip below
zero.  The depolarizing knob compares cut evaluation with running the whole
circuit on one noisy device.
"""

import numpy as np

from qcut import bv
from qcut.harness import chi_squared, direct_noisy, run_pipeline, total_variation

circuit = bv(8)
for shots in (256, 1024, 8192):
    tv, neg = [], 0
    for seed in range(5):
        r = run_pipeline(circuit, 5, mode="shots", shots=shots, seed=seed)
        tv.append(total_variation(r.probabilities, r.oracle))
        neg += r.report.negative_entries
    print(f"{shots:5d} shots: mean TV {np.mean(tv):.4f}, negative entries over 5 seeds: {neg}")

circuit = bv(10)
cut, direct = [], []
for seed in range(3):
    r = run_pipeline(circuit, 5, mode="shots", shots=8192, seed=seed, noise=0.01)
    cut.append(r.report.chi2)
    direct.append(chi_squared(direct_noisy(circuit, 0.01, 8192, seed), r.oracle))
print(f"per-gate depolarizing 0.01: chi2 cut={np.mean(cut):.4f}, direct={np.mean(direct):.4f}")
print("(every cut adds noisy basis-change gates, so uniform gate noise does not favour cutting)")
