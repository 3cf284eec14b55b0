"""Ergodic secrecy rate over a random fading ensemble.

Channels are drawn i.i.d. complex Gaussian per trial, decomposed, solved,
and averaged; trial t of a given seed always sees the same draw, so runs
are reproducible and methods are compared on common channels. The point of
the exercise: with a finite alphabet the naive water-filling collapses at
high power (it keeps feeding saturated channels, which only helps Eve),
while the MMSE-aware solver holds its rate.
"""
import numpy as np

from mimome import EnsembleSpec, constellation, ergodic_sweep

spec = EnsembleSpec(m_a=4, m_b=4, m_e=3, trials=40, seed=3)
c = constellation("qpsk")
grid = np.array([-10.0, 0.0, 10.0, 20.0, 30.0, 40.0])

records = ergodic_sweep(spec, c, grid, methods=("dual", "gaussian", "uniform"))

by_method = {}
for r in records:
    by_method.setdefault(r.method, []).append(r)

print(f"4x4x3 ensemble, qpsk, {spec.trials} trials (mean +- stderr, bits)")
print("snr_db   " + "".join(f"{m:>20s}" for m in by_method))
for i, snr in enumerate(grid):
    row = "".join(
        f"  {by_method[m][i].mean_rate_bits:8.4f} +-{by_method[m][i].stderr:6.4f}"
        for m in by_method
    )
    print(f"{snr:6.0f} {row}")

# the saturation analytics predict where the dual curve flattens
hs = ergodic_sweep(spec, c, [40.0], methods=("high-snr",))[0]
dual40 = by_method["dual"][-1].mean_rate_bits
print(f"\nanalytic saturation {hs.mean_rate_bits:.4f} bits, "
      f"dual at 40 dB {dual40:.4f} bits "
      f"({100 * abs(dual40 - hs.mean_rate_bits) / hs.mean_rate_bits:.1f}% apart)")
