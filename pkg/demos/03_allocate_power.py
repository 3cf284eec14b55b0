"""Optimal power allocation over parallel wiretap channels.

The secrecy rate decomposes per channel, coupled only by the total power
budget. The solver dualizes the budget: for a price mu each channel solves
a scalar problem (an MMSE balance for shared channels, a capped fill for
Bob-only ones), and a master bisection drives the total spend onto the
budget. Watch what happens as the budget grows: with a finite alphabet
the strongest channel is served LESS, because its rate saturates and any
extra power only helps the eavesdropper.
"""
import numpy as np

from mimome import (
    ParallelChannel,
    ParallelChannelBank,
    SecrecyProblem,
    constellation,
    dual_decomposition,
    secrecy_rate,
)

bank = ParallelChannelBank((
    ParallelChannel(0, "shared", 0.90, 0.10, 1.0),   # strong
    ParallelChannel(1, "shared", 0.70, 0.30, 1.0),   # middling
    ParallelChannel(2, "shared", 0.55, 0.45, 2.0),   # weak, noisy direction
    ParallelChannel(3, "eve", 0.0, 1.0, 0.5),        # never gets power
), null_dim=0)
c = constellation("bpsk")

print("budget    p0      p1      p2      p3   | rate (bits)   mu")
for pt in (0.25, 1.0, 4.0, 16.0, 64.0):
    alloc = dual_decomposition(SecrecyProblem(bank, c, pt))
    rate = secrecy_rate(SecrecyProblem(bank, c, pt), alloc).total_bits
    p = alloc.p
    print(f"{pt:6.2f}  {p[0]:6.3f}  {p[1]:6.3f}  {p[2]:6.3f}  {p[3]:6.3f} "
          f"| {rate:11.6f}  {alloc.mu:.2e}")

# past saturation the budget goes slack: the optimum needs no more power
alloc = dual_decomposition(SecrecyProblem(bank, c, 1000.0))
print(f"\nbudget 1000: spends only {alloc.total:.4f} (slack={alloc.slack}), "
      f"every shared channel parked at its balance point")

res = secrecy_rate(SecrecyProblem(bank, c, 1000.0), alloc)
print("\nper-channel split at saturation")
for ch in res.per_channel:
    print(f"  channel {ch.index} ({ch.kind}): power {ch.power:.4f}, "
          f"bob {ch.rate_bob_bits:.4f} - eve {ch.rate_eve_bits:.4f} bits")
