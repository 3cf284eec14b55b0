"""Closed-form allocations and where they meet the full solver.

Three analytic regimes bracket the numeric solution:

* gaussian input: the problem is exactly a secrecy water-filling with a
  quadratic per-channel root, so the dual solver must reproduce it.
* low budget: for real alphabets mmse(rho) ~ 1 - 2 rho, making the levels
  linear in the price; good to a few percent below -10 dB.
* high budget: rates saturate and power moves where the alphabet still has
  MMSE contrast, ending at a balance point independent of the budget.
"""
import numpy as np

from mimome import (
    SecrecyProblem,
    constellation,
    dual_decomposition,
    gaussian_allocate,
    gaussian_rate,
    high_snr_allocate,
    high_snr_rate,
    low_snr_allocate,
    secrecy_rate,
)
from mimome.gsvd import ParallelChannel, ParallelChannelBank

bank = ParallelChannelBank((
    ParallelChannel(0, "shared", 0.8, 0.2, 1.0),
    ParallelChannel(1, "shared", 0.6, 0.4, 0.7),
    ParallelChannel(2, "bob", 1.0, 0.0, 1.5),
), null_dim=0)

# --- gaussian input: solver == closed form, digit for digit ---------------
g = constellation("gaussian")
pt = 5.0
wf = gaussian_allocate(bank, pt)
dd = dual_decomposition(SecrecyProblem(bank, g, pt))
print("gaussian waterfilling powers:", np.round(wf.p, 8))
print("dual decomposition powers:   ", np.round(dd.p, 8))
print(f"rate both ways: {gaussian_rate(bank, wf):.10f} vs "
      f"{secrecy_rate(SecrecyProblem(bank, g, pt), dd).total_bits:.10f}")

# --- low budget -----------------------------------------------------------
c = constellation("bpsk")
print("\nbudget   dual rate     low-snr rate  gap")
for db in (-10, -15, -20):
    p_t = 10.0 ** (db / 10.0)
    prob = SecrecyProblem(bank, c, p_t)
    exact = secrecy_rate(prob, dual_decomposition(prob)).total_bits
    approx = secrecy_rate(prob, low_snr_allocate(bank, p_t,
                                                 c.second_order_optimal)).total_bits
    print(f"{db:4d} dB  {exact:.8f}   {approx:.8f}  {abs(exact-approx)/exact:6.2%}")

# --- high budget ----------------------------------------------------------
sat = high_snr_allocate(bank, c)
print(f"\nsaturation powers {np.round(sat.p, 4)} "
      f"(bob-only channel capped at rho_cap * omega)")
prob = SecrecyProblem(bank, c, 1e4)
exact = secrecy_rate(prob, dual_decomposition(prob)).total_bits
print(f"analytic saturation rate {high_snr_rate(bank, c, sat):.6f} bits, "
      f"dual at 40 dB {exact:.6f} bits")
