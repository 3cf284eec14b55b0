"""Secrecy under an imperfectly known eavesdropper channel.

The transmitter allocates power against the MEAN of Eve's channel; the true
channel adds a white Gaussian error of variance sigma_e2. Two effects fight:
the error leaks extra signal to Eve (bad), but power on the other streams
also reaches her through the error and acts as noise (good, at low power).
At high power the leakage wins, so more budget can mean LESS secrecy, and
negative instantaneous rates clamp to zero (transmission would pause).
"""
import numpy as np

from mimome import EnsembleSpec, UncertaintyModel, constellation, partial_csi_sweep

spec = EnsembleSpec(m_a=4, m_b=4, m_e=3, trials=30, seed=9)
c = constellation("qpsk")
u = UncertaintyModel(0.0, noise_trials=1500, seed=9)
sigmas = [0.0, 1e-3, 1e-2, 1e-1]

records = partial_csi_sweep(spec, c, [10.0, 20.0], sigmas,
                            method="dual", uncertainty=u)

print("4x4x3 ensemble, qpsk, allocation fixed at the mean channel")
print("sigma_e2   rate @10 dB      rate @20 dB")
by_sigma = {}
for r in records:
    by_sigma.setdefault(r.sigma_e2, {})[r.snr_db] = r
for s in sigmas:
    r10, r20 = by_sigma[s][10.0], by_sigma[s][20.0]
    print(f"{s:8.3f}   {r10.mean_rate_bits:.4f}+-{r10.stderr:.4f}"
          f"   {r20.mean_rate_bits:.4f}+-{r20.stderr:.4f}")

r10 = by_sigma[1e-2][10.0].mean_rate_bits
r20 = by_sigma[1e-2][20.0].mean_rate_bits
if r20 < r10:
    print(f"\nat sigma_e2=1e-2 the 20 dB rate ({r20:.3f}) is below the "
          f"10 dB rate ({r10:.3f}): past a point, power hurts")
