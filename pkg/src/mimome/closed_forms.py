"""Closed-form and asymptotic allocations: Gaussian water-filling, the
low-SNR expansion for real alphabets, and the high-SNR saturation point.

These serve two roles: fast references that the dual solver must reproduce
when the input is Gaussian, and the analytic overlay curves for rate sweeps.
All powers are in the normalized variable (budget is a plain sum).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .allocate import LN2, PowerAllocation, _active_arrays
from .constellations import Constellation, as_input_model
from .gsvd import ParallelChannelBank

__all__ = [
    "gaussian_allocate",
    "gaussian_rate",
    "low_snr_allocate",
    "low_snr_rate",
    "high_snr_allocate",
    "high_snr_rate",
    "HighSnrParams",
    "fit_high_snr_constant",
]


def _validate_power(bank, p):
    p = np.asarray(p, dtype=float)
    if p.shape != (bank.size,):
        raise ValueError(f"allocation must have length {bank.size}")
    if np.any(p < 0):
        raise ValueError("allocation must be nonnegative")
    active = {c.index for c in bank.active}
    stray = [i for i in range(bank.size) if i not in active and p[i] > 1e-12]
    if stray:
        raise ValueError(f"allocation puts power on inactive directions {stray}")
    return p


def _gaussian_powers(b2, e2, om, mu):
    """Water-filling powers at multiplier mu. Shared channels solve the
    Gaussian stationarity condition in closed form (a quadratic in p); the
    e2 = 0 limit reduces to the Bob-only level 1/mu - omega."""
    inv = 1.0 / mu
    p = np.zeros_like(om)
    shared = e2 > 0
    base = np.where(shared, om / np.maximum(b2 - e2, 1e-300), om)
    on = inv > base
    sh = shared & on
    if sh.any():
        a = om[sh] / (b2[sh] * e2[sh])
        gap = b2[sh] - e2[sh]
        p[sh] = 0.5 * (np.sqrt(a * a + 4.0 * a * gap * (inv - base[sh])) - a)
    bo = (~shared) & on
    p[bo] = inv - om[bo]
    return p


def gaussian_allocate(bank: ParallelChannelBank, total_power: float,
                      tol: float = 1e-12, max_iters: int = 2000) -> PowerAllocation:
    """Water-filling for the Gaussian input over the active channels.

    The Gaussian secrecy rate grows without bound in the budget, so the
    constraint is always tight; mu is found by bisection on the closed-form
    powers.
    """
    if total_power < 0 or not np.isfinite(total_power):
        raise ValueError("total power must be finite and nonnegative")
    p_full = np.zeros(bank.size)
    b2, e2, om, idx = _active_arrays(bank)
    if idx.size == 0 or total_power == 0:
        return PowerAllocation(p_full, 0.0, "gaussian", 0, -total_power,
                               slack=True, converged=True)
    base = np.where(e2 > 0, om / (b2 - e2), om)
    mu_hi = 1.0 / base.min()            # all channels shut off here
    mu_lo = mu_hi
    for _ in range(200):
        mu_lo /= 2.0
        if _gaussian_powers(b2, e2, om, mu_lo).sum() > total_power:
            break
    it = 0
    for it in range(1, max_iters + 1):
        mu = 0.5 * (mu_lo + mu_hi)
        p = _gaussian_powers(b2, e2, om, mu)
        resid = p.sum() - total_power
        if abs(resid) <= tol * total_power:
            break
        if resid > 0:
            mu_lo = mu
        else:
            mu_hi = mu
    p_full[idx] = p
    return PowerAllocation(p_full, mu, "gaussian", it, resid, slack=False,
                           converged=abs(resid) <= tol * total_power)


def gaussian_rate(bank: ParallelChannelBank, alloc: PowerAllocation) -> float:
    """Secrecy rate of an allocation under Gaussian inputs, in bits:
    sum log2((1 + b2 p/w)/(1 + e2 p/w)) + sum log2(1 + p/w)."""
    p = _validate_power(bank, alloc.p)
    total = 0.0
    for ch in bank.active:
        snr_b = ch.b2 * p[ch.index] / ch.omega
        snr_e = ch.e2 * p[ch.index] / ch.omega
        total += math.log2(1.0 + snr_b) - math.log2(1.0 + snr_e)
    return total


def low_snr_allocate(bank: ParallelChannelBank, total_power: float,
                     second_order_optimal: bool,
                     tol: float = 1e-12, max_iters: int = 2000) -> PowerAllocation:
    """Low-SNR allocation.

    Alphabets whose low-SNR MMSE matches the Gaussian's (QPSK, square QAM)
    water-fill exactly like the Gaussian input, so the problem delegates.
    Real alphabets (BPSK, M-PAM) have mmse(rho) ~ 1 - 2 rho, giving the
    linear-in-mu levels p = (w/2)(1 - mu w / (b2 - e2)) on shared channels and
    p = (w/2)(1 - mu w) on Bob-only ones. The expansion is only meaningful
    for small budgets; if P_T exceeds the mu = 0 total sum(w/2) the budget is
    left slack at that point.
    """
    if second_order_optimal:
        return replace(gaussian_allocate(bank, total_power, tol, max_iters),
                       method="low-snr")
    if total_power < 0 or not np.isfinite(total_power):
        raise ValueError("total power must be finite and nonnegative")
    p_full = np.zeros(bank.size)
    b2, e2, om, idx = _active_arrays(bank)
    if idx.size == 0 or total_power == 0:
        return PowerAllocation(p_full, 0.0, "low-snr", 0, -total_power,
                               slack=True, converged=True)
    gap = b2 - e2

    def powers(mu):
        return np.maximum(0.5 * om * (1.0 - mu * om / gap), 0.0)

    p0 = powers(0.0)
    if p0.sum() <= total_power * (1.0 + tol):
        p_full[idx] = p0
        return PowerAllocation(p_full, 0.0, "low-snr", 1, p0.sum() - total_power,
                               slack=True, converged=True)
    mu_lo, mu_hi = 0.0, float((gap / om).max())
    it = 0
    for it in range(1, max_iters + 1):
        mu = 0.5 * (mu_lo + mu_hi)
        p = powers(mu)
        resid = p.sum() - total_power
        if abs(resid) <= tol * total_power:
            break
        if resid > 0:
            mu_lo = mu
        else:
            mu_hi = mu
    p_full[idx] = p
    return PowerAllocation(p_full, mu, "low-snr", it, resid, slack=False,
                           converged=abs(resid) <= tol * total_power)


def low_snr_rate(bank: ParallelChannelBank, alloc: PowerAllocation) -> float:
    """Quadratic low-SNR rate approximation for real alphabets, in nats:
    sum (b2 - e2)(p - p^2) over shared channels plus sum (p - p^2) over
    Bob-only ones, in the normalized power variable.

    This is the I(rho) ~ rho - rho^2 expansion with the channel's omega
    absorbed into the normalization, so it tracks the exact rate only for
    small normalized powers on channels with omega near 1; rate sweeps score
    low-SNR allocations with the exact evaluator instead.
    """
    p = _validate_power(bank, alloc.p)
    total = 0.0
    for ch in bank.active:
        pw = p[ch.index]
        gain = (ch.b2 - ch.e2) if ch.kind == "shared" else 1.0
        total += gain * (pw - pw * pw)
    return total


def high_snr_allocate(bank: ParallelChannelBank, c: Constellation,
                      rho_cap: float = 1e4) -> PowerAllocation:
    """Saturation-point allocation for a finite alphabet (the mu -> 0 limit).

    Shared channels balance b2 mmse(b2 p/w) = e2 mmse(e2 p/w) under the
    exponential tail mmse(rho) ~ K exp(-(d^2/4) rho), giving

        p = w ln(b2/e2) / ((d^2/4)(b2 - e2)),

    independent of K. Stronger shared channels (larger b2 - e2 per omega)
    therefore receive less power, a channel-inversion pattern. Bob-only
    channels have no finite saturation point and are driven to the SNR cap,
    p = w rho_cap (power proportional to omega, again channel inversion).
    Shared channels with e2 = 0 behave like Bob-only ones. No budget enters:
    this is the asymptote a large-budget dual solution approaches.
    """
    if c.is_gaussian:
        raise ValueError("the Gaussian input has no high-SNR saturation point")
    d2 = c.min_distance ** 2
    p_full = np.zeros(bank.size)
    for ch in bank.active:
        if ch.kind == "shared" and ch.e2 > 0:
            p_full[ch.index] = (ch.omega * math.log(ch.b2 / ch.e2)
                                / ((d2 / 4.0) * (ch.b2 - ch.e2)))
        else:
            p_full[ch.index] = ch.omega * rho_cap
    return PowerAllocation(p_full, 0.0, "high-snr", 0, 0.0, slack=True,
                           converged=True)


def high_snr_rate(bank: ParallelChannelBank, c: Constellation,
                  alloc: PowerAllocation | None = None) -> float:
    """High-SNR analytic rate, in bits: log2(M) for every channel Eve cannot
    see at all, plus the exact finite-alphabet rate of the shared channels at
    their saturation powers."""
    if c.is_gaussian:
        raise ValueError("the Gaussian input has no high-SNR saturation rate")
    if alloc is None:
        alloc = high_snr_allocate(bank, c)
    p = _validate_power(bank, alloc.p)
    model = as_input_model(c)
    log2m = c.max_mi / LN2
    total = 0.0
    for ch in bank.active:
        if ch.kind == "shared" and ch.e2 > 0:
            rb = float(model.mutual_info(ch.b2 * p[ch.index] / ch.omega)) / LN2
            re = float(model.mutual_info(ch.e2 * p[ch.index] / ch.omega)) / LN2
            total += rb - re
        else:
            total += log2m
    return total


@dataclass(frozen=True)
class HighSnrParams:
    """Fitted exponential-tail parameters mmse(rho) ~ K exp(-(d^2/4) rho)."""

    constellation: str
    k_const: float
    min_distance: float
    rho_lo: float
    rho_hi: float
    rms_residual: float

    @property
    def decay(self) -> float:
        return self.min_distance ** 2 / 4.0


def fit_high_snr_constant(c: Constellation, rho_lo: float = 10.0,
                          rho_hi: float = 100.0, n: int = 16) -> HighSnrParams:
    """Least-squares fit of ln mmse(rho) + (d^2/4) rho to a constant ln K over
    [rho_lo, rho_hi], using the adaptive-quadrature evaluator (the
    Gauss-Hermite path loses relative accuracy out here). K is a reported
    diagnostic; the saturation power does not depend on it."""
    if c.is_gaussian:
        raise ValueError("the Gaussian mmse has no exponential tail")
    rhos = np.linspace(rho_lo, rho_hi, n)
    decay = c.min_distance ** 2 / 4.0
    lnk = np.array([math.log(c.mmse_quad(r)) + decay * r for r in rhos])
    k_const = float(np.exp(lnk.mean()))
    rms = float(np.sqrt(np.mean((lnk - lnk.mean()) ** 2)))
    return HighSnrParams(c.name, k_const, c.min_distance, rho_lo, rho_hi, rms)
