"""Secrecy-rate power allocation over a parallel channel bank.

The problem: maximize sum of I(b2 p/w) - I(e2 p/w) over shared channels plus
I(p/w) over Bob-only channels, subject to sum(p) <= P_T in the normalized
power variable (p' = omega * p absorbs the precoder column norms, making the
budget a plain sum). Eve-only and null directions never carry power, nor do
shared channels with b2 <= e2.

Dual decomposition: for a multiplier mu >= 0 each channel solves a scalar
stationarity condition,

    shared:   (b2 mmse(b2 p/w) - e2 mmse(e2 p/w)) / w = mu
    Bob-only: p = w * mmse^-1(min(1, mu w))

whose left side starts at (b2-e2)/w and crosses mu exactly once, and the
master drives sum(p(mu)) to the budget. The master runs either as bisection
on mu (default; sum(p(mu)) is continuous and nonincreasing) or as the fixed
step projected subgradient iteration mu <- [mu + alpha (sum p - P_T)]+.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellations import as_input_model, mmse_inverse
from .gsvd import ParallelChannelBank

__all__ = [
    "SolverConfig",
    "SecrecyProblem",
    "PowerAllocation",
    "ChannelRate",
    "SecrecyRateResult",
    "SolverError",
    "solve_subproblem1",
    "solve_subproblem2",
    "dual_decomposition",
    "dual_value",
    "secrecy_rate",
    "uniform_allocation",
    "precoder_powers",
]

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class SolverConfig:
    """Dual solver knobs.

    ``power_tol`` is relative to the budget; ``root_tol`` is the relative
    tolerance of every scalar root search; ``rho_cap`` saturates per-channel
    SNR when mu -> 0 leaves a finite-alphabet subproblem unbounded;
    ``alpha`` is the subgradient step (default 0.1 / P_T when unset).
    """

    method: str = "bisection"
    alpha: float | None = None
    max_iters: int = 5000
    power_tol: float = 1e-9
    rho_cap: float = 1e4
    root_tol: float = 1e-11
    use_table: bool = True

    def __post_init__(self):
        if self.method not in ("bisection", "subgradient"):
            raise ValueError(f"unknown master method {self.method!r}")
        if self.power_tol <= 0 or self.root_tol <= 0 or self.rho_cap <= 0:
            raise ValueError("tolerances and rho_cap must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class SecrecyProblem:
    """A channel bank, an input model, and a power budget."""

    bank: ParallelChannelBank
    constellation: object
    total_power: float

    def __post_init__(self):
        if not np.isfinite(self.total_power) or self.total_power < 0:
            raise ValueError("total power must be finite and nonnegative")


@dataclass(frozen=True)
class PowerAllocation:
    """Normalized per-direction powers (length = bank.size), the multiplier,
    and solver bookkeeping. ``residual`` is sum(p) - P_T (nonpositive when the
    budget ended slack)."""

    p: np.ndarray
    mu: float
    method: str
    iterations: int
    residual: float
    slack: bool
    converged: bool

    @property
    def total(self) -> float:
        return float(self.p.sum())

    @property
    def active(self) -> np.ndarray:
        """Boolean mask of channels actually carrying power."""
        return self.p > 0


class SolverError(RuntimeError):
    """Raised when a master loop exhausts its iteration budget; carries the
    best iterate seen."""

    def __init__(self, message, allocation=None):
        super().__init__(message)
        self.allocation = allocation


class _MasterFail(Exception):
    """Internal: master could not meet the power tolerance."""

    def __init__(self, message, p, mu, iters, resid):
        super().__init__(message)
        self.p, self.mu, self.iters, self.resid = p, mu, iters, resid


def _active_arrays(bank):
    act = bank.active
    b2 = np.array([c.b2 for c in act])
    e2 = np.array([c.e2 for c in act])
    om = np.array([c.omega for c in act])
    idx = np.array([c.index for c in act], dtype=int)
    return b2, e2, om, idx


def _solve_channels(model, b2, e2, om, mu, rho_cap, root_tol):
    """Stationary powers of all channels at multiplier mu, in lockstep.

    Brackets each root by doubling, then bisects every channel together so a
    master iteration costs a handful of vectorized mmse calls. Channels whose
    marginal gain at zero, (b2 - e2)/w, does not exceed mu stay at 0; channels
    whose SNR would exceed rho_cap saturate there.
    """
    n = b2.size
    if n == 0:
        return np.zeros(0)

    def f(p):
        rho = np.concatenate([b2 * p / om, e2 * p / om])
        mm = np.atleast_1d(model.mmse(rho))
        return (b2 * mm[:n] - e2 * mm[n:]) / om

    cap = rho_cap * om / np.where(b2 > 0, b2, 1.0)
    on = (b2 - e2) / om > mu
    lo = np.zeros(n)
    hi = np.ones(n)
    np.minimum(hi, cap, out=hi)
    # expand until f(hi) <= mu (or the cap saturates the channel)
    for _ in range(200):
        val = f(hi)
        grow = on & (val > mu) & (hi < cap)
        if not grow.any():
            break
        lo[grow] = hi[grow]
        hi[grow] = np.minimum(hi[grow] * 2.0, cap[grow])
    saturated = on & (f(hi) > mu) & (hi >= cap)
    lo[saturated] = hi[saturated]
    for _ in range(200):
        live = on & ~saturated & (hi - lo > root_tol * np.maximum(hi, 1.0))
        if not live.any():
            break
        mid = 0.5 * (lo + hi)
        above = f(mid) > mu
        lo[live & above] = mid[live & above]
        hi[live & (~above)] = mid[live & (~above)]
    p = 0.5 * (lo + hi)
    p[~on] = 0.0
    p[saturated] = cap[saturated]
    return p


def solve_subproblem1(model, b2, e2, omega, mu,
                      rho_cap: float = 1e4, root_tol: float = 1e-11) -> float:
    """Optimal normalized power of one shared channel at multiplier mu.

    Returns 0 when b2 <= e2 (the channel can never help secrecy) or when mu
    is at least the marginal gain at zero. At mu = 0 this is the unique zero
    of the mmse difference, the channel's saturation power.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if omega <= 0:
        raise ValueError("omega must be positive")
    if not (0.0 <= b2 <= 1.0 and 0.0 <= e2 <= 1.0):
        raise ValueError("squared gains must lie in [0, 1]")
    if b2 <= e2:
        return 0.0
    model = as_input_model(model, table=False) if isinstance(model, str) else model
    p = _solve_channels(model, np.array([b2]), np.array([e2]), np.array([omega]),
                        mu, rho_cap, root_tol)
    return float(p[0])


def solve_subproblem2(model, omega, mu,
                      rho_cap: float = 1e4, root_tol: float = 1e-9) -> float:
    """Optimal normalized power of a Bob-only channel: w * mmse^-1(min(1, mu w)),
    saturating at w * rho_cap as mu -> 0 (mmse^-1(0+) diverges for any input)."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if omega <= 0:
        raise ValueError("omega must be positive")
    model = as_input_model(model, table=False) if isinstance(model, str) else model
    target = min(1.0, mu * omega)
    if target <= 0.0:
        return omega * rho_cap
    return omega * min(mmse_inverse(model, target, rho_cap, root_tol), rho_cap)


def _master_bisection(model, b2, e2, om, pt, cfg):
    solve = lambda mu: _solve_channels(model, b2, e2, om, mu, cfg.rho_cap, cfg.root_tol)
    p0 = solve(0.0)
    total0 = p0.sum()
    if total0 <= pt * (1.0 + cfg.power_tol):
        return p0, 0.0, 1, total0 - pt, True, True
    # bracket invariant: sum p(mu_lo) > pt > sum p(mu_hi)
    mu_lo, mu_hi = 0.0, float(np.max((b2 - e2) / om))
    p_lo, p_hi = p0, np.zeros_like(p0)
    best = (p0, 0.0, total0 - pt)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        mu = 0.5 * (mu_lo + mu_hi)
        if mu <= mu_lo or mu >= mu_hi:
            break               # interval at float resolution
        p = solve(mu)
        resid = p.sum() - pt
        if abs(resid) < abs(best[2]):
            best = (p, mu, resid)
        if abs(resid) <= cfg.power_tol * pt:
            return p, mu, it, resid, False, True
        if resid > 0:
            mu_lo, p_lo = mu, p
        else:
            mu_hi, p_hi = mu, p
    else:
        p, mu, resid = best
        raise _MasterFail(
            f"master bisection hit the iteration cap with |residual| = "
            f"{abs(resid):.3e} (tolerance {cfg.power_tol * pt:.3e})",
            p, mu, cfg.max_iters, resid,
        )
    # sum p(mu) jumped across the budget inside one ulp of mu: some channel's
    # mmse is flat at the model's resolution there (deep-SNR plateau), so any
    # power split inside the jump changes the rate below numerical precision.
    # Fill the gap proportionally; the result is feasible and bracket-bound.
    room = np.maximum(p_lo - p_hi, 0.0)
    deficit = pt - p_hi.sum()
    if 0.0 < deficit <= room.sum():
        p = p_hi + room * (deficit / room.sum())
        return p, 0.5 * (mu_lo + mu_hi), it, p.sum() - pt, False, True
    p, mu, resid = best
    raise _MasterFail(
        f"master bisection stalled: |residual| = {abs(resid):.3e} "
        f"(tolerance {cfg.power_tol * pt:.3e})",
        p, mu, cfg.max_iters, resid,
    )


def _master_subgradient(model, b2, e2, om, pt, cfg):
    solve = lambda mu: _solve_channels(model, b2, e2, om, mu, cfg.rho_cap, cfg.root_tol)
    alpha = cfg.alpha if cfg.alpha is not None else 0.1 / pt
    mu = float(np.max((b2 - e2) / om)) / 2.0
    best = None
    for it in range(1, cfg.max_iters + 1):
        p = solve(mu)
        resid = p.sum() - pt
        if best is None or abs(resid) < abs(best[2]):
            best = (p, mu, resid)
        if abs(resid) <= cfg.power_tol * pt:
            return p, mu, it, resid, False, True
        if mu <= 1e-12 and resid <= 0:
            return p, mu, it, resid, True, True
        mu = max(0.0, mu + alpha * resid)
    p, mu, resid = best
    raise _MasterFail(
        f"subgradient master hit the iteration cap with |residual| = {abs(resid):.3e}",
        p, mu, cfg.max_iters, resid,
    )


def dual_decomposition(prob: SecrecyProblem, config: SolverConfig | None = None) -> PowerAllocation:
    """Solve the power allocation by dual decomposition.

    The mu = 0 allocation is checked first: if the per-channel saturation
    powers already fit the budget the constraint is slack and mu = 0 is
    optimal (complementary slackness). Otherwise the master runs to a tight
    budget. Raises SolverError (carrying the best iterate) if the master
    cannot meet ``power_tol`` within ``max_iters``.
    """
    cfg = config or SolverConfig()
    model = as_input_model(prob.constellation, table=cfg.use_table)
    bank = prob.bank
    p_full = np.zeros(bank.size)
    b2, e2, om, idx = _active_arrays(bank)
    if idx.size == 0 or prob.total_power == 0:
        return PowerAllocation(p_full, 0.0, "dual", 0, 0.0 - prob.total_power, True, True)
    master = _master_bisection if cfg.method == "bisection" else _master_subgradient
    try:
        p_act, mu, iters, resid, slack, ok = master(model, b2, e2, om, prob.total_power, cfg)
    except _MasterFail as fail:
        p_full[idx] = fail.p
        best = PowerAllocation(p_full, fail.mu, "dual", fail.iters, fail.resid, False, False)
        raise SolverError(str(fail), best) from None
    p_full[idx] = p_act
    return PowerAllocation(p_full, mu, "dual", iters, resid, slack, ok)


def dual_value(prob: SecrecyProblem, mu: float, config: SolverConfig | None = None) -> float:
    """Dual function g(mu) in nats: the per-channel maxima of the Lagrangian
    plus mu * P_T. Convex in mu; used to watch the master's progress."""
    cfg = config or SolverConfig()
    model = as_input_model(prob.constellation, table=cfg.use_table)
    b2, e2, om, _ = _active_arrays(prob.bank)
    p = _solve_channels(model, b2, e2, om, mu, cfg.rho_cap, cfg.root_tol)
    if p.size == 0:
        return mu * prob.total_power
    rate_b = np.atleast_1d(model.mutual_info(b2 * p / om))
    rate_e = np.where(e2 > 0, np.atleast_1d(model.mutual_info(e2 * p / om)), 0.0)
    return float(np.sum(rate_b - rate_e) - mu * p.sum() + mu * prob.total_power)


@dataclass(frozen=True)
class ChannelRate:
    index: int
    kind: str
    power: float
    rate_bob_bits: float
    rate_eve_bits: float

    @property
    def contribution_bits(self) -> float:
        return self.rate_bob_bits - self.rate_eve_bits


@dataclass(frozen=True)
class SecrecyRateResult:
    total_bits: float
    per_channel: tuple[ChannelRate, ...]


def secrecy_rate(prob: SecrecyProblem, alloc: PowerAllocation,
                 table: bool | None = None) -> SecrecyRateResult:
    """Exact secrecy rate of an allocation, in bits.

    Only shared channels with b2 > e2 and Bob-only channels enter the sum;
    the allocation must put no power anywhere else (that is an allocator
    contract, enforced here). ``table`` overrides the evaluation path; by
    default it matches the allocator's (cached table for finite alphabets).
    """
    bank = prob.bank
    p = np.asarray(alloc.p, dtype=float)
    if p.shape != (bank.size,):
        raise ValueError(f"allocation must have length {bank.size}")
    if np.any(p < 0):
        raise ValueError("allocation must be nonnegative")
    active_idx = {c.index for c in bank.active}
    stray = [i for i in range(bank.size) if i not in active_idx and p[i] > 1e-12]
    if stray:
        raise ValueError(
            f"allocation puts power on directions {stray} that cannot carry "
            "secrecy (Eve-only, null, or b2 <= e2)"
        )
    model = as_input_model(prob.constellation, table=True if table is None else table)
    rates = []
    total = 0.0
    for ch in bank.active:
        pw = p[ch.index]
        rb = float(model.mutual_info(ch.b2 * pw / ch.omega)) / LN2
        re = float(model.mutual_info(ch.e2 * pw / ch.omega)) / LN2 if ch.e2 > 0 else 0.0
        rates.append(ChannelRate(ch.index, ch.kind, pw, rb, re))
        total += rb - re
    return SecrecyRateResult(total_bits=total, per_channel=tuple(rates))


def uniform_allocation(prob: SecrecyProblem) -> PowerAllocation:
    """Split the budget equally over the channels that can carry secrecy
    (shared with b2 > e2, plus Bob-only)."""
    bank = prob.bank
    p = np.zeros(bank.size)
    _, _, _, idx = _active_arrays(bank)
    if idx.size:
        p[idx] = prob.total_power / idx.size
    return PowerAllocation(p, 0.0, "uniform", 0, p.sum() - prob.total_power,
                           slack=idx.size == 0, converged=True)


def precoder_powers(bank: ParallelChannelBank, alloc: PowerAllocation) -> np.ndarray:
    """Map normalized powers back to the original per-direction variable
    (divide by omega), ready for the precoder builder. tr(W W^H) then equals
    the normalized total."""
    p = np.asarray(alloc.p, dtype=float).copy()
    for ch in bank.channels:
        p[ch.index] /= ch.omega
    return p
