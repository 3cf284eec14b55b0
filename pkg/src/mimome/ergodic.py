"""Monte Carlo machinery: Rayleigh channel ensembles, per-method rate sweeps
over an SNR grid, and secrecy rates under imperfect eavesdropper CSI.

Every random quantity is drawn from a seeded per-trial substream
(``default_rng([seed, trial])``), so results are reproducible and independent
of execution order or thread count. Set MIMOME_THREADS to parallelize over
trials.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .allocate import (
    LN2,
    PowerAllocation,
    SecrecyProblem,
    SolverConfig,
    SolverError,
    secrecy_rate,
    dual_decomposition,
    uniform_allocation,
)
from .channels import ChannelPair
from .closed_forms import (
    gaussian_allocate,
    high_snr_allocate,
    high_snr_rate,
    low_snr_allocate,
)
from .constellations import Constellation, as_input_model, constellation
from .gsvd import ParallelChannelBank, gsvd, reduce_to_parallel

__all__ = [
    "EnsembleSpec",
    "draw_channel_pair",
    "METHODS",
    "allocate_by_method",
    "rate_by_method",
    "SweepRecord",
    "ergodic_sweep",
    "UncertaintyModel",
    "PartialCsiResult",
    "partial_csi_rate",
    "partial_csi_sweep",
]

METHODS = ("dual", "gaussian", "uniform", "low-snr", "high-snr")


@dataclass(frozen=True)
class EnsembleSpec:
    """An iid Rayleigh ensemble: entries CN(0,1), unit-variance noise, so the
    per-antenna SNR is set entirely by the power budget."""

    m_a: int
    m_b: int
    m_e: int
    trials: int = 500
    seed: int = 0
    require_full_rank_eve: bool = True

    def __post_init__(self):
        if min(self.m_a, self.m_b, self.m_e) < 1:
            raise ValueError("antenna counts must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


def _cn_matrix(rng, rows, cols):
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)


def draw_channel_pair(spec: EnsembleSpec, trial: int) -> ChannelPair:
    """Draw the pair for one trial from its own substream.

    When ``require_full_rank_eve`` is set, pairs whose Eve matrix is rank
    deficient are redrawn (within the same substream, so the result is still
    deterministic). Gaussian matrices are almost surely full rank; the loop
    exists for safety, not as a rejection sampler.
    """
    rng = np.random.default_rng([spec.seed, trial])
    want = min(spec.m_e, spec.m_a)
    for _ in range(1000):
        hb = _cn_matrix(rng, spec.m_b, spec.m_a)
        he = _cn_matrix(rng, spec.m_e, spec.m_a)
        if not spec.require_full_rank_eve:
            return ChannelPair(hb, he)
        if np.linalg.matrix_rank(he) == want:
            return ChannelPair(hb, he)
    raise RuntimeError("could not draw a full-rank Eve channel in 1000 tries")


def allocate_by_method(bank: ParallelChannelBank, c: Constellation,
                       total_power: float, method: str,
                       config: SolverConfig | None = None) -> PowerAllocation:
    """Dispatch an allocation method by name. ``high-snr`` ignores the budget
    (it is the saturation point); SolverError propagates from ``dual``."""
    cfg = config or SolverConfig()
    if method == "dual":
        return dual_decomposition(SecrecyProblem(bank, c, total_power), cfg)
    if method == "gaussian":
        return gaussian_allocate(bank, total_power)
    if method == "uniform":
        return uniform_allocation(SecrecyProblem(bank, c, total_power))
    if method == "low-snr":
        return low_snr_allocate(bank, total_power, c.second_order_optimal)
    if method == "high-snr":
        return high_snr_allocate(bank, c, rho_cap=cfg.rho_cap)
    raise ValueError(f"unknown allocation method {method!r}; pick from {METHODS}")


def rate_by_method(bank: ParallelChannelBank, c: Constellation,
                   alloc: PowerAllocation, method: str) -> float:
    """Rate reported for a method's allocation, in bits. Every method is
    scored by the exact evaluator on its own allocation, except ``high-snr``
    whose rate is the analytic saturation value."""
    if method == "high-snr":
        return high_snr_rate(bank, c, alloc)
    prob = SecrecyProblem(bank, c, alloc.total)
    return secrecy_rate(prob, alloc).total_bits


@dataclass(frozen=True)
class SweepRecord:
    """One aggregated point of a sweep: mean and standard error over the
    trials that produced a rate; ``failures`` counts trials the solver gave
    up on (they are excluded from the mean, not zero-filled)."""

    snr_db: float
    method: str
    constellation: str
    mean_rate_bits: float
    stderr: float
    trials: int
    failures: int
    sigma_e2: float | None = None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MIMOME_THREADS", "1")))
    except ValueError:
        return 1


def _map_trials(worker, trials):
    n = _threads()
    if n == 1:
        return [worker(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(worker, range(trials)))


def _aggregate(rows, snr_db, methods, name, sigma_e2=None):
    records = []
    for j, snr in enumerate(snr_db):
        for m, method in enumerate(methods):
            vals = np.array([r[j][m] for r in rows])
            good = vals[~np.isnan(vals)]
            n = good.size
            mean = float(good.mean()) if n else float("nan")
            se = float(good.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            records.append(SweepRecord(float(snr), method, name, mean, se,
                                       n, vals.size - n, sigma_e2))
    return records


def ergodic_sweep(spec: EnsembleSpec, c, snr_db, methods=("dual",),
                  config: SolverConfig | None = None) -> list[SweepRecord]:
    """Mean secrecy rate over the ensemble, per SNR point and method.

    The same channel draws are reused across the whole SNR grid and all
    methods, so curves differ only by the quantity being measured. SNR here
    is the total budget: P_T = 10^(snr_db/10) with unit noise.
    """
    if isinstance(c, str):
        c = constellation(c)
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown allocation method {m!r}; pick from {METHODS}")
    if c.is_gaussian and "high-snr" in methods:
        raise ValueError("high-snr is undefined for the Gaussian input")
    cfg = config or SolverConfig()

    def worker(trial):
        bank = reduce_to_parallel(gsvd(draw_channel_pair(spec, trial)))
        out = np.full((snr_db.size, len(methods)), np.nan)
        high = None
        for m, method in enumerate(methods):
            if method == "high-snr":
                high = rate_by_method(bank, c, allocate_by_method(
                    bank, c, 0.0, method, cfg), method)
        for j, snr in enumerate(snr_db):
            pt = 10.0 ** (snr / 10.0)
            for m, method in enumerate(methods):
                if method == "high-snr":
                    out[j, m] = high
                    continue
                try:
                    alloc = allocate_by_method(bank, c, pt, method, cfg)
                except SolverError:
                    continue
                out[j, m] = rate_by_method(bank, c, alloc, method)
        return out

    rows = _map_trials(worker, spec.trials)
    return _aggregate(rows, snr_db, methods, c.name)


@dataclass(frozen=True)
class UncertaintyModel:
    """Eavesdropper CSI error: the true Eve gains differ from the assumed ones
    by iid CN(0, sigma_e2 * omega_i) perturbations, and the misestimated
    directions raise Eve's effective noise floor on each channel."""

    sigma_e2: float
    noise_trials: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma_e2) or self.sigma_e2 < 0:
            raise ValueError("sigma_e2 must be finite and nonnegative")
        if self.noise_trials < 1:
            raise ValueError("noise_trials must be at least 1")


@dataclass(frozen=True)
class PartialCsiResult:
    """Secrecy rate under CSI error, in bits. ``raw_bits`` may be negative
    (the allocation was designed for the wrong Eve); ``clamped_bits`` floors
    it at zero. ``stderr_bits`` is the Monte Carlo standard error."""

    raw_bits: float
    clamped_bits: float
    stderr_bits: float


def partial_csi_rate(bank: ParallelChannelBank, alloc: PowerAllocation,
                     c, uncertainty: UncertaintyModel,
                     rng: np.random.Generator | None = None) -> PartialCsiResult:
    """Average secrecy rate of a fixed allocation when Eve's true gains are
    the assumed channel plus a random error.

    Bob's side is unchanged. On channel i Eve sees amplitude |e_i + err| with
    err ~ CN(0, sigma_e2 w_i), against an effective noise 1 + sigma_e2 *
    (sum_l p_l - p_i): power sent on the other channels leaks through the
    error into directions the precoder assumed were separated. Bob-only
    channels leak the same way (their assumed Eve gain is 0). With
    sigma_e2 = 0 every draw is exactly zero and the result reduces to the
    perfect-CSI rate.
    """
    model = as_input_model(c, table=True)
    p = np.asarray(alloc.p, dtype=float)
    if p.shape != (bank.size,):
        raise ValueError(f"allocation must have length {bank.size}")
    if np.any(p < 0):
        raise ValueError("allocation must be nonnegative")
    active = {ch.index for ch in bank.active}
    stray = [i for i in range(bank.size) if i not in active and p[i] > 1e-12]
    if stray:
        raise ValueError(f"allocation puts power on inactive directions {stray}")
    if rng is None:
        rng = np.random.default_rng(uncertainty.seed)
    n = uncertainty.noise_trials
    total_p = float(p.sum())
    raw = 0.0
    var_sum = 0.0
    for ch in bank.active:
        pw = p[ch.index]
        scale = math.sqrt(uncertainty.sigma_e2 * ch.omega / 2.0)
        err = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        if pw == 0.0:
            continue
        rb = float(model.mutual_info(ch.b2 * pw / ch.omega)) / LN2
        sig2 = 1.0 + uncertainty.sigma_e2 * (total_p - pw)
        gain = np.abs(math.sqrt(ch.e2) + err) ** 2
        re_draws = np.atleast_1d(model.mutual_info(gain * pw / (sig2 * ch.omega))) / LN2
        raw += rb - float(re_draws.mean())
        if n > 1:
            var_sum += float(re_draws.var(ddof=1)) / n
    return PartialCsiResult(raw, max(raw, 0.0), math.sqrt(var_sum))


def partial_csi_sweep(spec: EnsembleSpec, c, snr_db, sigma_e2_values,
                      method: str = "dual",
                      uncertainty: UncertaintyModel | None = None,
                      config: SolverConfig | None = None) -> list[SweepRecord]:
    """Mean clamped secrecy rate under CSI error, per SNR and sigma_e2.

    The allocation is computed once per trial and SNR from the assumed
    channel and then held fixed while the error varies. Error draws reuse
    the same substream across sigma_e2 values (common random numbers), so
    the degradation with sigma_e2 is not masked by Monte Carlo noise.
    """
    if isinstance(c, str):
        c = constellation(c)
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    base = uncertainty or UncertaintyModel(0.0)
    sigmas = [float(s) for s in sigma_e2_values]
    cfg = config or SolverConfig()

    def worker(trial):
        bank = reduce_to_parallel(gsvd(draw_channel_pair(spec, trial)))
        out = np.full((snr_db.size, len(sigmas)), np.nan)
        for j, snr in enumerate(snr_db):
            pt = 10.0 ** (snr / 10.0)
            try:
                alloc = allocate_by_method(bank, c, pt, method, cfg)
            except SolverError:
                continue
            for m, sig in enumerate(sigmas):
                u = UncertaintyModel(sig, base.noise_trials, base.seed)
                rng = np.random.default_rng([base.seed, trial, 104729])
                out[j, m] = partial_csi_rate(bank, alloc, c, u, rng).clamped_bits
        return out

    rows = _map_trials(worker, spec.trials)
    records = []
    for m, sig in enumerate(sigmas):
        rows_m = [r[:, [m]] for r in rows]
        records.extend(_aggregate(rows_m, snr_db, (method,), c.name, sig))
    return records
