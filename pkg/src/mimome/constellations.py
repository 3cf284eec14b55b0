"""Finite-alphabet mutual information and MMSE over the scalar Gaussian channel.

Everything here works on the complex channel y = sqrt(rho) * s + n with
n ~ CN(0, 1) and a zero-mean, unit-energy, equiprobable input s, so each real
noise dimension has variance 1/2. ``mmse(rho)`` is the conditional-mean
estimator MSE and ``mutual_info(rho)`` is I(s; y) in nats; for a Gaussian
input these are 1/(1+rho) and ln(1+rho), and d/drho I(rho) = mmse(rho) holds
for every input.

The built-in alphabets (BPSK, QPSK, square QAM, M-PAM) all factor into one or
two independent real PAM components per dimension, so the expectations reduce
to one-dimensional Gauss-Hermite sums per component. Arbitrary complex point
sets fall back to a two-dimensional tensor rule. Quadrature order is 64 nodes
per axis by default; its relative accuracy degrades once exp(-d^2 rho / 4)
drops below ~1e-10 (the decision-boundary layer leaves the node range), which
is why ``mmse_quad`` provides an adaptive-quadrature reference for deep-SNR
work such as fitting the high-SNR decay constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

__all__ = [
    "Constellation",
    "constellation",
    "MiTable",
    "as_input_model",
    "mmse_inverse",
    "g_function",
    "mmse_difference",
]

_SQRT_PI = math.sqrt(math.pi)
_CHUNK = 2048


@lru_cache(maxsize=None)
def _gh_nodes(order: int):
    x, w = hermgauss(order)
    return x, w / _SQRT_PI


def _pam_levels(m: int) -> np.ndarray:
    if m < 2:
        raise ValueError("PAM needs at least 2 levels")
    return np.arange(-(m - 1), m, 2, dtype=float)


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or not np.all(np.isfinite(rho)):
        raise ValueError("rho must be finite and nonnegative")
    return rho


def _mmse_component(levels, rho, order):
    """MSE of a real component observed through y = sqrt(rho)*a + N(0, 1/2)."""
    x, w = _gh_nodes(order)
    out = np.zeros_like(rho)
    sr = np.sqrt(rho)[:, None, None]
    for k in range(levels.size):
        diff = levels[k] - levels                      # (M,)
        t = x[None, None, :] + sr * diff[None, :, None]
        ex = -(t * t)
        ex -= ex.max(axis=1, keepdims=True)
        post = np.exp(ex)
        post /= post.sum(axis=1, keepdims=True)
        d = (diff[None, :, None] * post).sum(axis=1)   # (R, Q)
        out += (d * d) @ w
    return out / levels.size


def _mi_component(levels, rho, order):
    """Mutual information (nats) of a real component over the same channel."""
    x, w = _gh_nodes(order)
    out = np.zeros_like(rho)
    sr = np.sqrt(rho)[:, None, None]
    for k in range(levels.size):
        diff = levels[k] - levels
        t = x[None, None, :] + sr * diff[None, :, None]
        ex = (x * x)[None, None, :] - t * t            # (R, M, Q)
        top = ex.max(axis=1, keepdims=True)
        lse = np.log(np.exp(ex - top).sum(axis=1)) + top[:, 0, :]
        out += lse @ w
    return np.log(levels.size) - out / levels.size


def _mmse_points_2d(points, rho, order):
    """Tensor-rule MSE for a general complex point set."""
    x, w = _gh_nodes(order)
    noise = (x[:, None] + 1j * x[None, :]).ravel()
    wt = (w[:, None] * w[None, :]).ravel()
    out = np.zeros_like(rho)
    sr = np.sqrt(rho)[:, None, None]
    for k in range(points.size):
        diff = points[k] - points
        t = noise[None, None, :] + sr * np.real(diff)[None, :, None] \
            + 1j * sr * np.imag(diff)[None, :, None]
        ex = -np.abs(t) ** 2
        ex -= ex.max(axis=1, keepdims=True)
        post = np.exp(ex)
        post /= post.sum(axis=1, keepdims=True)
        d = (diff[None, :, None] * post).sum(axis=1)
        out += (np.abs(d) ** 2) @ wt
    return out / points.size


def _mi_points_2d(points, rho, order):
    x, w = _gh_nodes(order)
    noise = (x[:, None] + 1j * x[None, :]).ravel()
    wt = (w[:, None] * w[None, :]).ravel()
    out = np.zeros_like(rho)
    sr = np.sqrt(rho)[:, None, None]
    for k in range(points.size):
        diff = points[k] - points
        t = noise[None, None, :] + sr * np.real(diff)[None, :, None] \
            + 1j * sr * np.imag(diff)[None, :, None]
        ex = (np.abs(noise) ** 2)[None, None, :] - np.abs(t) ** 2
        top = ex.max(axis=1, keepdims=True)
        lse = np.log(np.exp(ex - top).sum(axis=1)) + top[:, 0, :]
        out += lse @ wt
    return np.log(points.size) - out / points.size


def _chunked(fn, rho, *args):
    if rho.size <= _CHUNK:
        return fn(rho, *args)
    parts = [fn(rho[i:i + _CHUNK], *args) for i in range(0, rho.size, _CHUNK)]
    return np.concatenate(parts)


@dataclass(frozen=True)
class Constellation:
    """A unit-energy input alphabet, or the Gaussian input when ``components``
    and ``points`` are None.

    ``components`` lists the independent real constellations per dimension
    (one for real alphabets, two for square QAM); the full point set is their
    complex product.
    """

    name: str
    points: np.ndarray | None
    components: tuple[np.ndarray, ...] | None
    order: int = 64

    def __post_init__(self):
        if self.is_gaussian:
            return
        pts = np.asarray(self.points, dtype=complex)
        if pts.size < 2:
            raise ValueError("a constellation needs at least 2 points")
        if abs(pts.mean()) > 1e-9:
            raise ValueError("constellation must have zero mean")
        if abs(np.mean(np.abs(pts) ** 2) - 1.0) > 1e-9:
            raise ValueError("constellation must have unit average energy")
        object.__setattr__(self, "points", pts)

    @property
    def is_gaussian(self) -> bool:
        return self.points is None and self.components is None

    @property
    def cardinality(self) -> int | None:
        return None if self.is_gaussian else self.points.size

    @property
    def max_mi(self) -> float | None:
        """Saturation value of the mutual information, in nats."""
        return None if self.is_gaussian else math.log(self.points.size)

    @property
    def min_distance(self) -> float | None:
        if self.is_gaussian:
            return None
        pts = self.points
        d = np.abs(pts[:, None] - pts[None, :])
        return float(d[d > 0].min())

    @property
    def second_order_optimal(self) -> bool:
        """True when the low-SNR MMSE expansion matches the Gaussian input's
        (proper-complex alphabets: QPSK, square QAM); False for real
        signaling (BPSK, M-PAM) whose expansion is 1 - 2 rho."""
        if self.is_gaussian:
            return True
        return bool(abs(np.mean(self.points ** 2)) < 1e-9)

    def mmse(self, rho, order: int | None = None):
        rho_arr = _check_rho(np.atleast_1d(rho))
        order = order or self.order
        if self.is_gaussian:
            out = 1.0 / (1.0 + rho_arr)
        elif self.components is not None:
            out = sum(
                _chunked(lambda r, a: _mmse_component(a, r, order), rho_arr, a)
                for a in self.components
            )
        else:
            out = _chunked(lambda r: _mmse_points_2d(self.points, r, order), rho_arr)
        return out if np.ndim(rho) else float(out[0])

    def mutual_info(self, rho, order: int | None = None):
        """I(s; y) in nats."""
        rho_arr = _check_rho(np.atleast_1d(rho))
        order = order or self.order
        if self.is_gaussian:
            out = np.log1p(rho_arr)
        elif self.components is not None:
            out = sum(
                _chunked(lambda r, a: _mi_component(a, r, order), rho_arr, a)
                for a in self.components
            )
        else:
            out = _chunked(lambda r: _mi_points_2d(self.points, r, order), rho_arr)
        return out if np.ndim(rho) else float(out[0])

    def mmse_quad(self, rho: float) -> float:
        """Adaptive-quadrature reference MSE for one rho. Slower than the
        Gauss-Hermite path but keeps relative accuracy at deep SNR, where the
        integrand concentrates near the decision boundaries."""
        if self.is_gaussian:
            return 1.0 / (1.0 + float(rho))
        if self.components is None:
            raise NotImplementedError("reference quadrature needs a component form")
        rho = float(_check_rho(rho))
        total = 0.0
        for levels in self.components:
            sr = math.sqrt(rho)

            def integrand(u, k):
                t = u + sr * (levels[k] - levels)
                ex = -(t * t)
                ex -= ex.max()
                post = np.exp(ex)
                post /= post.sum()
                d = ((levels[k] - levels) * post).sum()
                return math.exp(-u * u) * d * d / _SQRT_PI

            acc = 0.0
            for k in range(levels.size):
                cross = np.sort(sr * (levels - levels[k]) / 2.0)
                pts = [c for c in cross if abs(c) < 59.0]
                val, _ = quad(integrand, -60.0, 60.0, args=(k,),
                              points=pts or None, limit=400,
                              epsabs=0.0, epsrel=1e-11)
                acc += val
            total += acc / levels.size
        return total


def constellation(name: str, order: int = 64) -> Constellation:
    """Build a named alphabet: bpsk, qpsk, 16qam, 64qam, pam<M>, gaussian."""
    key = name.strip().lower().replace("-", "").replace("_", "")
    if key == "gaussian":
        return Constellation("gaussian", None, None, order)
    if key == "bpsk":
        comps = (np.array([-1.0, 1.0]),)
    elif key == "qpsk":
        comps = (np.array([-1.0, 1.0]) / math.sqrt(2),) * 2
    elif key in ("16qam", "qam16"):
        key = "16qam"
        comps = (_pam_levels(4) / math.sqrt(10),) * 2
    elif key in ("64qam", "qam64"):
        key = "64qam"
        comps = (_pam_levels(8) / math.sqrt(42),) * 2
    elif key.startswith("pam") or key.endswith("pam"):
        digits = key.replace("pam", "")
        try:
            m = int(digits)
        except ValueError:
            raise ValueError(f"unrecognized constellation {name!r}") from None
        lv = _pam_levels(m)
        comps = (lv / math.sqrt(np.mean(lv ** 2)),)
    else:
        raise ValueError(f"unrecognized constellation {name!r}")
    if len(comps) == 2:
        pts = (comps[0][:, None] + 1j * comps[1][None, :]).ravel()
    else:
        pts = comps[0].astype(complex)
    return Constellation(key, pts, comps, order)


# rho grid shared by all cached tables
_GRID_LO, _GRID_HI, _GRID_N = 1e-4, 1e4, 513


class MiTable:
    """Monotone-cubic cache of mmse and mutual information on a log grid.

    Power-allocation loops evaluate mmse thousands of times; interpolating a
    513-point table keeps them fast while the exact quadrature stays available
    on the constellation itself. The mmse data is truncated to its strictly
    decreasing prefix above the fixed-order quadrature's absolute noise floor
    (~1e-14; beyond that the sample values are roundoff, not signal);
    evaluations past the grid return the boundary values.
    """

    NOISE_FLOOR = 1e-14

    def __init__(self, c: Constellation):
        if c.is_gaussian:
            raise ValueError("the Gaussian input uses closed forms, not tables")
        self.constellation = c
        self.rho_grid = np.geomspace(_GRID_LO, _GRID_HI, _GRID_N)
        mm = c.mmse(self.rho_grid)
        mi = np.clip(c.mutual_info(self.rho_grid), 0.0, c.max_mi)

        keep = mm > self.NOISE_FLOOR
        drops = np.nonzero(np.diff(mm) >= 0)[0]
        if drops.size:
            keep[drops[0] + 1:] = False
        first_out = np.nonzero(~keep)[0]
        if first_out.size:
            keep[first_out[0]:] = False
        n = int(keep.sum())
        self._rho_hi = float(self.rho_grid[n - 1])
        self._mmse_floor = float(mm[n - 1])
        self._ln_mmse = PchipInterpolator(
            np.log(self.rho_grid[:n]), np.log(mm[:n]), extrapolate=False)
        self._mi = PchipInterpolator(np.log(self.rho_grid), mi, extrapolate=False)
        self._mi_hi = float(mi[-1])
        self._mmse_lo = float(mm[0])
        self._mi_lo = float(mi[0])

    @property
    def name(self):
        return self.constellation.name

    @property
    def is_gaussian(self):
        return False

    @property
    def max_mi(self):
        return self.constellation.max_mi

    @property
    def min_distance(self):
        return self.constellation.min_distance

    def mmse(self, rho):
        r = _check_rho(np.atleast_1d(rho)).astype(float)
        out = np.empty_like(r)
        low = r < _GRID_LO
        high = r > self._rho_hi
        mid = ~(low | high)
        # below the grid mmse is 1 - O(rho): blend linearly to the exact anchor
        out[low] = 1.0 + (self._mmse_lo - 1.0) * (r[low] / _GRID_LO)
        out[high] = self._mmse_floor
        if mid.any():
            out[mid] = np.exp(self._ln_mmse(np.log(r[mid])))
        return out if np.ndim(rho) else float(out[0])

    def mutual_info(self, rho):
        r = _check_rho(np.atleast_1d(rho)).astype(float)
        out = np.empty_like(r)
        low = r < _GRID_LO
        high = r > _GRID_HI
        mid = ~(low | high)
        out[low] = (self._mi_lo / _GRID_LO) * r[low]
        out[high] = self._mi_hi
        if mid.any():
            out[mid] = self._mi(np.log(r[mid]))
        return out if np.ndim(rho) else float(out[0])


_TABLE_CACHE: dict[tuple[str, int], MiTable] = {}


def as_input_model(c, table: bool = True):
    """Return the evaluation model for an input: the constellation itself for
    the Gaussian input (closed forms) or ``table=False``, else a cached MiTable."""
    if isinstance(c, str):
        c = constellation(c)
    if isinstance(c, MiTable):
        return c
    if c.is_gaussian or not table:
        return c
    key = (c.name, c.order)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = MiTable(c)
    return _TABLE_CACHE[key]


def mmse_inverse(model, target: float, rho_cap: float = 1e4, tol: float = 1e-9) -> float:
    """The rho at which mmse(rho) = target, for target in (0, 1].

    Bracket doubling followed by bisection to relative tolerance ``tol``.
    Positive targets the model cannot resolve before ``rho_cap`` saturate to
    ``rho_cap``; target <= 0 is rejected (mmse never reaches 0), and callers
    taking min(1, mu*omega) must handle mu = 0 themselves.
    """
    if not 0.0 < target <= 1.0:
        raise ValueError("target must lie in (0, 1]")
    if target >= 1.0:
        return 0.0
    if getattr(model, "is_gaussian", False):
        return min(1.0 / target - 1.0, rho_cap)
    hi = 1.0
    while model.mmse(hi) > target:
        hi *= 2.0
        if hi >= rho_cap:
            if model.mmse(rho_cap) > target:
                return rho_cap
            hi = rho_cap
            break
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if model.mmse(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def g_function(model, rho):
    """rho * mmse(rho); its strict unimodality is what makes the per-channel
    stationarity equation have a unique positive root."""
    rho_arr = _check_rho(np.atleast_1d(rho))
    out = rho_arr * np.atleast_1d(model.mmse(rho_arr))
    return out if np.ndim(rho) else float(out[0])


def mmse_difference(model, p, b2: float, e2: float, omega: float):
    """Marginal secrecy gain f(p) = (b2 mmse(b2 p/w) - e2 mmse(e2 p/w)) / w of
    a shared channel at normalized power p. Positive at p=0, one sign change."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if not 0.0 <= e2 < b2 <= 1.0:
        raise ValueError("need 0 <= e2 < b2 <= 1")
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0):
        raise ValueError("power must be nonnegative")
    b_term = b2 * np.atleast_1d(model.mmse(b2 * np.atleast_1d(p_arr) / omega))
    if e2 > 0:
        e_term = e2 * np.atleast_1d(model.mmse(e2 * np.atleast_1d(p_arr) / omega))
    else:
        e_term = 0.0
    out = (b_term - e_term) / omega
    return out if np.ndim(p) else float(out[0])
