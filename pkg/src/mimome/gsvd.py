"""Generalized singular value decomposition of a wiretap channel pair.

Factors ``Hb = Psi_b @ Sigma_b @ [Omega^-1 0] @ Psi_a^H`` and
``He = Psi_e @ Sigma_e @ [Omega^-1 0] @ Psi_a^H`` with unitary Psi factors and
a nonsingular k x k Omega, where k = rank([Hb; He]). The diagonal blocks of
Sigma_b/Sigma_e split the transmit space into four groups of directions:

* Eve-only (nu of them): invisible to Bob, unit gain to Eve,
* shared (s): gains b_i to Bob and e_i to Eve with b_i^2 + e_i^2 = 1,
  b_i ascending,
* Bob-only (r): unit gain to Bob, invisible to Eve,
* null (m_a - k): invisible to both.

Construction: SVD of the stacked matrix gives k, the right factor Psi_a and
the scale S1; a CS decomposition of the Bob block of the stacked left factor
(computed from one more SVD) gives the angles and Z, and Omega = S1^-1 Z.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .channels import ChannelPair

__all__ = [
    "GsvdResult",
    "ParallelChannel",
    "ParallelChannelBank",
    "default_rank_tol",
    "gsvd",
    "build_precoder",
    "reduce_to_parallel",
]


def default_rank_tol(m_a: int, m_b: int, m_e: int) -> float:
    """Relative singular-value threshold used for rank and CS classification."""
    return 1e-10 * max(m_a, m_b + m_e)


@dataclass(frozen=True)
class GsvdResult:
    """Decomposition of a channel pair into the four-way direction split.

    ``b`` and ``e`` are length-k gain vectors over all non-null directions
    (exact 0/1 entries on the Eve-only and Bob-only blocks). ``omega`` holds
    the diagonal of Omega^H Omega; ``omega_offdiag`` reports the largest
    off-diagonal magnitude of that matrix as a diagnostic, since the power
    accounting tr(W W^H) = sum(omega_i p_i) uses the diagonal only.
    """

    psi_a: np.ndarray
    psi_b: np.ndarray
    psi_e: np.ndarray
    sigma_b: np.ndarray
    sigma_e: np.ndarray
    omega_mat: np.ndarray
    b: np.ndarray
    e: np.ndarray
    omega: np.ndarray
    omega_offdiag: float
    k: int
    r: int
    s: int
    nu: int
    m_a: int
    m_b: int
    m_e: int
    rank_tol: float

    @property
    def null_dim(self) -> int:
        return self.m_a - self.k

    @property
    def shared_slice(self) -> slice:
        return slice(self.nu, self.nu + self.s)

    @property
    def bob_slice(self) -> slice:
        return slice(self.k - self.r, self.k)

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        """Rebuild (Hb, He) from the factors."""
        a = np.zeros((self.k, self.m_a), dtype=complex)
        if self.k:
            a[:, : self.k] = np.linalg.inv(self.omega_mat)
        right = a @ self.psi_a.conj().T
        return self.psi_b @ self.sigma_b @ right, self.psi_e @ self.sigma_e @ right


def gsvd(pair: ChannelPair, rank_tol: float | None = None) -> GsvdResult:
    """Decompose a channel pair. ``rank_tol`` is relative to the largest
    singular value of the stacked matrix."""
    hb, he = pair.hb, pair.he
    m_b, m_a = hb.shape
    m_e = he.shape[0]
    if rank_tol is None:
        rank_tol = default_rank_tol(m_a, m_b, m_e)
    if not 0 < rank_tol < 1:
        raise ValueError("rank_tol must lie in (0, 1)")

    stacked = np.vstack([hb, he])
    u, sig, vh = np.linalg.svd(stacked, full_matrices=True)
    smax = sig[0] if sig.size else 0.0
    k = int(np.sum(sig > rank_tol * smax)) if smax > 0 else 0
    psi_a = vh.conj().T
    u1 = u[:, :k]
    s1 = sig[:k]
    qb, qe = u1[:m_b], u1[m_b:]

    # CS decomposition of the column-orthonormal pair (qb, qe) via one SVD of
    # qb. Z diagonalizes qe^H qe = I - qb^H qb as well, so the columns of
    # qe @ Z are exactly orthogonal with norms sqrt(1 - c_i^2).
    ub, c, vbh = np.linalg.svd(qb, full_matrices=True)
    c = np.concatenate([c, np.zeros(k - c.size)])[:k]
    c = np.clip(c, 0.0, 1.0)
    vb = vbh.conj().T

    bob_mask = c >= 1.0 - rank_tol
    eve_mask = c <= rank_tol
    shared_mask = ~(bob_mask | eve_mask)
    r = int(bob_mask.sum())
    s = int(shared_mask.sum())
    nu = int(eve_mask.sum())

    # reorder to: Eve-only, shared with b ascending, Bob-only
    idx_eve = np.nonzero(eve_mask)[0]
    idx_shared = np.nonzero(shared_mask)[0]
    idx_shared = idx_shared[np.argsort(c[idx_shared], kind="stable")]
    idx_bob = np.nonzero(bob_mask)[0]
    perm = np.concatenate([idx_eve, idx_shared, idx_bob]).astype(int)
    z = vb[:, perm]
    b = c[perm].copy()
    b[:nu] = 0.0
    b[nu + s:] = 1.0
    e = np.sqrt(np.clip(1.0 - b * b, 0.0, 1.0))

    sigma_b = np.zeros((m_b, k))
    sigma_e = np.zeros((m_e, k))
    for i in range(s):
        sigma_b[m_b - r - s + i, nu + i] = b[nu + i]
        sigma_e[nu + i, nu + i] = e[nu + i]
    for j in range(r):
        sigma_b[m_b - r + j, k - r + j] = 1.0
    for i in range(nu):
        sigma_e[i, i] = 1.0

    # Psi_b: the left singular vectors, placed to line up with Sigma_b's
    # blocks (shared rows sit above the identity block); unused vectors fill
    # the zero rows.
    psi_b = np.zeros((m_b, m_b), dtype=complex)
    used = np.zeros(m_b, dtype=bool)
    for i, src in enumerate(idx_shared):
        psi_b[:, m_b - r - s + i] = ub[:, src]
        used[src] = True
    for j, src in enumerate(idx_bob):
        psi_b[:, m_b - r + j] = ub[:, src]
        used[src] = True
    psi_b[:, : m_b - r - s] = ub[:, ~used]

    # Psi_e: normalized columns of qe @ Z on the Eve-visible block, then an
    # orthonormal completion for the zero rows of Sigma_e.
    psi_e = np.zeros((m_e, m_e), dtype=complex)
    if nu + s:
        qez = qe @ z[:, : nu + s]
        norms = np.linalg.norm(qez, axis=0)
        psi_e[:, : nu + s] = qez / norms
    if nu + s < m_e:
        if nu + s:
            psi_e[:, nu + s:] = sla.null_space(psi_e[:, : nu + s].conj().T)
        else:
            psi_e = np.eye(m_e, dtype=complex)

    omega_mat = z / s1[:, None] if k else np.zeros((0, 0), dtype=complex)
    gram = omega_mat.conj().T @ omega_mat
    omega = np.real(np.diag(gram)).copy() if k else np.zeros(0)
    offdiag = 0.0
    if k > 1:
        offdiag = float(np.max(np.abs(gram - np.diag(np.diag(gram)))))

    return GsvdResult(
        psi_a=psi_a, psi_b=psi_b, psi_e=psi_e,
        sigma_b=sigma_b, sigma_e=sigma_e, omega_mat=omega_mat,
        b=b, e=e, omega=omega, omega_offdiag=offdiag,
        k=k, r=r, s=s, nu=nu, m_a=m_a, m_b=m_b, m_e=m_e,
        rank_tol=float(rank_tol),
    )


def build_precoder(g: GsvdResult, p) -> np.ndarray:
    """Precoder W = Psi_a @ B @ sqrt(diag(p)) with Omega embedded top-left in B.

    ``p`` is the per-direction power vector in the original (pre-normalized)
    variable, length m_a, so tr(W W^H) = sum(omega_i * p_i) over the first k
    entries.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (g.m_a,):
        raise ValueError(f"power vector must have length {g.m_a}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("powers must be finite and nonnegative")
    bmat = np.zeros((g.m_a, g.m_a), dtype=complex)
    bmat[: g.k, : g.k] = g.omega_mat
    return g.psi_a @ bmat @ np.diag(np.sqrt(p))


@dataclass(frozen=True)
class ParallelChannel:
    """One scalar subchannel of the decomposed wiretap channel.

    ``index`` is the 0-based position in the GSVD ordering. Gains are squared
    amplitudes; powers are in the normalized variable p' = omega * p, in which
    the budget is a plain sum and Bob's SNR on the channel is b2 * p' / omega.
    """

    index: int
    kind: str              # "eve", "shared", "bob"
    b2: float
    e2: float
    omega: float


@dataclass(frozen=True)
class ParallelChannelBank:
    """The scalar-channel view of a decomposition: nu Eve-only channels, s
    shared channels (b ascending), r Bob-only channels, plus null_dim unused
    directions. ``size`` counts all transmit directions (m_a)."""

    channels: tuple[ParallelChannel, ...]
    null_dim: int

    def __post_init__(self):
        for ch in self.channels:
            if ch.omega <= 0:
                raise ValueError("omega must be positive")
            if not (0 <= ch.b2 <= 1 and 0 <= ch.e2 <= 1):
                raise ValueError("squared gains must lie in [0, 1]")
            if ch.kind == "shared" and abs(ch.b2 + ch.e2 - 1.0) > 1e-8:
                raise ValueError("shared channels must satisfy b2 + e2 = 1")

    @property
    def size(self) -> int:
        return len(self.channels) + self.null_dim

    @property
    def eve_only(self) -> tuple[ParallelChannel, ...]:
        return tuple(c for c in self.channels if c.kind == "eve")

    @property
    def shared(self) -> tuple[ParallelChannel, ...]:
        return tuple(c for c in self.channels if c.kind == "shared")

    @property
    def bob_only(self) -> tuple[ParallelChannel, ...]:
        return tuple(c for c in self.channels if c.kind == "bob")

    @property
    def active(self) -> tuple[ParallelChannel, ...]:
        """Channels that can ever carry power: shared with b2 > e2, plus
        Bob-only. Power on any other channel cannot help secrecy."""
        return tuple(
            c for c in self.channels
            if c.kind == "bob" or (c.kind == "shared" and c.b2 > c.e2)
        )


def reduce_to_parallel(g: GsvdResult) -> ParallelChannelBank:
    """Flatten a decomposition into its scalar-channel bank."""
    channels = []
    for i in range(g.nu):
        channels.append(ParallelChannel(i, "eve", 0.0, 1.0, float(g.omega[i])))
    for i in range(g.nu, g.nu + g.s):
        channels.append(ParallelChannel(
            i, "shared", float(g.b[i] ** 2), float(g.e[i] ** 2), float(g.omega[i])))
    for i in range(g.k - g.r, g.k):
        channels.append(ParallelChannel(i, "bob", 1.0, 0.0, float(g.omega[i])))
    return ParallelChannelBank(channels=tuple(channels), null_dim=g.m_a - g.k)
