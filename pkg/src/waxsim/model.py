"""Uplink narrowband MIMO signal model.

K single-antenna users transmit to an M-antenna receiver split into
M_P = M/L panels of L antennas each; T complex streams are forwarded to
the central unit.  Mutual information is evaluated in closed form from
the channel matrix (no symbols are ever simulated), in bits, with the
SNR ``rho`` kept explicit in every formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import RankDeficientError, as_complex_matrix, qr_split

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and SNR defining one scenario.

    m: receive antennas, k: users, l: panel (block) size, t: forwarded
    streams, snr: linear symbol-energy to noise-density ratio.
    Requires 1 <= l <= k <= t <= m, l | m, snr > 0.
    """

    m: int
    k: int
    l: int
    t: int
    snr: float

    def __post_init__(self):
        if not (1 <= self.l <= self.k <= self.t <= self.m):
            raise ValueError(
                f"need 1 <= L <= K <= T <= M, got L={self.l} K={self.k} "
                f"T={self.t} M={self.m}"
            )
        if self.m % self.l != 0:
            raise ValueError(f"L={self.l} must divide M={self.m}")
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr}")

    @property
    def m_p(self) -> int:
        """Number of panels."""
        return self.m // self.l


@dataclass(frozen=True)
class ChannelMatrix:
    """M x K channel with its cached signal/null-space split.

    ``h = u_tilde @ r_tilde`` with ``u_tilde`` (M x K) an orthonormal basis
    of the column space, ``n_h`` (M x (M-K)) of its complement, and
    ``r_tilde`` upper triangular with positive real diagonal.  Instances
    are immutable; build them with :meth:`from_matrix`.
    """

    h: np.ndarray
    u_tilde: np.ndarray
    n_h: np.ndarray
    r_tilde: np.ndarray

    @classmethod
    def from_matrix(cls, h) -> "ChannelMatrix":
        """Validate full column rank and populate the QR cache."""
        h = as_complex_matrix(h, "channel")
        u_tilde, n_h, r_tilde = qr_split(h)
        for a in (h, u_tilde, n_h, r_tilde):
            a.flags.writeable = False
        return cls(h=h, u_tilde=u_tilde, n_h=n_h, r_tilde=r_tilde)

    @property
    def m(self) -> int:
        return self.h.shape[0]

    @property
    def k(self) -> int:
        return self.h.shape[1]


def sample_channel(cfg: SystemConfig, rng: np.random.Generator) -> ChannelMatrix:
    """IID Rayleigh channel: entries circularly-symmetric complex Gaussian
    with zero mean and unit variance (real/imag parts variance 1/2 each).

    Rank deficiency has probability zero; in the event the numerical rank
    check trips, the draw is simply repeated.
    """
    while True:
        h = (
            rng.standard_normal((cfg.m, cfg.k))
            + 1j * rng.standard_normal((cfg.m, cfg.k))
        ) / np.sqrt(2.0)
        try:
            return ChannelMatrix.from_matrix(h)
        except RankDeficientError:  # pragma: no cover - measure zero
            continue


def _channel_array(ch) -> np.ndarray:
    if isinstance(ch, ChannelMatrix):
        return ch.h
    return as_complex_matrix(ch, "channel")


def mutual_information_full(ch, snr: float) -> float:
    """Capacity of the unprocessed channel: log2 det(I_K + snr H^H H) bits."""
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    h = _channel_array(ch)
    k = h.shape[1]
    gram = np.eye(k) + snr * (h.conj().T @ h)
    _, logdet = np.linalg.slogdet(gram)
    return logdet / LN2


def mutual_information_processed(ch, g, snr: float) -> float:
    """Mutual information after linear processing z = G^H y, in bits.

    G (M x T, full column rank) need not be semi-unitary: the processed
    noise has covariance N0 G^H G, so after whitening

        I = log2 det(I_K + snr H^H G (G^H G)^{-1} G^H H),

    which depends on G only through its column space; for semi-unitary G
    this reduces to log2 det(I_T + snr G^H H H^H G).  By the
    data-processing inequality the value never exceeds
    :func:`mutual_information_full`.
    """
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    h = _channel_array(ch)
    g = as_complex_matrix(g, "processing matrix")
    if g.shape[0] != h.shape[0]:
        raise ValueError(f"channel is {h.shape}, processing matrix {g.shape}")
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise RankDeficientError("processing matrix is rank deficient")
    q, _ = np.linalg.qr(g)
    b = q.conj().T @ h
    k = h.shape[1]
    gram = np.eye(k) + snr * (b.conj().T @ b)
    _, logdet = np.linalg.slogdet(gram)
    return logdet / LN2


def capacity_ratio(ch, g, snr: float) -> float:
    """Processed over full mutual information; 1.0 means lossless."""
    return mutual_information_processed(ch, g, snr) / mutual_information_full(ch, snr)
