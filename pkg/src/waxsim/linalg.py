"""Complex-matrix decompositions with fixed conventions.

All matrices are dense complex128 ndarrays.  The conventions pinned down
here (QR with positive real diagonal, trace-maximizing Procrustes factor,
Haar sampling via phase-normalized QR) are relied on by every other module,
so they are validated aggressively and kept deterministic: identical input
bits give identical output bits within one build.

Tolerances: unitarity and reconstruction checks use 1e-10 relative error,
rank checks use a 1e-12 relative singular-value threshold.  This is
comfortable for double precision at the dimensions used here (< a few
hundred).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-10
RANK_TOL = 1e-12


class RankDeficientError(ValueError):
    """Input matrix is (numerically) rank deficient where full rank is required."""


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex128 array, rejecting NaN/Inf entries."""
    b = np.asarray(a, dtype=np.complex128)
    if b.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={b.ndim}")
    if not np.all(np.isfinite(b)):
        raise ValueError(f"{name} has non-finite entries")
    return b


@dataclass(frozen=True)
class SvdResult:
    """Economy-size SVD ``b = u @ diag(s) @ v^H``.

    ``u`` is m x r and ``v`` is n x r with orthonormal columns,
    ``s`` holds the r = min(m, n) singular values, nonincreasing.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def svd(b) -> SvdResult:
    """Economy-size singular value decomposition of a complex matrix."""
    b = as_complex_matrix(b, "svd input")
    u, s, vh = np.linalg.svd(b, full_matrices=False)
    return SvdResult(u=u, s=s, v=vh.conj().T)


def procrustes(b) -> np.ndarray:
    """Unitary U maximizing Re{tr(U^H B)} for square B.

    With B = U_B S V_B^H the maximizer is U_B V_B^H and the achieved value
    is sum(S) (all singular values combined with positive weight).  Rank
    deficient B is accepted; the optimum is then non-unique and any
    maximizer may be returned.  An all-zero B returns the identity.
    """
    b = as_complex_matrix(b, "procrustes input")
    n, n2 = b.shape
    if n != n2:
        raise ValueError(f"procrustes input must be square, got {b.shape}")
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if not b.any():
        return np.eye(n, dtype=np.complex128)
    u, _, vh = np.linalg.svd(b)
    return u @ vh


def polar_factor(w) -> np.ndarray:
    """Unitary polar factor U of a full-rank square W = U P (P Hermitian PSD).

    U is the closest unitary matrix to W in Frobenius (and spectral) norm,
    and coincides with ``procrustes(w)``.  Raises RankDeficientError when
    the smallest singular value falls below 1e-12 times the largest, in
    which case the projection is degenerate and the caller must decide on
    a fallback.
    """
    w = as_complex_matrix(w, "polar input")
    n, n2 = w.shape
    if n != n2:
        raise ValueError(f"polar input must be square, got {w.shape}")
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    s = np.linalg.svd(w, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankDeficientError(
            f"polar projection degenerate: smallest/largest singular value "
            f"= {s[-1]:.3e}/{s[0]:.3e}"
        )
    return procrustes(w)


def qr_split(h) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split an M x K full-column-rank matrix into signal and null space bases.

    Returns ``(u_tilde, n_h, r_tilde)`` with h = u_tilde @ r_tilde, where

    * ``u_tilde`` (M x K) spans the column space of h,
    * ``n_h`` (M x (M-K)) spans its orthogonal complement,
    * ``r_tilde`` (K x K) is upper triangular with real, strictly positive
      diagonal, which makes ``u_tilde`` unique.

    ``[u_tilde n_h]`` is unitary.  The completion ``n_h`` is the one
    produced by the underlying full QR, deterministic for a given input.
    """
    h = as_complex_matrix(h, "qr_split input")
    m, k = h.shape
    if m < k:
        raise ValueError(f"qr_split needs rows >= cols, got {h.shape}")
    if k > 0:
        s = np.linalg.svd(h, compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            raise RankDeficientError(
                f"qr_split input is rank deficient (sigma_min/sigma_max = "
                f"{s[-1] / s[0]:.3e})"
            )
    q, r = np.linalg.qr(h, mode="complete")
    u_tilde = q[:, :k].copy()
    n_h = q[:, k:].copy()
    r_tilde = r[:k, :].copy()
    if k > 0:
        d = np.diagonal(r_tilde)
        phase = d / np.abs(d)
        u_tilde *= phase[np.newaxis, :]
        r_tilde *= phase.conj()[:, np.newaxis]
    return u_tilde, n_h, r_tilde


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary matrix.

    QR of an i.i.d. standard complex Gaussian matrix, with each column of Q
    divided by the phase of the corresponding diagonal entry of R so the
    result is uniform on the unitary group rather than biased by the QR
    sign convention.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q / (d / np.abs(d))[np.newaxis, :]


def haar_semi_unitary(m: int, t: int, rng: np.random.Generator) -> np.ndarray:
    """First t columns of a Haar unitary of size m: an m x t semi-unitary
    whose column span is isotropically distributed."""
    if t > m:
        raise ValueError(f"need cols <= rows, got ({m}, {t})")
    return haar_unitary(m, rng)[:, :t]
