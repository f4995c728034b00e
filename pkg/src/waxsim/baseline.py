"""Comparison methods for the unitary-constrained processing chain.

The unconstrained approximation drops the unitarity requirement and
solves min ||A X - W H||_F over the stacked unknowns, normalized to a
unit-norm solution vector: the minimizer is the right singular vector of
the linear constraint operator with smallest singular value.  Projecting
its blocks onto the unitary group (polar factors) gives the baseline
method; independently Haar-drawn blocks give the do-nothing reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import RankDeficientError, haar_unitary, polar_factor, procrustes
from .model import ChannelMatrix, SystemConfig
from .wax import BlockDiagonalFilter, CombiningModule

BLOCK_RANK_TOL = 1e-12


@dataclass(frozen=True)
class UnconstrainedSolution:
    """Minimum-residual factorization attempt with unconstrained blocks.

    The solve is performed on the channel scaled to unit Frobenius norm,
    which makes the solution and residual invariant to the channel's
    scale; ``residual`` is ||A x - W h||_F for that normalized channel and
    equals the smallest singular value of the constraint operator.  The
    stacked entries of ``x`` and ``w_blocks`` form a unit-norm vector.
    """

    w_blocks: np.ndarray
    x: np.ndarray
    residual: float

    @property
    def n_blocks(self) -> int:
        return self.w_blocks.shape[0]

    def degenerate_blocks(self, rel_tol: float = BLOCK_RANK_TOL) -> tuple[int, ...]:
        """Indices of blocks that are numerically rank deficient (their
        polar projection is not unique)."""
        s = np.linalg.svd(self.w_blocks, compute_uv=False)
        if s.shape[1] == 0:
            return ()
        return tuple(np.nonzero(s[:, -1] <= rel_tol * s[:, 0])[0].tolist())


def build_constraint_operator(h: np.ndarray, a: CombiningModule) -> np.ndarray:
    """Dense matrix mapping [vec(X); vec(W_1); ...; vec(W_MP)] to
    vec(A X - W H), with column-major vec.

    Size (M K) x (T K + M_P L^2); dense assembly is deliberate at the
    dimensions this library targets.
    """
    m, k = h.shape
    t, l, m_p = a.t, a.block_size, a.m_p
    if m != a.m:
        raise ValueError(f"channel has {m} rows, combining module {a.m}")
    phi = np.zeros((m * k, t * k + m_p * l * l), dtype=np.complex128)
    phi[:, : t * k] = np.kron(np.eye(k), a.a)
    eye_l = np.eye(l)
    cols = np.arange(l)
    for p in range(m_p):
        h_p = h[p * l : (p + 1) * l, :]
        rows = (np.arange(k)[:, None] * m + p * l + cols[None, :]).ravel()
        off = t * k + p * l * l
        phi[rows, off : off + l * l] = -np.kron(h_p.T, eye_l)
    return phi


def solve_unconstrained(
    ch: ChannelMatrix, a: CombiningModule, cfg: SystemConfig
) -> UnconstrainedSolution:
    """Unit-norm minimizer of ||A X - W H||_F over (X, {W_m}).

    Returns the right singular vector of the constraint operator with the
    smallest singular value, reshaped into X and the blocks of W.  When a
    factorization H = W A X exists the operator has a nontrivial null
    space and the residual is numerically zero.
    """
    if (cfg.m, cfg.k) != ch.h.shape or (cfg.t, cfg.l) != (a.t, a.block_size):
        raise ValueError("channel / combining module do not match config")
    h = ch.h / np.linalg.norm(ch.h)
    phi = build_constraint_operator(h, a)
    _, _, vh = np.linalg.svd(phi, full_matrices=True)
    v = vh[-1, :].conj()
    t, k, l, m_p = cfg.t, cfg.k, cfg.l, cfg.m_p
    x = v[: t * k].reshape(t, k, order="F")
    w_blocks = v[t * k :].reshape(m_p, l, l).swapaxes(1, 2).copy()
    residual = float(np.linalg.norm(phi @ v))
    return UnconstrainedSolution(w_blocks=w_blocks, x=x, residual=residual)


def project_to_unitary_blocks(sol: UnconstrainedSolution) -> BlockDiagonalFilter:
    """Replace each block by its polar factor, the nearest unitary matrix.

    A rank-deficient block has no unique nearest unitary; the Procrustes
    maximizer (one valid projection) is used for it instead.  Callers that
    care can identify such trials via ``sol.degenerate_blocks()``.
    """
    blocks = []
    for w in sol.w_blocks:
        try:
            blocks.append(polar_factor(w))
        except RankDeficientError:
            blocks.append(procrustes(w))
    return BlockDiagonalFilter(np.stack(blocks))


def unconstrained_transform(sol: UnconstrainedSolution, a: CombiningModule) -> np.ndarray:
    """The M x T reduction matrix W A for the raw (non-unitary) blocks."""
    return (sol.w_blocks @ a.row_blocks).reshape(a.m, a.t)


def random_isotropic_filter(
    cfg: SystemConfig, rng: np.random.Generator
) -> BlockDiagonalFilter:
    """Independently Haar-distributed unitary blocks: the no-optimization
    reference point."""
    return BlockDiagonalFilter(
        np.stack([haar_unitary(cfg.l, rng) for _ in range(cfg.m_p)])
    )
