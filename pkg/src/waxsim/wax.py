"""Structures of the decentralized processing chain H -> W -> A -> X.

``W`` is the block-diagonal stack of per-panel unitary L x L filters,
``A`` the fixed M x T semi-unitary combining module, and ``X`` the T x K
central-unit stage.  The product F = W A is semi-unitary (an element of
the Stiefel manifold), and every information-lossless choice of F is an
orthonormal mixture of the channel's signal space with part of its null
space, parameterized by a unitary pair (Q, Q0); the constructor for that
family lives here, along with the arithmetic of the interconnection
trade-off (which values of T admit a lossless factorization at all).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .linalg import haar_semi_unitary
from .model import ChannelMatrix, SystemConfig

UNITARY_BLOCK_TOL = 1e-9


def _check_unitary(a: np.ndarray, tol: float, name: str) -> None:
    n = a.shape[-1]
    gram = np.swapaxes(a.conj(), -1, -2) @ a
    err = np.max(np.abs(gram - np.eye(n))) if a.size else 0.0
    if err > tol:
        raise ValueError(f"{name} not unitary within {tol:g} (error {err:.3e})")


@dataclass(frozen=True)
class BlockDiagonalFilter:
    """The per-panel filters {W_m}, stored stacked as (m_p, L, L).

    Each block must be unitary within 1e-9.
    """

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=np.complex128)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise ValueError(f"blocks must be stacked square, got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("blocks have non-finite entries")
        _check_unitary(b, UNITARY_BLOCK_TOL, "filter blocks")
        object.__setattr__(self, "blocks", b)

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def block_size(self) -> int:
        return self.blocks.shape[1]

    @property
    def dim(self) -> int:
        return self.n_blocks * self.block_size

    @classmethod
    def identity(cls, n_blocks: int, block_size: int) -> "BlockDiagonalFilter":
        eye = np.eye(block_size, dtype=np.complex128)
        return cls(np.broadcast_to(eye, (n_blocks, block_size, block_size)).copy())


@dataclass(frozen=True)
class CombiningModule:
    """Fixed M x T semi-unitary dimension-reduction matrix A.

    ``block_size`` fixes the panel grouping; ``row_blocks`` views the m-th
    L x T row block A_m.
    """

    a: np.ndarray
    block_size: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] < a.shape[1]:
            raise ValueError(f"combining module must be tall, got {a.shape}")
        if a.shape[0] % self.block_size != 0:
            raise ValueError(
                f"block size {self.block_size} must divide {a.shape[0]} rows"
            )
        _check_unitary(a, UNITARY_BLOCK_TOL, "combining module")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def t(self) -> int:
        return self.a.shape[1]

    @property
    def m_p(self) -> int:
        return self.m // self.block_size

    @property
    def row_blocks(self) -> np.ndarray:
        """(m_p, L, T) view of the row blocks."""
        return self.a.reshape(self.m_p, self.block_size, self.t)

    @classmethod
    def sample(cls, cfg: SystemConfig, rng: np.random.Generator) -> "CombiningModule":
        """Haar semi-unitary draw, the default combining module."""
        return cls(haar_semi_unitary(cfg.m, cfg.t, rng), cfg.l)


@dataclass(frozen=True)
class LosslessParams:
    """Unitary pair (Q: T x T, Q0: (M-K) x (M-K)) parameterizing a lossless
    transform; Q0 has zero dimension when M = K."""

    q: np.ndarray
    q0: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.complex128)
        q0 = np.asarray(self.q0, dtype=np.complex128)
        for mat, name in ((q, "q"), (q0, "q0")):
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError(f"{name} must be square, got {mat.shape}")
            _check_unitary(mat, UNITARY_BLOCK_TOL, name)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q0", q0)

    @property
    def t(self) -> int:
        return self.q.shape[0]

    @classmethod
    def identity(cls, t: int, m_minus_k: int) -> "LosslessParams":
        return cls(np.eye(t, dtype=np.complex128), np.eye(m_minus_k, dtype=np.complex128))

    @classmethod
    def sample(
        cls, t: int, m_minus_k: int, rng: np.random.Generator
    ) -> "LosslessParams":
        from .linalg import haar_unitary

        q = haar_unitary(t, rng)
        q0 = (
            haar_unitary(m_minus_k, rng)
            if m_minus_k > 0
            else np.zeros((0, 0), dtype=np.complex128)
        )
        return cls(q, q0)


@dataclass(frozen=True)
class WaxSolution:
    """A (possibly approximate) factorization attempt H ~ W A X.

    ``w`` is either a unitary BlockDiagonalFilter or a raw (m_p, L, L)
    stack of unconstrained blocks; ``residual`` is ||A X - W H||_F.
    """

    w: BlockDiagonalFilter | np.ndarray
    x: np.ndarray
    residual: float

    @classmethod
    def build(cls, w, a: CombiningModule, x: np.ndarray, h: np.ndarray) -> "WaxSolution":
        blocks = w.blocks if isinstance(w, BlockDiagonalFilter) else np.asarray(w)
        wh = (blocks @ h.reshape(blocks.shape[0], blocks.shape[1], -1)).reshape(
            h.shape
        )
        residual = float(np.linalg.norm(a.a @ x - wh))
        return cls(w=w, x=x, residual=residual)


def effective_transform(w: BlockDiagonalFilter, a: CombiningModule) -> np.ndarray:
    """The M x T matrix F = W A actually applied by the array, computed
    blockwise (row block m is W_m A_m)."""
    if w.dim != a.m or w.block_size != a.block_size:
        raise ValueError(
            f"filter ({w.n_blocks} x {w.block_size}) does not match combining "
            f"module of {a.m} rows with block size {a.block_size}"
        )
    return (w.blocks @ a.row_blocks).reshape(a.m, a.t)


def expand_filter(w: BlockDiagonalFilter) -> np.ndarray:
    """Place the blocks on the diagonal of an M x M unitary."""
    return scipy.linalg.block_diag(*w.blocks)


def assemble_lossless_transform(ch: ChannelMatrix, p: LosslessParams) -> np.ndarray:
    """Information-lossless M x T semi-unitary transform from its parameters.

    F = [u_tilde, n_h @ q0] @ [q; 0], i.e. with q split into its first K
    rows and remaining T-K rows,

        F = u_tilde @ q[:K, :] + n_h @ q0[:, :T-K] @ q[K:, :].

    Every transform built this way satisfies F^H F = I_T and keeps the full
    mutual information of the channel at any SNR; conversely every lossless
    semi-unitary transform is of this form for some unitary (q, q0).  The
    T = K and M = K edges (empty null-space mixture) need no special
    handling by callers.
    """
    m, k = ch.h.shape
    t = p.t
    if not (k <= t <= m):
        raise ValueError(f"need K <= T <= M, got K={k} T={t} M={m}")
    if p.q0.shape[0] != m - k:
        raise ValueError(
            f"q0 must be {(m - k, m - k)} for this channel, got {p.q0.shape}"
        )
    return ch.u_tilde @ p.q[:k, :] + ch.n_h @ (p.q0[:, : t - k] @ p.q[k:, :])


def tradeoff_satisfied(cfg: SystemConfig) -> bool:
    """Whether T clears the lossless trade-off for unconstrained filters:
    T > max(M(K-L)/K, K-1), evaluated in exact rational arithmetic."""
    bound = max(Fraction(cfg.m * (cfg.k - cfg.l), cfg.k), Fraction(cfg.k - 1))
    return Fraction(cfg.t) > bound


def tradeoff_threshold(m: int, k: int, l: int) -> int:
    """Smallest integer T satisfying the trade-off condition."""
    bound = max(Fraction(m * (k - l), k), Fraction(k - 1))
    return int(bound) + 1


def t_min(cfg: SystemConfig) -> int:
    """Closed-form minimum T for lossless unconstrained processing:
    max(K, floor(M(K-L)/(K+1))).  Pure integer arithmetic; cfg.t is unused.

    Note this floor formula and :func:`tradeoff_satisfied` disagree for
    some dimensions (e.g. M=12, K=4, L=1 gives 7 here but 10 from the
    strict trade-off); :func:`empirical_t_min` measures the actual solver
    threshold so the two can be compared rather than silently reconciled.
    """
    return max(cfg.k, (cfg.m * (cfg.k - cfg.l)) // (cfg.k + 1))


def empirical_t_min(
    m: int,
    k: int,
    l: int,
    trials: int = 20,
    rng: np.random.Generator | None = None,
) -> int:
    """Smallest T in [K, M] at which the unconstrained solver reaches
    relative residual < 1e-8 on every one of ``trials`` sampled channels.

    T = M always succeeds (A is then unitary and W = I, X = A^H H is an
    exact factorization), so M is returned in the worst case.
    """
    from . import baseline
    from .model import sample_channel

    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if rng is None:
        rng = np.random.default_rng()
    for t in range(k, m + 1):
        cfg = SystemConfig(m=m, k=k, l=l, t=t, snr=1.0)
        ok = True
        for _ in range(trials):
            ch = sample_channel(cfg, rng)
            a = CombiningModule.sample(cfg, rng)
            sol = baseline.solve_unconstrained(ch, a, cfg)
            if not sol.residual < 1e-8:
                ok = False
                break
        if ok:
            return t
    return m
