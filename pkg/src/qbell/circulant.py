"""Circulant bipartite states on C^d ⊗ C^d.

A circulant state is a direct sum of d operators, the n-th one supported on
``Σ_n = span{e_i ⊗ e_{i+n}}`` and described by a positive d×d block
``a^(n)``::

    rho = sum_{n,i,j} a^(n)_{ij} e_{ij} ⊗ e_{i+n, j+n}      (indices mod d)

Both the partial transpose and the realignment of such an operator are
again block structured, so PPT and CCNR questions reduce to d×d problems.
Blocks are stored as an array of shape (d, d, d) with ``blocks[n] = a^(n)``.
"""

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DimensionError, NotCirculantError

STATE_TOL = 1e-10
SUPPORT_TOL = 1e-12
CHANNEL_TOL = 1e-10


def _grid(d):
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return i, j


def _place(blocks: np.ndarray, second_index) -> np.ndarray:
    """Scatter blocks[n][i, j] to row (i, f(n, i)), column (j, f(n, j))."""
    d = blocks.shape[0]
    M = np.zeros((d * d, d * d), dtype=np.complex128)
    i, j = _grid(d)
    for n in range(d):
        rows = i * d + second_index(n, i) % d
        cols = j * d + second_index(n, j) % d
        M[rows, cols] = blocks[n]
    return M


def _gather(M: np.ndarray, d: int, second_index) -> np.ndarray:
    i, j = _grid(d)
    out = np.empty((d, d, d), dtype=np.complex128)
    for n in range(d):
        out[n] = M[i * d + second_index(n, i) % d, j * d + second_index(n, j) % d]
    return out


def _sigma(n, i):
    return i + n


def _sigma_tilde(n, i):
    return n - i


def _as_blocks(blocks) -> np.ndarray:
    B = np.asarray(blocks, dtype=np.complex128)
    if B.ndim != 3 or not (B.shape[0] == B.shape[1] == B.shape[2]):
        raise DimensionError(f"expected d blocks of size d×d, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ValueError("blocks have non-finite entries")
    return B


@dataclass(frozen=True, eq=False)
class CirculantState:
    """Circulant density operator given by its d blocks ``a^(0..d-1)``.

    Blocks must be Hermitian positive semidefinite with total trace one
    (tolerance 1e-10). Pass ``validate=False`` to skip the checks, e.g. for
    unnormalized operators such as witnesses.
    """

    blocks: np.ndarray
    validate: bool = True

    def __post_init__(self):
        B = _as_blocks(self.blocks)
        B.setflags(write=False)
        object.__setattr__(self, "blocks", B)
        if self.validate:
            for n, a in enumerate(B):
                if matcore.hermiticity_defect(a) > STATE_TOL:
                    raise ValueError(f"block a^({n}) is not Hermitian")
                if not matcore.is_psd(a, STATE_TOL):
                    raise ValueError(f"block a^({n}) is not positive semidefinite")
            total = np.trace(B, axis1=1, axis2=2).sum()
            if abs(total - 1.0) > STATE_TOL:
                raise ValueError(f"blocks have total trace {total.real!r}, expected 1")

    @property
    def d(self) -> int:
        return self.blocks.shape[0]

    def __repr__(self):
        return f"CirculantState(d={self.d})"


@dataclass(frozen=True, eq=False)
class TildeBlocks:
    """Blocks ``ã^(n)`` of the partial transpose, living on ``Σ̃_n``.

    ``Σ̃_n = span{e_i ⊗ e_{n-i}}``. The blocks are Hermitian but need not be
    positive; their positivity is exactly the PPT property.
    """

    blocks: np.ndarray

    @property
    def d(self) -> int:
        return self.blocks.shape[0]

    def to_dense(self) -> np.ndarray:
        return _place(self.blocks, _sigma_tilde)


def assemble_dense(cs: CirculantState) -> np.ndarray:
    """The d²×d² matrix ``rho`` with ``rho[(i,i+n),(j,j+n)] = a^(n)_{ij}``."""
    return _place(cs.blocks, _sigma)


def assemble_blocks(blocks) -> np.ndarray:
    """Place arbitrary (d, d, d) blocks on the Σ_n support, no validation."""
    return _place(_as_blocks(blocks), _sigma)


def from_dense(M, d: int, validate: bool = True) -> CirculantState:
    """Read blocks off the circulant support of a dense matrix.

    Raises :class:`NotCirculantError` if any entry outside the support
    exceeds 1e-12 in magnitude.
    """
    M = matcore.as_matrix(M)
    if M.shape != (d * d, d * d):
        raise DimensionError(f"expected a {d * d}x{d * d} matrix for d={d}, got {M.shape}")
    blocks = _gather(M, d, _sigma)
    residual = M - _place(blocks, _sigma)
    worst = np.unravel_index(np.argmax(np.abs(residual)), residual.shape)
    if abs(residual[worst]) > SUPPORT_TOL:
        raise NotCirculantError(
            f"entry {tuple(int(x) for x in worst)} = {residual[worst]:.3e} lies off the circulant support",
            index=tuple(int(x) for x in worst),
        )
    return CirculantState(blocks, validate=validate)


def random_circulant(d: int, rng: np.random.Generator) -> CirculantState:
    """Random state: each block G^H G from complex Gaussian G, then trace-normalized."""
    G = rng.standard_normal((d, d, d)) + 1j * rng.standard_normal((d, d, d))
    B = np.conj(np.transpose(G, (0, 2, 1))) @ G
    B /= np.trace(B, axis1=1, axis2=2).real.sum()
    return CirculantState(B)


def tilde_blocks(cs: CirculantState) -> TildeBlocks:
    """Blocks of ``(id ⊗ T) rho`` on the subspaces ``Σ̃_n``.

    ``ã^(n) = sum_m a^(n+m) ∘ (Π S^m)`` where ``Π_{kl} = δ_{k,-l}`` and ∘
    is the entrywise product. ``(Π S^m)_{kl}`` is 1 exactly when
    ``m = -k-l``, so entrywise ``ã^(n)_{ij} = a^(n-i-j)_{ij}``.
    """
    d = cs.d
    i, j = _grid(d)
    out = np.empty_like(cs.blocks)
    for n in range(d):
        out[n] = cs.blocks[(n - i - j) % d, i, j]
    return TildeBlocks(out)


def tilde_blocks_hadamard(cs: CirculantState) -> TildeBlocks:
    """Same as :func:`tilde_blocks`, written literally as Hadamard products."""
    d = cs.d
    S = np.roll(np.eye(d), 1, axis=0)
    Pi = np.zeros((d, d))
    Pi[(-np.arange(d)) % d, np.arange(d)] = 1.0
    out = np.zeros_like(cs.blocks)
    for n in range(d):
        for m in range(d):
            out[n] += cs.blocks[(n + m) % d] * (Pi @ np.linalg.matrix_power(S, m))
    return TildeBlocks(out)


def is_ppt(cs: CirculantState, tol: float = matcore.PSD_TOL) -> bool:
    """PPT test through the d blocks ``ã^(n)``."""
    return all(matcore.is_psd(t, tol) for t in tilde_blocks(cs).blocks)


def realign_blocks(cs: CirculantState) -> np.ndarray:
    """Blocks ``R^(n)`` of the realigned operator, on the same Σ_n support.

    ``R^(n)_{ij} = a^(j-i)_{i+n, i}``; this is the closed form that reproduces
    the two-qubit and two-qutrit realigned matrices (row 0 of ``R^(0)`` is
    ``(a_00, b_00, c_00, ...)``) and agrees with :func:`matcore.brute_realign`.
    """
    d = cs.d
    i, j = _grid(d)
    out = np.empty_like(cs.blocks)
    for n in range(d):
        out[n] = cs.blocks[(j - i) % d, (i + n) % d, i]
    return out


def ccnr_value(cs: CirculantState) -> float:
    """Trace norm of the realigned state; a value above 1 certifies entanglement.

    The realigned operator is block diagonal over the Σ_n, so its trace
    norm is the sum of the block trace norms.
    """
    return float(sum(matcore.trace_norm(R) for R in realign_blocks(cs)))


def _check_operand(cs, X):
    X = matcore.as_matrix(X)
    if X.shape != (cs.d, cs.d):
        raise DimensionError(f"expected a {cs.d}x{cs.d} operand, got {X.shape}")
    return X


def channel_apply(cs: CirculantState, X) -> np.ndarray:
    """Apply the channel Λ with ``(id ⊗ Λ) P^+_d = rho``.

    On matrix units ``Λ(e_kl) = d * sum_n a^(n)_kl e_{k+n, l+n}``. The factor
    d comes from the 1/d in ``P^+_d``; with it, Bell-diagonal states give the
    doubly stochastic Kraus channel.
    """
    X = _check_operand(cs, X)
    d = cs.d
    k, l = _grid(d)
    out = np.zeros((d, d), dtype=np.complex128)
    for n in range(d):
        out[(k + n) % d, (l + n) % d] += d * cs.blocks[n] * X
    return out


def dual_state(cs: CirculantState) -> CirculantState:
    """Circulant state whose channel is the Hilbert-Schmidt dual of ``cs``'s.

    Its blocks are ``b^(n) = S^{-n} (a^(-n))^T S^n``, i.e. the transposed
    blocks relabelled and shift-conjugated.
    """
    d = cs.d
    i, j = _grid(d)
    out = np.empty_like(cs.blocks)
    for n in range(d):
        out[n] = cs.blocks[(-n) % d, (j + n) % d, (i + n) % d]
    return CirculantState(out, validate=False)


def channel_dual_apply(cs: CirculantState, X) -> np.ndarray:
    """Dual map, ``Tr(rho Λ(X)) = Tr(X Λ#(rho))`` for Hermitian rho.

    ``Λ#(e_kl) = d * sum_n a^(n)_{l-n, k-n} e_{k-n, l-n}``.
    """
    return channel_apply(dual_state(cs), X)


def is_unital(cs: CirculantState, tol: float = CHANNEL_TOL) -> bool:
    I = np.eye(cs.d)
    return float(np.max(np.abs(channel_apply(cs, I) - I))) <= tol


def is_trace_preserving(cs: CirculantState, tol: float = CHANNEL_TOL) -> bool:
    I = np.eye(cs.d)
    return float(np.max(np.abs(channel_dual_apply(cs, I) - I))) <= tol
