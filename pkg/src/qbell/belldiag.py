"""Bell-diagonal states: mixtures of the d² magic-basis projectors.

The Weyl operators ``U_mn e_k = λ^{mk} e_{k+n}`` (λ = exp(2πi/d)) generate
the magic basis ``ψ_mn = (I ⊗ U_mn) ψ^+``. A Bell-diagonal state
``rho = sum p_mn P_mn`` is circulant, with blocks obtained from column n of
``p`` by an inverse discrete Fourier transform.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

import numpy as np

from . import circulant, matcore
from .circulant import CirculantState
from .errors import DimensionError, NotBellDiagonalError

SIMPLEX_TOL = 1e-12
RECOVERY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BellProbabilities:
    """Weights ``p[m, n]`` of the projectors ``P_mn`` (m: phase, n: shift)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise DimensionError(f"expected a square d×d probability matrix, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite")
        if p.min() < -SIMPLEX_TOL:
            m, n = np.unravel_index(np.argmin(p), p.shape)
            raise ValueError(f"negative weight p[{m},{n}] = {p[m, n]!r}")
        if abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights sum to {p.sum()!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def d(self) -> int:
        return self.p.shape[0]

    @classmethod
    def uniform(cls, d: int) -> "BellProbabilities":
        return cls(np.full((d, d), 1.0 / (d * d)))


@lru_cache(maxsize=None)
def _roots(d: int) -> np.ndarray:
    # λ^k for k = 0..d-1; powers are always reduced mod d before lookup
    return np.exp(2j * np.pi * np.arange(d) / d)


def shift(d: int, power: int = 1) -> np.ndarray:
    """``S^power`` with ``S e_k = e_{k+1}``."""
    return np.roll(np.eye(d, dtype=np.complex128), power % d, axis=0)


def weyl(d: int, m: int, n: int) -> np.ndarray:
    """``U_mn e_k = λ^{mk} e_{k+n}``."""
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError(f"Weyl index ({m}, {n}) out of range for d={d}")
    k = np.arange(d)
    U = np.zeros((d, d), dtype=np.complex128)
    U[(k + n) % d, k] = _roots(d)[(m * k) % d]
    return U


def max_entangled_vector(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128).ravel() / np.sqrt(d)


def bell_vector(d: int, m: int, n: int) -> np.ndarray:
    """``ψ_mn = (I ⊗ U_mn) ψ^+``."""
    return np.kron(np.eye(d), weyl(d, m, n)) @ max_entangled_vector(d)


def magic_basis(d: int) -> np.ndarray:
    """Columns ``ψ_mn`` ordered by α = m*d + n."""
    return np.column_stack([bell_vector(d, m, n) for m in range(d) for n in range(d)])


def bell_projector(d: int, m: int, n: int) -> np.ndarray:
    psi = bell_vector(d, m, n)
    return np.outer(psi, psi.conj())


def sigma_projector(d: int, n: int) -> np.ndarray:
    """``Π_n = sum_m P_mn``, the projector onto Σ_n."""
    return sum(bell_projector(d, m, n) for m in range(d))


def bell_diagonal_operator(c) -> np.ndarray:
    """``sum_mn c[m, n] P_mn`` for an arbitrary real (or complex) d×d array."""
    return circulant.assemble_blocks(_fourier_blocks(np.asarray(c)))


def _fourier_blocks(c: np.ndarray) -> np.ndarray:
    # a^(n)_{kl} = (1/d) sum_m c[m, n] λ^{m(k-l)}
    d = c.shape[0]
    k, l = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    m = np.arange(d)[:, None, None]
    phases = _roots(d)[(m * (k - l)[None]) % d]  # (m, k, l)
    return np.einsum("mn,mkl->nkl", c.astype(np.complex128), phases) / d


def fourier_matrix(d: int) -> np.ndarray:
    """``H_kl = λ^{kl} / sqrt(d)``."""
    k = np.arange(d)
    return _roots(d)[np.outer(k, k) % d] / np.sqrt(d)


def to_circulant(bp: BellProbabilities) -> CirculantState:
    """Circulant blocks of ``sum p_mn P_mn``: ``a^(n) = H D^(n) H^*``, D^(n) = diag(p[:, n])."""
    return CirculantState(_fourier_blocks(bp.p), validate=False)


def to_dense(bp: BellProbabilities) -> np.ndarray:
    return circulant.assemble_dense(to_circulant(bp))


def from_circulant(cs: CirculantState) -> BellProbabilities:
    """Recover ``p_mn = Tr(P_mn rho)``.

    Raises :class:`NotBellDiagonalError` when the state is not a mixture of
    magic projectors, i.e. some block is not a circulant matrix or the
    recovered weights are negative.
    """
    d = cs.d
    k, l = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    m = np.arange(d)[:, None, None]
    phases = _roots(d)[(-m * (k - l)[None]) % d]
    p = np.einsum("nkl,mkl->mn", cs.blocks, phases).real / d
    rebuilt = _fourier_blocks(p)
    miss = np.max(np.abs(rebuilt - cs.blocks), axis=(1, 2))
    worst = int(np.argmax(miss))
    if miss[worst] > RECOVERY_TOL:
        raise NotBellDiagonalError(
            f"block a^({worst}) is not a circulant matrix (deviation {miss[worst]:.3e})", block=worst
        )
    if p.min() < -RECOVERY_TOL:
        worst = int(np.unravel_index(np.argmin(p), p.shape)[1])
        raise NotBellDiagonalError(f"negative weight in column {worst}: {p.min():.3e}", block=worst)
    p = np.clip(p, 0.0, None)
    if abs(p.sum() - 1.0) > RECOVERY_TOL:
        raise NotBellDiagonalError(f"weights sum to {p.sum()!r}, state is not unit trace")
    return BellProbabilities(p / p.sum())


def tilde_blocks(bp: BellProbabilities) -> np.ndarray:
    return circulant.tilde_blocks(to_circulant(bp)).blocks


def orbit_shift(d: int, n: int) -> "tuple[int, int]":
    """Representative index r and shift power k with ``ã^(n) = S^k ã^(r) S^-k``.

    ``ã^(n)_{ij} = f^(n-i-j)_{i-j}``, so conjugating ``ã^(r)`` by ``S^k``
    moves it to ``ã^(r+2k)``. For odd d every n is reached from r = 0 with
    ``k = n/2 mod d``; for even d the even and odd n form two orbits.
    """
    if d % 2:
        return 0, (n * (d + 1) // 2) % d
    return n % 2, n // 2


@dataclass
class OrbitCheck:
    d: int
    orbits: List[List[int]]
    max_deviation: List[float]

    @property
    def ok(self) -> bool:
        return all(dev <= 1e-12 for dev in self.max_deviation)


def tilde_orbit_check(bp: BellProbabilities) -> OrbitCheck:
    """Check that every ``ã^(n)`` is a shift conjugate of its orbit representative."""
    d = bp.d
    T = tilde_blocks(bp)
    reps = [0] if d % 2 else ([0, 1] if d > 1 else [0])
    orbits = {r: [] for r in reps}
    dev = {r: 0.0 for r in reps}
    for n in range(d):
        r, k = orbit_shift(d, n)
        S = shift(d, k)
        err = float(np.max(np.abs(T[n] - S @ T[r] @ S.conj().T)))
        orbits[r].append(n)
        dev[r] = max(dev[r], err)
    return OrbitCheck(d, [orbits[r] for r in reps], [dev[r] for r in reps])


def is_ppt_bell(bp: BellProbabilities, tol: float = matcore.PSD_TOL) -> bool:
    """PPT test on the orbit representatives: ``ã^(0)``, plus ``ã^(1)`` for even d."""
    T = tilde_blocks(bp)
    reps = [0] if bp.d % 2 else [0, 1]
    return all(matcore.is_psd(T[r], tol) for r in reps)


def _require_d(bp, d):
    if bp.d != d:
        raise DimensionError(f"expected d={d}, got d={bp.d}")


def ppt_d2(bp: BellProbabilities, tol: float = SIMPLEX_TOL) -> bool:
    """Two-qubit test ``x_0 >= |y_1|`` and ``x_1 >= |y_0|``, with slack ``tol``.

    Equivalent to ``max p_mn <= 1/2``; the slack keeps grid points sitting
    exactly on that boundary from failing on rounding.
    """
    _require_d(bp, 2)
    p = bp.p
    x = (p[0] + p[1]) / 2
    y = (p[0] - p[1]) / 2
    return bool(x[0] - abs(y[1]) >= -tol and x[1] - abs(y[0]) >= -tol)


@dataclass
class QutritPPT:
    c1: bool
    c2: bool
    eigen_psd: bool
    min_eigenvalue: float
    x: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)

    @property
    def consistent(self) -> bool:
        return (self.c1 and self.c2) == self.eigen_psd


def qutrit_coordinates(bp: BellProbabilities):
    """``x_n = sum_m p_mn / 3`` and ``z_n = (p_0n + λ p_1n + λ̄ p_2n) / 3``."""
    _require_d(bp, 3)
    lam = _roots(3)[1]
    p = bp.p
    x = p.sum(axis=0) / 3
    z = (p[0] + lam * p[1] + np.conj(lam) * p[2]) / 3
    return x, z


def qutrit_tilde0(x, z) -> np.ndarray:
    """The displayed 3×3 form of ``ã^(0)`` in (x, z) coordinates.

    It is the entrywise conjugate of :func:`tilde_blocks` ``[0]`` (same spectrum).
    """
    c = np.conj
    return np.array(
        [[x[0], z[2], c(z[1])],
         [c(z[2]), x[1], z[0]],
         [z[1], c(z[0]), x[2]]],
        dtype=np.complex128,
    )


def ppt_d3(bp: BellProbabilities, tol: float = matcore.PSD_TOL) -> QutritPPT:
    """Two-qutrit conditions

    * C1: ``x_0 x_1 >= |z_2|^2``
    * C2: ``x_0 x_1 x_2 + 2 Re(z_0 z_1 z_2) >= x_0|z_0|^2 + x_1|z_1|^2 + x_2|z_2|^2``

    reported next to the eigenvalue verdict on ``ã^(0)``. C1 and C2 are two
    of the principal-minor conditions and are not assumed to be sufficient.
    Both inequalities are tested with a slack of ``tol``.
    """
    x, z = qutrit_coordinates(bp)
    c1 = x[0] * x[1] - abs(z[2]) ** 2 >= -tol
    lhs = x[0] * x[1] * x[2] + 2 * (z[0] * z[1] * z[2]).real
    rhs = x[0] * abs(z[0]) ** 2 + x[1] * abs(z[1]) ** 2 + x[2] * abs(z[2]) ** 2
    c2 = lhs - rhs >= -tol
    A = qutrit_tilde0(x, z)
    lo = matcore.min_eigenvalue(A)
    psd = lo >= -tol * (1 + abs(np.trace(A).real))
    return QutritPPT(bool(c1), bool(c2), bool(psd), lo, x, z)


def ququart_coordinates(bp: BellProbabilities):
    _require_d(bp, 4)
    p = bp.p
    x = (p[0] + p[1] + p[2] + p[3]) / 4
    y = (p[0] - p[1] + p[2] - p[3]) / 4
    z = (p[0] + 1j * p[1] - p[2] - 1j * p[3]) / 4
    return x, y, z


def ququart_tilde(x, y, z):
    """Displayed 4×4 forms of ``ã^(0)`` and ``ã^(1)`` in (x, y, z) coordinates.

    The corner entry of ``ã^(0)`` carries ``z_{-1} = z_3``; with ``z_0`` there
    the verdict disagrees with the partial transpose.
    """
    c = np.conj
    a0 = np.array(
        [[x[0], z[3], y[2], c(z[1])],
         [c(z[3]), x[2], z[1], y[0]],
         [y[2], c(z[1]), x[0], z[3]],
         [z[1], y[0], c(z[3]), x[2]]],
        dtype=np.complex128,
    )
    a1 = np.array(
        [[x[1], z[0], y[3], c(z[2])],
         [c(z[0]), x[3], z[2], y[1]],
         [y[3], c(z[2]), x[1], z[0]],
         [z[2], y[1], c(z[0]), x[3]]],
        dtype=np.complex128,
    )
    return a0, a1


def ppt_d4(bp: BellProbabilities, tol: float = matcore.PSD_TOL) -> bool:
    a0, a1 = ququart_tilde(*ququart_coordinates(bp))
    return matcore.is_psd(a0, tol) and matcore.is_psd(a1, tol)


def kraus_apply(bp: BellProbabilities, X) -> np.ndarray:
    """``Λ(X) = sum p_mn U_mn X U_mn^H``."""
    X = matcore.as_matrix(X)
    d = bp.d
    if X.shape != (d, d):
        raise DimensionError(f"expected a {d}x{d} operand, got {X.shape}")
    out = np.zeros((d, d), dtype=np.complex128)
    for m in range(d):
        for n in range(d):
            if bp.p[m, n]:
                U = weyl(d, m, n)
                out += bp.p[m, n] * (U @ X @ U.conj().T)
    return out


def kraus_dual_apply(bp: BellProbabilities, X) -> np.ndarray:
    """``Λ#(X) = sum p_mn U_mn^H X U_mn``."""
    X = matcore.as_matrix(X)
    d = bp.d
    out = np.zeros((d, d), dtype=np.complex128)
    for m in range(d):
        for n in range(d):
            U = weyl(d, m, n)
            out += bp.p[m, n] * (U.conj().T @ X @ U)
    return out


def ppt_oracle(bp: BellProbabilities, tol: float = matcore.PSD_TOL) -> bool:
    """Dense PPT verdict: brute partial transpose then Jacobi eigenvalues."""
    return matcore.is_psd(matcore.brute_partial_transpose(to_dense(bp), bp.d), tol)


def parse_probabilities(values, d: Optional[int] = None) -> BellProbabilities:
    """Build from a flat row-major list (m major, n minor)."""
    v = np.asarray(values, dtype=float).ravel()
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if v.size != d * d:
        raise DimensionError(f"expected {d * d} weights for d={d}, got {v.size}")
    return BellProbabilities(v.reshape(d, d))
