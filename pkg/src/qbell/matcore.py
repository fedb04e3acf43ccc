"""Dense complex linear algebra for small bipartite operators.

Matrices are plain ``numpy`` complex arrays. The functions here are the
brute-force reference layer: partial transposition and realignment by
index reshuffling, a cyclic Jacobi eigen-solver for Hermitian matrices,
and singular values / Schmidt coefficients built on top of it.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DimensionError, NonHermitianError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order, optionally with eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None


def as_matrix(A) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def _check_bipartite(M: np.ndarray, d: int) -> None:
    if M.shape != (d * d, d * d):
        raise DimensionError(f"expected a {d * d}x{d * d} matrix for d={d}, got {M.shape}")


def kron(A, B) -> np.ndarray:
    """Kronecker product, (A⊗B)[i*rB+k, j*cB+l] = A[i,j]*B[k,l]."""
    return np.kron(as_matrix(A), as_matrix(B))


def brute_partial_transpose(M, d: int) -> np.ndarray:
    """Transpose the second tensor factor of a d²×d² matrix.

    ``out[i*d+l, j*d+k] = M[i*d+k, j*d+l]``.
    """
    M = as_matrix(M)
    _check_bipartite(M, d)
    return M.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d).copy()


def brute_realign(M, d: int) -> np.ndarray:
    """Realignment (reshuffle) of a d²×d² matrix.

    The convention is ``R[(a,b),(c,e)] = M[(b,e),(a,c)]``. It is the only
    reshuffle of the four indices that maps the generic two-qubit X-state
    onto the realigned matrix with first row (a00, 0, 0, b00); it equals
    the textbook realignment ``M[(i,k),(j,l)] -> R[(i,j),(k,l)]``
    conjugated by the swap, so singular values (and the CCNR value) agree.
    It is not an involution; :func:`brute_unrealign` is its inverse.
    """
    M = as_matrix(M)
    _check_bipartite(M, d)
    # axes of M.reshape: (b, e, a, c) -> want (a, b, c, e)
    return M.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d).copy()


def brute_unrealign(R, d: int) -> np.ndarray:
    """Inverse of :func:`brute_realign`."""
    R = as_matrix(R)
    _check_bipartite(R, d)
    return R.reshape(d, d, d, d).transpose(1, 3, 0, 2).reshape(d * d, d * d).copy()


def standard_realign(M, d: int) -> np.ndarray:
    """Textbook realignment ``R[(i,j),(k,l)] = M[(i,k),(j,l)]`` (an involution)."""
    M = as_matrix(M)
    _check_bipartite(M, d)
    return M.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d).copy()


def hermiticity_defect(A) -> float:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got {A.shape}")
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)))


def _round_robin(n: int):
    """Pairings for one cyclic Jacobi sweep; each round is a set of disjoint pairs.

    ``n`` must be even. Every unordered pair appears exactly once per sweep.
    """
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        rounds.append([(players[i], players[n - 1 - i]) for i in range(n // 2)])
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi(A: np.ndarray, want_vectors: bool):
    n = A.shape[0]
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=np.complex128) if want_vectors else None
    if n <= 1:
        return A.diagonal().real.copy(), V

    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        pairs = [(p, q) if p < q else (q, p) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))

    threshold = JACOBI_TOL * (1.0 + np.linalg.norm(A))
    tiny = np.finfo(float).tiny
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        # direct norm; |A|^2 - |diag|^2 cancels down to sqrt(eps) level
        if np.linalg.norm(A[offdiag]) <= threshold:
            return A.diagonal().real.copy(), V
        for p, q in rounds:
            apq = A[p, q]
            r = np.abs(apq)
            # rotations on negligible entries only overflow tau
            active = r > max(tiny, 1e-3 * threshold / n)
            if not np.any(active):
                continue
            phase = np.where(active, apq / np.where(active, r, 1.0), 1.0)
            tau = np.where(active, (A[q, q].real - A[p, p].real) / (2.0 * np.where(active, r, 1.0)), 0.0)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # U = diag(1, conj(phase)) @ [[c, s], [-s, c]] on each (p, q) plane
            U = np.eye(n, dtype=np.complex128)
            U[p, p] = c
            U[p, q] = s
            U[q, p] = -s * phase.conj()
            U[q, q] = c * phase.conj()
            A = U.conj().T @ A @ U
            if want_vectors:
                V = V @ U
    raise ConvergenceError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (n={n})")


def hermitian_eigenvalues(A, vectors: bool = False) -> Spectrum:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps use a round-robin ordering so each round applies disjoint plane
    rotations as a single unitary congruence. Iteration stops when the
    off-diagonal Frobenius norm falls below ``1e-13 * (1 + ||A||_F)``.

    Raises
    ------
    NonHermitianError
        If ``max|A - A^H| > 1e-10``.
    ConvergenceError
        If 100 sweeps are not enough.
    """
    A = as_matrix(A)
    defect = hermiticity_defect(A)
    if defect > HERMITIAN_TOL:
        raise NonHermitianError(f"matrix is not Hermitian (max |A - A^H| = {defect:.3e})")
    w, V = _jacobi(A, vectors)
    order = np.argsort(w, kind="stable")
    w = w[order]
    if V is not None:
        V = V[:, order]
    return Spectrum(eigenvalues=w, eigenvectors=V)


def min_eigenvalue(A) -> float:
    return float(hermitian_eigenvalues(A).eigenvalues[0])


def is_psd(A, tol: float = PSD_TOL) -> bool:
    """True iff the smallest eigenvalue is >= -tol * (1 + |Tr A|)."""
    A = as_matrix(A)
    if A.shape[0] == 0:
        return True
    scale = 1.0 + abs(np.trace(A).real)
    return min_eigenvalue(A) >= -tol * scale


def singular_values(A) -> np.ndarray:
    """Singular values in descending order.

    Computed from the Hermitian dilation [[0, A], [A^H, 0]], whose spectrum
    is {±s_i}; this keeps zero singular values at round-off level instead of
    the sqrt(eps) floor that eigenvalues of A^H A would give.
    """
    A = as_matrix(A)
    r, c = A.shape
    if r == 0 or c == 0:
        return np.zeros(0)
    H = np.zeros((r + c, r + c), dtype=np.complex128)
    H[:r, r:] = A
    H[r:, :r] = A.conj().T
    w = hermitian_eigenvalues(H).eigenvalues
    s = np.clip(w[::-1][: min(r, c)], 0.0, None)
    return s


def trace_norm(A) -> float:
    return float(np.sum(singular_values(A)))


def schmidt_coefficients(psi, d: int) -> np.ndarray:
    """Schmidt coefficients (descending) of a unit vector in C^d ⊗ C^d."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if psi.shape[0] != d * d:
        raise DimensionError(f"expected a vector of length {d * d}, got {psi.shape[0]}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"vector is not normalized (|psi| = {norm!r})")
    return singular_values(psi.reshape(d, d))
