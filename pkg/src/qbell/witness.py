"""Entanglement witnesses diagonal in an orthonormal (by default magic) basis.

A spectral witness is ``W = W_+ - W_-`` with ``W_- = sum_{α in neg} λ_α P_α``
and ``W_+ = sum_{α not in neg} λ_α P_α``, all ``λ_α >= 0``. Sufficient
conditions for W to be a k-witness are given in terms of the Schmidt
k-norms of the basis vectors carrying the negative part.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from . import belldiag, families, matcore
from .errors import DimensionError

DETECTION_THRESHOLD = -1e-12
IMAG_TOL = 1e-11
MU_TOL = 1e-12

Index = Union[int, Sequence[int]]


def _alpha(d: int, idx: Index) -> int:
    if isinstance(idx, (int, np.integer)):
        a = int(idx)
    else:
        m, n = idx
        a = int(m) * d + int(n)
    if not 0 <= a < d * d:
        raise ValueError(f"basis index {idx!r} out of range for d={d}")
    return a


@dataclass(frozen=True, eq=False)
class SpectralWitness:
    """Spectral data ``λ_α >= 0`` over a basis, with the negative part ``neg``.

    ``basis`` holds orthonormal columns; ``None`` means the magic basis
    ordered by α = m*d + n.
    """

    d: int
    eigenvalues: np.ndarray
    negative: frozenset
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        d = self.d
        if lam.size != d * d:
            raise DimensionError(f"expected {d * d} eigenvalues, got {lam.size}")
        if lam.min() < 0:
            raise ValueError("spectral witness weights must be nonnegative")
        neg = frozenset(_alpha(d, a) for a in self.negative)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "negative", neg)
        if self.basis is not None:
            B = np.asarray(self.basis, dtype=np.complex128)
            if B.shape != (d * d, d * d):
                raise DimensionError(f"basis must be {d * d}x{d * d}, got {B.shape}")
            if np.max(np.abs(B.conj().T @ B - np.eye(d * d))) > 1e-10:
                raise ValueError("basis columns are not orthonormal")
            object.__setattr__(self, "basis", B)

    @property
    def L(self) -> int:
        return len(self.negative)

    def vectors(self) -> np.ndarray:
        return belldiag.magic_basis(self.d) if self.basis is None else self.basis

    def signed_eigenvalues(self) -> np.ndarray:
        s = self.eigenvalues.copy()
        for a in self.negative:
            s[a] = -s[a]
        return s

    def positive_indices(self) -> List[int]:
        return [a for a in range(self.d * self.d) if a not in self.negative]


def assemble(w: SpectralWitness) -> np.ndarray:
    """``sum_α ±λ_α |ψ_α><ψ_α|``."""
    s = w.signed_eigenvalues()
    if w.basis is None:
        return belldiag.bell_diagonal_operator(s.reshape(w.d, w.d))
    B = w.basis
    return (B * s) @ B.conj().T


def k_norm_sq(psi, d: int, k: int) -> float:
    """Sum of the k largest squared Schmidt coefficients."""
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}, got {k}")
    s = matcore.schmidt_coefficients(psi, d)
    return float(np.sum(s[:k] ** 2))


def mu(ell: int, w: SpectralWitness) -> float:
    """``μ_ℓ = sum_neg λ_α ||ψ_α||²_ℓ / (1 - sum_neg ||ψ_α||²_ℓ)``.

    Raises ``ValueError`` when the denominator is not positive.
    """
    if not w.negative:
        return 0.0
    V = w.vectors()
    norms = {a: k_norm_sq(V[:, a], w.d, ell) for a in w.negative}
    denom = 1.0 - sum(norms.values())
    if denom <= 0:
        raise ValueError(f"sum of negative-part {ell}-norms is {1 - denom:.6g} >= 1; μ_{ell} undefined")
    return sum(w.eigenvalues[a] * norms[a] for a in sorted(w.negative)) / denom


@dataclass
class KWitnessVerdict:
    k: int
    is_witness: bool
    k_ew_certified: bool
    not_k_plus_1: Optional[bool]
    mu_k: Optional[float]
    mu_k_plus_1: Optional[float]
    notes: List[str] = field(default_factory=list)


def theorem3_k_ew(w: SpectralWitness, k: int) -> KWitnessVerdict:
    """Sufficient spectral test for W being a k-witness.

    Certified when every positive-part weight is at least ``μ_k``. If also
    ``μ_{k+1}`` is defined and exceeds every positive-part weight, W is not
    a (k+1)-witness. Failure to certify says nothing.
    """
    d = w.d
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}, got {k}")
    notes = []
    if not w.negative:
        notes.append("no negative part: positive operator, not a witness")
        return KWitnessVerdict(k, False, True, None, 0.0, None, notes)
    pos = w.eigenvalues[w.positive_indices()]
    try:
        mk = mu(k, w)
    except ValueError as exc:
        notes.append(str(exc))
        return KWitnessVerdict(k, True, False, None, None, None, notes)
    certified = bool(np.all(pos >= mk - MU_TOL * (1 + abs(mk))))
    mk1 = None
    not_next = None
    if k + 1 <= d:
        try:
            mk1 = mu(k + 1, w)
            not_next = bool(np.all(mk1 > pos))
        except ValueError as exc:
            notes.append(str(exc))
    return KWitnessVerdict(k, True, certified, not_next, mk, mk1, notes)


def corollary2_bell_witness(
    d: int, L: int, lambdas: Sequence[float], negative: Optional[Iterable[Index]] = None
) -> SpectralWitness:
    """Bell-diagonal witness with L < d negative magic-basis weights.

    ``lambdas`` lists all d² weights in α = m*d + n order. The negative part
    is the first L indices unless ``negative`` names them explicitly. Every
    positive weight must be at least ``μ_1 = sum_neg λ / (d - L)``.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size != d * d:
        raise DimensionError(f"expected {d * d} weights, got {lam.size}")
    if not 0 <= L < d:
        raise ValueError(f"need 0 <= L < d, got L={L}, d={d}")
    neg = list(range(L)) if negative is None else [_alpha(d, a) for a in negative]
    if len(set(neg)) != L:
        raise ValueError(f"negative part has {len(set(neg))} indices, expected L={L}")
    bad = np.flatnonzero(lam < 0)
    if bad.size:
        raise ValueError(f"weight {int(bad[0])} is negative")
    mu1 = lam[neg].sum() / (d - L)
    for a in range(d * d):
        if a not in neg and lam[a] < mu1 - MU_TOL * (1 + mu1):
            raise ValueError(f"positive weight {a} = {lam[a]!r} is below mu_1 = {mu1!r}")
    return SpectralWitness(d, lam, frozenset(neg))


def mu1_bell(d: int, lambdas_negative: Sequence[float]) -> float:
    return float(np.sum(lambdas_negative)) / (d - len(lambdas_negative))


# -- named witnesses ---------------------------------------------------------


def flip(d: int = 2) -> np.ndarray:
    """Swap operator ``F(x ⊗ y) = y ⊗ x``."""
    F = np.zeros((d * d, d * d), dtype=np.complex128)
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    F[(i * d + j).ravel(), (j * d + i).ravel()] = 1.0
    return F


def flip_spectral() -> np.ndarray:
    """``P_00 + P_10 + P_01 - P_11`` (d = 2)."""
    return belldiag.bell_diagonal_operator(np.array([[1.0, 1.0], [1.0, -1.0]]))


def choi_witness(a: float, b: float, c: float) -> np.ndarray:
    """Two-qutrit ``W[a,b,c]`` from its matrix entries."""
    _nonneg(a=a, b=b, c=c)
    d = 3
    W = np.zeros((9, 9), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            W[i * d + i, j * d + j] = a if i == j else -1.0
        W[i * d + (i + 1) % d, i * d + (i + 1) % d] = b
        W[i * d + (i + 2) % d, i * d + (i + 2) % d] = c
    return W


def choi_witness_spectral(a: float, b: float, c: float) -> np.ndarray:
    """``(a-2) P_00 + (a+1)(P_10 + P_20) + b Π_1 + c Π_2``."""
    _nonneg(a=a, b=b, c=c)
    coef = np.array([[a - 2, b, c], [a + 1, b, c], [a + 1, b, c]], dtype=float)
    return belldiag.bell_diagonal_operator(coef)


def is_choi_ew(a: float, b: float, c: float) -> bool:
    """Validity of ``W[a,b,c]``: 0 <= a < 2, a+b+c >= 2, and bc >= (1-a)² when a <= 1."""
    _nonneg(a=a, b=b, c=c)
    if not 0 <= a < 2:
        return False
    if a + b + c < 2:
        return False
    if a <= 1 and b * c < (1 - a) ** 2:
        return False
    return True


def w_lambda_mu(lam: float, mu_: float) -> np.ndarray:
    """Two-qutrit ``W_{λ,μ}`` from its matrix entries."""
    _nonneg(lam=lam, mu=mu_)
    d = 3
    W = np.zeros((9, 9), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            r0, c0 = i * d + i, j * d + j
            W[r0, c0] = 1.0 if i == j else -1.0
            r1, c1 = i * d + (i + 1) % d, j * d + (j + 1) % d
            W[r1, c1] = mu_ + (1.0 if i == j else 0.0)
            r2, c2 = i * d + (i + 2) % d, j * d + (j + 2) % d
            W[r2, c2] = lam
    return W


def w_lambda_mu_spectral(lam: float, mu_: float) -> np.ndarray:
    """``-3 P_00 + 2 Π_0 + Π_1 + 3μ P_01 + 3λ P_02``."""
    _nonneg(lam=lam, mu=mu_)
    coef = np.array([[-1.0, 1 + 3 * mu_, 3 * lam], [2.0, 1.0, 0.0], [2.0, 1.0, 0.0]])
    return belldiag.bell_diagonal_operator(coef)


def lambda_bound(gamma: float) -> float:
    return (1 - gamma**2) / (2 + gamma**-2)


def mu_bound(gamma: float, lam: float) -> float:
    return (1 - gamma**2 - lam * (2 + gamma**-2)) / (2 + gamma**2)


def in_detection_region(gamma: float, lam: float, mu_: float) -> bool:
    return lam < lambda_bound(gamma) and mu_ < mu_bound(gamma, lam)


def reduction_witness(d: int) -> np.ndarray:
    """``I/d - P^+_d``."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    psi = belldiag.max_entangled_vector(d)
    return np.eye(d * d, dtype=np.complex128) / d - np.outer(psi, psi.conj())


def reduction_witness_spectral(d: int) -> np.ndarray:
    """``(1/d) sum_kl P_kl - P_00``."""
    coef = np.full((d, d), 1.0 / d)
    coef[0, 0] -= 1.0
    return belldiag.bell_diagonal_operator(coef)


def w_dk(d: int, k: int) -> np.ndarray:
    """``W_{d,k} = sum_ij e_ij ⊗ X_ij`` from its blocks.

    ``X_ii = (d-k-1) e_ii + sum_{l=1}^k S^l e_ii S^-l`` and ``X_ij = -e_ij``
    for i ≠ j. The conjugation ``S^l · S^-l`` moves the diagonal unit to
    ``e_{i+l, i+l}``.
    """
    _check_k(d, k)
    W = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            X = np.zeros((d, d), dtype=np.complex128)
            if i == j:
                X[i, i] = d - k - 1
                for ell in range(1, k + 1):
                    S = belldiag.shift(d, ell)
                    E = np.zeros((d, d))
                    E[i, i] = 1.0
                    X += S @ E @ S.conj().T
            else:
                X[i, j] = -1.0
            W[i * d:(i + 1) * d, j * d:(j + 1) * d] = X
    return W


def w_dk_spectral(d: int, k: int) -> np.ndarray:
    """``(d-k) Π_0 + sum_{l=1}^k Π_l - d P_00``."""
    _check_k(d, k)
    coef = np.zeros((d, d))
    coef[:, 0] = d - k
    coef[:, 1 : k + 1] = 1.0
    coef[0, 0] -= d
    return belldiag.bell_diagonal_operator(coef)


def _check_k(d, k):
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in 1..{d - 1}, got {k}")


def _nonneg(**params):
    for name, v in params.items():
        if v < 0:
            raise ValueError(f"{name} must be nonnegative, got {v!r}")


# -- evaluation ---------------------------------------------------------------


@dataclass
class WitnessVerdict:
    value: float
    detected: bool
    witness_id: str = ""
    state_id: str = ""


def evaluate(W, rho, witness_id: str = "", state_id: str = "") -> WitnessVerdict:
    """``Tr(W rho)``; detected when the value is below -1e-12."""
    W = matcore.as_matrix(W)
    rho = matcore.as_matrix(rho)
    if W.shape != rho.shape or W.shape[0] != W.shape[1]:
        raise DimensionError(f"witness {W.shape} and state {rho.shape} do not match")
    t = np.sum(W * rho.T)
    if abs(t.imag) > IMAG_TOL:
        raise ValueError(f"Tr(W rho) has imaginary part {t.imag:.3e}; operands not Hermitian")
    value = float(t.real)
    return WitnessVerdict(value, value < DETECTION_THRESHOLD, witness_id, state_id)


def detects_rho_gamma(lam: float, mu_: float, gamma: float) -> WitnessVerdict:
    """Evaluate ``W_{λ,μ}`` on the two-qutrit ``rho_γ``."""
    rho = belldiag.to_dense(families.rho_gamma(3, gamma))
    return evaluate(
        w_lambda_mu(lam, mu_), rho,
        witness_id=f"W_lambda_mu({lam:g},{mu_:g})", state_id=f"rho_gamma(3,{gamma:g})",
    )


def block_positivity_sample(W, trials: int, seed: int) -> float:
    """Minimum of ``<x⊗y|W|x⊗y>`` over random unit product vectors.

    Vectors are normalized complex Gaussians from ``default_rng(seed)``, so
    the result is reproducible. A negative minimum disproves block
    positivity; a nonnegative one is only evidence for it.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    W = matcore.as_matrix(W)
    d = int(round(np.sqrt(W.shape[0])))
    if d * d != W.shape[0] or W.shape[0] != W.shape[1]:
        raise DimensionError(f"witness shape {W.shape} is not d²×d²")
    rng = np.random.default_rng(seed)

    def unit(n):
        v = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    x, y = unit(trials), unit(trials)
    v = (x[:, :, None] * y[:, None, :]).reshape(trials, d * d)
    vals = np.einsum("ti,ij,tj->t", v.conj(), W, v).real
    return float(vals.min())
