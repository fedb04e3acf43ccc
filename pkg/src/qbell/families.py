"""Named families of Bell-diagonal states.

* ``rho_epsilon``: the two-qutrit bound entangled family, PPT for all ε > 0
  and entangled for ε ≠ 1.
* ``rho_gamma``: the d-dimensional family detected by ``W_{λ,μ}`` (d = 3).
* delta (single-row) and product probability distributions.
* generalized lattice states on N copies of C^d.
"""

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import belldiag, circulant, matcore
from .belldiag import BellProbabilities
from .errors import DimensionError

LATTICE_MAX_DIM2 = 256


def epsilon_normalization(eps: float) -> float:
    return 1.0 / (1.0 + eps + 1.0 / eps)


def rho_epsilon(eps: float) -> BellProbabilities:
    """Two-qutrit state ``N_ε (P_00 + (ε/3) Π_1 + (1/(3ε)) Π_2)``.

    The weights are fixed by the coordinates
    ``x = (N_ε/3)(1, ε, 1/ε)``, ``z = (N_ε/3, 0, 0)`` with
    ``N_ε = 1/(1 + ε + 1/ε)``. Reading the Π_n without the 1/3 would not
    give a unit-trace state.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    N = epsilon_normalization(eps)
    p = np.zeros((3, 3))
    p[0, 0] = N
    p[:, 1] = N * eps / 3
    p[:, 2] = N / (3 * eps)
    p /= p.sum()  # absorbs the last-ulp drift only
    return BellProbabilities(p)


@dataclass(frozen=True)
class GammaCoefficients:
    a: float
    b: float
    N: float


def gamma_coefficients(d: int, gamma: float) -> GammaCoefficients:
    """``a_γ = (γ² + d - 1)/d``, ``b_γ = (γ⁻² + d - 1)/d``, ``N_γ = d² - 2 + γ² + γ⁻²``."""
    g2 = gamma * gamma
    return GammaCoefficients(
        a=(g2 + d - 1) / d,
        b=(1.0 / g2 + d - 1) / d,
        N=d * d - 2 + g2 + 1.0 / g2,
    )


def rho_gamma(d: int, gamma: float) -> BellProbabilities:
    """``(d P_00 + a_γ Π_1 + sum_{l=2}^{d-2} Π_l + b_γ Π_{d-1}) / N_γ``."""
    if d < 3:
        raise ValueError(f"rho_gamma needs d >= 3, got {d}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    co = gamma_coefficients(d, gamma)
    p = np.zeros((d, d))
    p[0, 0] = d
    p[:, 1] = co.a
    p[:, 2 : d - 1] = 1.0
    p[:, d - 1] = co.b
    return BellProbabilities(p / co.N)


def rho_gamma_blockwise(d: int, gamma: float) -> np.ndarray:
    """Dense ``rho_γ = (1/N_γ) sum_ij e_ij ⊗ A_ij`` built from matrix units.

    ``A_ij = e_ij`` off the diagonal and ``A_ii = S^i A_00 S^-i`` with
    ``A_00 = diag(1, a_γ, 1, ..., 1, b_γ)``.
    """
    co = gamma_coefficients(d, gamma)
    diag = np.ones(d)
    diag[1] = co.a
    diag[d - 1] = co.b
    A00 = np.diag(diag).astype(np.complex128)
    W = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            if i == j:
                S = belldiag.shift(d, i)
                A = S @ A00 @ S.conj().T
            else:
                A = np.zeros((d, d), dtype=np.complex128)
                A[i, j] = 1.0
            W[i * d:(i + 1) * d, j * d:(j + 1) * d] = A
    return W / co.N


def _simplex(values, name) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0 or v.min() < -belldiag.SIMPLEX_TOL or abs(v.sum() - 1.0) > belldiag.SIMPLEX_TOL:
        raise ValueError(f"{name} must be a probability vector, got {list(v)}")
    return v


def delta_distribution(d: int, k: int, pi: Sequence[float]) -> BellProbabilities:
    """``p_mn = δ_mk π_n``, i.e. ``rho = sum_n π_n P_kn``."""
    pi = _simplex(pi, "pi")
    if pi.size != d:
        raise DimensionError(f"pi has length {pi.size}, expected {d}")
    if not 0 <= k < d:
        raise ValueError(f"row index k={k} out of range for d={d}")
    p = np.zeros((d, d))
    p[k] = pi
    return BellProbabilities(p)


def product_distribution(d: int, q: Sequence[float], p: Sequence[float]) -> BellProbabilities:
    """``p_mn = q_m p_n``; then ``a^(n) = p_n a`` for one common circulant block a."""
    q = _simplex(q, "q")
    p = _simplex(p, "p")
    if q.size != d or p.size != d:
        raise DimensionError(f"q and p must have length {d}")
    return BellProbabilities(np.outer(q, p))


def product_common_block(d: int, q: Sequence[float]) -> np.ndarray:
    """``a_kl = (1/d) sum_m λ^{m(k-l)} q_m``."""
    c = np.zeros((d, d))
    c[:, 0] = _simplex(q, "q")
    return belldiag.to_circulant(BellProbabilities(c)).blocks[0].copy()


@dataclass
class SeparabilityEvidence:
    """Claimed verdict for a family next to the numerical criteria.

    ``claimed_separable`` is the literature claim for the family; ``ppt`` and
    ``ccnr`` are necessary conditions for separability. ``notes`` flags any
    disagreement, e.g. a claimed entangled state that is PPT in d = 2
    (where PPT already implies separability).
    """

    claimed_separable: bool
    ppt: bool
    ccnr: float
    notes: List[str] = field(default_factory=list)

    @property
    def criteria_consistent(self) -> bool:
        return self.ppt and self.ccnr <= 1 + 1e-10


def _evidence(bp: BellProbabilities, claimed: bool, label: str) -> SeparabilityEvidence:
    cs = belldiag.to_circulant(bp)
    ev = SeparabilityEvidence(claimed, circulant.is_ppt(cs), circulant.ccnr_value(cs))
    ev.notes.append(f"{label}: claimed {'separable' if claimed else 'entangled'}")
    if claimed and not ev.criteria_consistent:
        ev.notes.append("claimed separable but fails PPT or CCNR")
    if not claimed and bp.d == 2 and ev.ppt:
        ev.notes.append("claimed entangled but PPT in d=2, hence separable")
    if not claimed and (not ev.ppt or ev.ccnr > 1 + 1e-10):
        ev.notes.append("entanglement confirmed by " + ("PPT" if not ev.ppt else "CCNR"))
    return ev


def delta_evidence(pi: Sequence[float], k: int = 0) -> SeparabilityEvidence:
    """Single-row distributions are claimed separable iff π is uniform."""
    pi = _simplex(pi, "pi")
    d = pi.size
    uniform = bool(np.allclose(pi, 1.0 / d, atol=1e-12, rtol=0))
    return _evidence(delta_distribution(d, k, pi), uniform, "delta distribution")


def product_evidence(q: Sequence[float], p: Sequence[float]) -> SeparabilityEvidence:
    """Product distributions are claimed separable iff p is uniform."""
    p = _simplex(p, "p")
    d = p.size
    uniform = bool(np.allclose(p, 1.0 / d, atol=1e-12, rtol=0))
    return _evidence(product_distribution(d, q, p), uniform, "product distribution")


Point = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True)
class LatticeSubset:
    """Points (m, n) of the lattice, m and n being N-tuples with entries in 0..d-1."""

    d: int
    N: int
    members: Tuple[Point, ...]

    def __post_init__(self):
        members = tuple((tuple(int(x) for x in m), tuple(int(x) for x in n)) for m, n in self.members)
        if not members:
            raise ValueError("lattice subset is empty")
        if len(set(members)) != len(members):
            raise ValueError("lattice subset has duplicate points")
        for m, n in members:
            if len(m) != self.N or len(n) != self.N:
                raise ValueError(f"point {(m, n)} does not have {self.N} components")
            if any(not 0 <= x < self.d for x in m + n):
                raise ValueError(f"point {(m, n)} out of range for d={self.d}")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, d: int, N: int) -> "LatticeSubset":
        idx = list(itertools.product(range(d), repeat=N))
        return cls(d, N, tuple((m, n) for m in idx for n in idx))


def lattice_weyl(d: int, m: Sequence[int], n: Sequence[int]) -> np.ndarray:
    """``U_mn = U_{m1 n1} ⊗ ... ⊗ U_{mN nN}``."""
    U = np.ones((1, 1), dtype=np.complex128)
    for mi, ni in zip(m, n):
        U = np.kron(U, belldiag.weyl(d, mi, ni))
    return U


def lattice_state(ls: LatticeSubset, max_dim2: Optional[int] = None) -> np.ndarray:
    """``rho_I = (1/|I|) sum_{(m,n) in I} P_mn`` on C^D ⊗ C^D, D = d^N."""
    cap = LATTICE_MAX_DIM2 if max_dim2 is None else max_dim2
    D = ls.d ** ls.N
    if D * D > cap:
        raise DimensionError(f"lattice state has D^2 = {D * D} > cap {cap}")
    psi_plus = belldiag.max_entangled_vector(D)
    rho = np.zeros((D * D, D * D), dtype=np.complex128)
    I = np.eye(D)
    for m, n in ls.members:
        psi = np.kron(I, lattice_weyl(ls.d, m, n)) @ psi_plus
        rho += np.outer(psi, psi.conj())
    return rho / len(ls.members)


def lattice_is_ppt(ls: LatticeSubset, tol: float = matcore.PSD_TOL) -> bool:
    D = ls.d ** ls.N
    return matcore.is_psd(matcore.brute_partial_transpose(lattice_state(ls), D), tol)
