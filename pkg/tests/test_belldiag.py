import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbell import belldiag, circulant, families, matcore
from qbell.belldiag import BellProbabilities
from qbell.errors import DimensionError, NotBellDiagonalError

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def simplex(rng, d, alpha=1.0):
    return BellProbabilities(rng.dirichlet(np.full(d * d, alpha)).reshape(d, d))


def test_weyl_orthogonality():
    d = 3
    U = [belldiag.weyl(d, m, n) for m in range(d) for n in range(d)]
    G = np.array([[np.trace(A @ B.conj().T) for B in U] for A in U])
    np.testing.assert_allclose(G, d * np.eye(d * d), atol=1e-14)


def test_qubit_weyl_operators():
    s1 = np.array([[0, 1], [1, 0]])
    s2 = np.array([[0, -1j], [1j, 0]])
    s3 = np.diag([1, -1])
    np.testing.assert_allclose(belldiag.weyl(2, 0, 1), s1)
    np.testing.assert_allclose(belldiag.weyl(2, 1, 0), s3)
    np.testing.assert_allclose(belldiag.weyl(2, 1, 1), -1j * s2)


def test_magic_basis_orthonormal_and_complete():
    for d in (2, 3, 4):
        V = belldiag.magic_basis(d)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(d * d), atol=1e-14)
        P = sum(belldiag.sigma_projector(d, n) for n in range(d))
        np.testing.assert_allclose(P, np.eye(d * d), atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=5), seeds)
def test_fourier_blocks_equal_projector_sum(d, seed):
    bp = simplex(np.random.default_rng(seed), d)
    direct = sum(bp.p[m, n] * belldiag.bell_projector(d, m, n) for m in range(d) for n in range(d))
    np.testing.assert_allclose(belldiag.to_dense(bp), direct, atol=1e-15)
    H = belldiag.fourier_matrix(d)
    blocks = belldiag.to_circulant(bp).blocks
    for n in range(d):
        np.testing.assert_allclose(blocks[n], H @ np.diag(bp.p[:, n]) @ H.conj().T, atol=1e-15)
    back = belldiag.from_circulant(belldiag.to_circulant(bp))
    np.testing.assert_allclose(back.p, bp.p, atol=1e-15)


def test_from_circulant_rejects_generic_states():
    cs = circulant.random_circulant(3, np.random.default_rng(0))
    with pytest.raises(NotBellDiagonalError):
        belldiag.from_circulant(cs)


def test_probabilities_validation():
    with pytest.raises(ValueError):
        BellProbabilities([[0.5, 0.6], [0.0, -0.1]])
    with pytest.raises(ValueError):
        BellProbabilities([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(DimensionError):
        BellProbabilities([[1.0, 0.0]])
    bp = belldiag.parse_probabilities([0.6, 0.2, 0.1, 0.1])
    assert bp.d == 2 and bp.p[0, 0] == 0.6
    with pytest.raises(DimensionError):
        belldiag.parse_probabilities([0.5, 0.5], d=2)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_orbits_with_corrected_exponent(d):
    rng = np.random.default_rng(d)
    check = belldiag.tilde_orbit_check(simplex(rng, d))
    assert check.ok
    assert sorted(sum(check.orbits, [])) == list(range(d))


@pytest.mark.parametrize("d", [3, 5])
def test_plain_shift_power_fails_for_odd_d(d):
    # ã^(n) = S^n ã^(0) S^-n holds only with the exponent halved mod d
    rng = np.random.default_rng(10 + d)
    T = belldiag.tilde_blocks(simplex(rng, d))
    S = belldiag.shift(d, 1)
    assert not np.allclose(T[1], S @ T[0] @ S.conj().T)


@pytest.mark.parametrize("d", [2, 4, 6])
def test_even_d_orbit_shift_is_n_over_two(d):
    for n in range(d):
        assert belldiag.orbit_shift(d, n) == (n % 2, n // 2)


def test_qutrit_display_is_conjugate_of_tilde_block():
    bp = simplex(np.random.default_rng(3), 3)
    x, z = belldiag.qutrit_coordinates(bp)
    np.testing.assert_allclose(belldiag.qutrit_tilde0(x, z), belldiag.tilde_blocks(bp)[0].conj(), atol=1e-15)


def test_ququart_display_matches_spectra():
    rng = np.random.default_rng(4)
    for _ in range(20):
        bp = simplex(rng, 4)
        a0, a1 = belldiag.ququart_tilde(*belldiag.ququart_coordinates(bp))
        T = belldiag.tilde_blocks(bp)
        np.testing.assert_allclose(np.linalg.eigvalsh(a0), np.linalg.eigvalsh(T[0]), atol=1e-14)
        np.testing.assert_allclose(np.linalg.eigvalsh(a1), np.linalg.eigvalsh(T[1]), atol=1e-14)


def test_ququart_and_qutrit_verdicts_match_oracle():
    rng = np.random.default_rng(5)
    for _ in range(300):
        bp = simplex(rng, 4, alpha=0.5)
        assert belldiag.ppt_d4(bp) == belldiag.ppt_oracle(bp)
    for _ in range(300):
        bp = simplex(rng, 3, alpha=0.5)
        r = belldiag.ppt_d3(bp)
        assert r.eigen_psd == belldiag.ppt_oracle(bp)
        # C1 and C2 are necessary for PPT
        if r.eigen_psd:
            assert r.c1 and r.c2


def test_ppt_d2_known_points():
    assert belldiag.ppt_d2(BellProbabilities.uniform(2))
    assert belldiag.ppt_d2(belldiag.parse_probabilities([0.5, 0.5, 0, 0]))
    assert not belldiag.ppt_d2(belldiag.parse_probabilities([0.6, 0.2, 0.1, 0.1]))
    with pytest.raises(DimensionError):
        belldiag.ppt_d2(BellProbabilities.uniform(3))


def test_kraus_form_matches_circulant_channel():
    rng = np.random.default_rng(6)
    for d in (2, 3, 4):
        bp = simplex(rng, d)
        cs = belldiag.to_circulant(bp)
        X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        np.testing.assert_allclose(belldiag.kraus_apply(bp, X), circulant.channel_apply(cs, X), atol=1e-14)
        np.testing.assert_allclose(
            belldiag.kraus_dual_apply(bp, X), circulant.channel_dual_apply(cs, X), atol=1e-14
        )


def test_is_ppt_bell_on_extremes():
    assert belldiag.is_ppt_bell(BellProbabilities.uniform(4))
    p = np.zeros((3, 3))
    p[0, 0] = 1
    assert not belldiag.is_ppt_bell(BellProbabilities(p))
    assert matcore.min_eigenvalue(belldiag.tilde_blocks(BellProbabilities(p))[0]) == pytest.approx(-1 / 3)


def test_qutrit_conditions_agree_with_eigenvalues_off_the_boundary():
    rng = np.random.default_rng(7)
    for alpha in (0.3, 1.0, 3.0):
        for _ in range(500):
            assert belldiag.ppt_d3(simplex(rng, 3, alpha)).consistent


def test_ququart_gamma_state_matches_oracle():
    bp = families.rho_gamma(4, 0.7)
    assert belldiag.ppt_d4(bp) == belldiag.ppt_oracle(bp)
