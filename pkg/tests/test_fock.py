import numpy as np
import pytest

from cubicsim import (
    DensityMatrix,
    FockOperator,
    StateVector,
    annihilation,
    apply,
    creation,
    dagger,
    expect,
    expm_hermitian,
    inner,
    normalize,
    number_operator,
    position_wavefunctions,
    quadrature,
)
from cubicsim.states import coherent, fock, vacuum


def test_annihilation_entries():
    a = annihilation(2).mat
    assert a[0, 1] == 1.0
    assert np.count_nonzero(a) == 1

    a4 = annihilation(4).mat
    np.testing.assert_allclose(a4[2, 3], np.sqrt(3))


def test_annihilation_rejects_small_dim():
    with pytest.raises(ValueError):
        annihilation(1)


def test_coherent_is_annihilation_eigenvector():
    d = 64
    alpha = 0.5
    c = coherent(alpha, d)
    out = apply(annihilation(d), c)
    np.testing.assert_allclose(out.amps, alpha * c.amps, atol=1e-8)


@pytest.mark.parametrize("dim", [2, 3, 8, 40])
def test_commutator_truncated(dim):
    a = annihilation(dim).mat
    comm = a @ a.conj().T - a.conj().T @ a
    # truncation artifact is confined to the last row/column
    np.testing.assert_allclose(comm[:dim - 1, :dim - 1], np.eye(dim - 1),
                               atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.3, np.pi / 2, np.pi, 2.1])
def test_quadrature_vacuum_variance_is_one(theta):
    d = 16
    xq = quadrature(theta, d)
    x2 = FockOperator(xq.mat @ xq.mat)
    assert expect(vacuum(d), x2).real == pytest.approx(1.0, abs=1e-12)


def test_quadrature_hermitian_and_pi_flip():
    xq = quadrature(0.0, 12)
    assert np.abs(xq.mat - xq.mat.conj().T).max() < 1e-12
    np.testing.assert_allclose(quadrature(np.pi, 12).mat, -xq.mat, atol=1e-12)


def test_x_cubed_on_vacuum_matches_three_one_plus_sqrt6_three():
    d = 8
    x = quadrature(0.0, d).mat
    v = (x @ x @ x)[:, 0]
    expected = np.zeros(d, dtype=complex)
    expected[1] = 3.0
    expected[3] = np.sqrt(6)
    np.testing.assert_allclose(v, expected, atol=1e-12)


def test_expm_zero_scale_is_identity():
    gen = quadrature(0.0, 10)
    u = expm_hermitian(gen, 0.0)
    np.testing.assert_allclose(u.mat, np.eye(10), atol=1e-14)


def test_expm_number_operator_is_parity():
    d = 10
    u = expm_hermitian(number_operator(d), np.pi)
    out = apply(u, fock(1, d))
    np.testing.assert_allclose(out.amps, -fock(1, d).amps, atol=1e-12)


@pytest.mark.parametrize("g,expected,tol", [
    # the quartic correction carries <x^12> = 10395, so at g = 0.05 the
    # overlap is already visibly below 1; value frozen from the position-
    # space quadrature oracle
    (0.05, 0.989213, 1e-5),
    (0.02, 0.999622, 1e-5),
])
def test_expm_perturbative_limit_of_cubic_generator(g, expected, tol):
    d = 128
    x = quadrature(0.0, d).mat
    x3 = x @ x @ x
    u = expm_hermitian(FockOperator((x3 + x3.conj().T) / 2), g)
    got = apply(u, vacuum(d))
    first = np.zeros(d, dtype=complex)
    first[0] = 1.0
    first[1] = 3j * g
    first[3] = np.sqrt(6) * 1j * g
    first /= np.linalg.norm(first)
    overlap = abs(np.vdot(first, got.amps)) ** 2
    assert overlap == pytest.approx(expected, abs=tol)
    if g <= 0.02:
        assert overlap > 0.999


def test_expm_rejects_non_hermitian():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1] = 1.0
    with pytest.raises(ValueError):
        expm_hermitian(FockOperator(m), 1.0)


@pytest.mark.parametrize("s,t", [(0.2, 0.5), (-0.3, 1.1)])
def test_expm_one_parameter_group(s, t):
    gen = quadrature(0.4, 24)
    u_st = expm_hermitian(gen, s).mat @ expm_hermitian(gen, t).mat
    u_sum = expm_hermitian(gen, s + t).mat
    assert np.abs(u_st - u_sum).max() < 1e-9


def test_dagger_of_expm_inverts_scale():
    gen = quadrature(1.3, 24)
    lhs = dagger(expm_hermitian(gen, 0.7)).mat
    rhs = expm_hermitian(gen, -0.7).mat
    assert np.abs(lhs - rhs).max() < 1e-10


def test_expm_unitarity():
    x = quadrature(0.0, 64).mat
    x3 = x @ x @ x
    u = expm_hermitian(FockOperator((x3 + x3.conj().T) / 2), 0.4).mat
    assert np.abs(u.conj().T @ u - np.eye(64)).max() < 1e-10


def test_inner_orthonormal_basis():
    assert inner(vacuum(6), vacuum(6)) == pytest.approx(1.0)
    assert inner(vacuum(6), fock(1, 6)) == pytest.approx(0.0)


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner(vacuum(4), vacuum(5))


def test_expect_coherent_mean_photon_number():
    # brute-force Poisson sum as the oracle
    from scipy.special import gammaln

    alpha, d = 0.5, 64
    c = coherent(alpha, d)
    n = np.arange(d)
    poisson = np.exp(-alpha ** 2 + 2 * n * np.log(alpha) - gammaln(n + 1))
    assert expect(c, number_operator(d)).real == pytest.approx(
        float((n * poisson).sum()), abs=1e-10)
    assert expect(c, number_operator(d)).real == pytest.approx(0.25, abs=1e-10)


def test_normalize_rejects_zero_vector():
    with pytest.raises(ValueError):
        normalize(StateVector(np.zeros(4)))


def test_density_matrix_validate():
    rho = DensityMatrix.from_state(coherent(0.3, 16))
    rho.validate()
    bad = DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        bad.validate()


def test_values_are_immutable():
    v = vacuum(4)
    with pytest.raises(ValueError):
        v.amps[0] = 2.0


def test_position_wavefunctions_orthonormal():
    xs = np.arange(-30, 30, 0.01)
    h = position_wavefunctions(12, xs)
    gram = h @ h.T * 0.01
    np.testing.assert_allclose(gram, np.eye(12), atol=1e-7)


def test_position_wavefunction_vacuum_variance():
    xs = np.arange(-30, 30, 0.01)
    h = position_wavefunctions(1, xs)
    dens = h[0] ** 2
    assert (dens * 0.01).sum() == pytest.approx(1.0, abs=1e-8)
    assert (xs ** 2 * dens * 0.01).sum() == pytest.approx(1.0, abs=1e-8)


def test_creation_is_dagger_of_annihilation():
    np.testing.assert_allclose(creation(9).mat, annihilation(9).mat.conj().T)
