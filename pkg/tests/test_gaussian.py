import numpy as np
import pytest

from cubicsim import (
    DensityMatrix,
    GaussianParams,
    SearchConfig,
    TruncationError,
    apply,
    apply_gaussian,
    best_gaussian_fidelity,
    displacement_op,
    expect,
    fidelity,
    gaussian_unitary,
    inner,
    number_operator,
    orbit_fidelity,
    quadrature,
    rotation_op,
    squeeze_op,
    unwind,
)
from cubicsim.fock import FockOperator
from cubicsim.states import coherent, cubic_phase_state, photon_added_coherent, vacuum

D = 64

FAST = SearchConfig(disp_bound=1.5, disp_step=0.5, squeeze_max=0.4,
                    squeeze_step=0.2, angle_step=np.pi / 2, refinements=1)


def _unitarity_defect(u: np.ndarray) -> float:
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def test_displacement_zero_is_identity():
    np.testing.assert_allclose(displacement_op(0.0, 16).mat, np.eye(16),
                               atol=1e-12)


def test_displacement_generates_coherent_state():
    d_op = displacement_op(0.5, D)
    got = apply(d_op, vacuum(D))
    want = coherent(0.5, D)
    assert abs(inner(want, got)) ** 2 > 1 - 1e-10


def test_displacement_group_inverse():
    alpha = 0.7 - 0.3j
    prod = displacement_op(alpha, D).mat @ displacement_op(-alpha, D).mat
    assert np.abs(prod - np.eye(D)).max() < 1e-9


def test_displacement_truncation_error():
    with pytest.raises(TruncationError):
        displacement_op(3.0, 12)


def test_squeeze_zero_is_identity():
    np.testing.assert_allclose(squeeze_op(0.0, 1.2, 16).mat, np.eye(16),
                               atol=1e-14)


def test_squeeze_vacuum_variance():
    r = 0.5
    sq = apply(squeeze_op(r, 0.0, D), vacuum(D))
    x = quadrature(0.0, D)
    x2 = FockOperator(x.mat @ x.mat)
    assert expect(sq, x2).real == pytest.approx(np.exp(-2 * r), abs=1e-6)


def test_squeezed_vacuum_has_no_odd_components():
    sq = apply(squeeze_op(0.6, 0.9, D), vacuum(D))
    assert np.abs(sq.amps[1::2]).max() < 1e-12


def test_squeezed_vacuum_closed_form_amplitudes():
    # c_2m = (-e^{i phi} tanh r)^m sqrt((2m)!)/(2^m m!) / sqrt(cosh r)
    from scipy.special import gammaln

    r, phi = 0.5, 0.7
    sq = apply(squeeze_op(r, phi, D), vacuum(D))
    m = np.arange(D // 2)
    log_mag = (0.5 * gammaln(2 * m + 1) - m * np.log(2.0) - gammaln(m + 1)
               + m * np.log(np.tanh(r)) - 0.5 * np.log(np.cosh(r)))
    expected = np.exp(log_mag) * (-np.exp(1j * phi)) ** m
    np.testing.assert_allclose(sq.amps[::2], expected, atol=1e-9)


def test_squeeze_truncation_guard():
    with pytest.raises(TruncationError):
        squeeze_op(2.0, 0.0, 8)


def test_rotation_phases_fock_states():
    rot = rotation_op(0.3, 8).mat
    np.testing.assert_allclose(np.diag(rot), np.exp(-0.3j * np.arange(8)))


@pytest.mark.parametrize("alpha,r,phi,t", [
    (0.5, 0.0, 0.0, 0.0),
    (0.3 - 0.4j, 0.5, 1.1, 0.7),
    (-1.0j, 0.8, -2.0, -0.5),
])
def test_generators_are_unitary(alpha, r, phi, t):
    assert _unitarity_defect(displacement_op(alpha, D).mat) < 1e-9
    assert _unitarity_defect(squeeze_op(r, phi, D).mat) < 1e-9
    assert _unitarity_defect(rotation_op(t, D).mat) < 1e-12
    assert _unitarity_defect(
        gaussian_unitary(GaussianParams(alpha, r, phi, t), D).mat) < 1e-9


def test_apply_gaussian_identity():
    st = coherent(0.4, D)
    out = apply_gaussian(GaussianParams.identity(), st)
    np.testing.assert_allclose(out.amps, st.amps, atol=1e-14)


def test_apply_gaussian_displacement_only_gives_coherent():
    out = apply_gaussian(GaussianParams(disp=0.5), vacuum(D))
    assert abs(inner(coherent(0.5, D), out)) ** 2 > 1 - 1e-10


def test_apply_then_inverse_returns_original():
    params = GaussianParams(0.4 - 0.2j, 0.3, 1.0, 0.6)
    st = photon_added_coherent(0.3j, 1, D)
    fwd = apply_gaussian(params, st)
    # inverse is R(-rot) S(r, phi+pi) D(-disp), applied in reverse order
    v = displacement_op(-params.disp, D).mat @ fwd.amps
    v = squeeze_op(params.squeeze_r, params.squeeze_phi + np.pi, D).mat @ v
    v = rotation_op(-params.rot, D).mat @ v
    assert abs(np.vdot(st.amps, v)) ** 2 > 1 - 1e-9


def test_gaussian_params_validation():
    with pytest.raises(ValueError):
        GaussianParams(squeeze_r=-0.1)
    p = GaussianParams(rot=3 * np.pi)
    assert -np.pi < p.rot <= np.pi


def test_unwind_identity_is_noop():
    rho = DensityMatrix.from_state(coherent(0.3, D))
    out = unwind(rho, GaussianParams.identity())
    np.testing.assert_allclose(out.mat, rho.mat, atol=1e-14)


def test_unwind_removes_displacement():
    alpha = 0.8 - 0.1j
    rho = DensityMatrix.from_state(coherent(alpha, D))
    out = unwind(rho, GaussianParams(disp=alpha))
    assert out.mat[0, 0].real > 1 - 1e-8
    assert np.trace(out.mat).real == pytest.approx(1.0, abs=1e-9)


def test_unwind_preserves_trace():
    rho = DensityMatrix.from_state(photon_added_coherent(-0.97j, 3, D))
    out = unwind(rho, GaussianParams(0.5 - 1.0j, 0.4, 0.3, 1.2))
    assert np.trace(out.mat).real == pytest.approx(1.0, abs=1e-9)


def test_orbit_self_fidelity_is_near_one():
    cub = cubic_phase_state(0.4, 0.0, D).state
    norm_sq = float(np.sum(np.abs(cub.amps) ** 2))
    rho = DensityMatrix(np.outer(cub.amps, cub.amps.conj()) / norm_sq)
    fit = orbit_fidelity(rho, 0.4, 0.0, FAST)
    # limited by the reference's own truncation tail, not by the search
    assert fit.fidelity >= norm_sq - 1e-6
    assert abs(fit.params.disp) < 1e-9
    assert fit.params.squeeze_r == 0.0


def test_refinements_never_decrease_fidelity():
    rho = DensityMatrix.from_state(photon_added_coherent(-0.97j, 3, 40))
    base = dict(disp_bound=3.0, disp_step=0.5, squeeze_max=0.4,
                squeeze_step=0.2, angle_step=np.pi / 4)
    prev = -1.0
    for refinements in (0, 1, 2, 3):
        fit = orbit_fidelity(rho, 0.4, 0.0,
                             SearchConfig(**base, refinements=refinements))
        assert fit.fidelity >= prev - 1e-12
        prev = fit.fidelity


def test_orbit_fidelity_invariant_under_grid_contained_gaussian():
    # conjugating the target by an on-grid rotation or displacement shifts
    # the argmax but not the maximum
    rho = DensityMatrix.from_state(photon_added_coherent(-0.97j, 3, 40))
    cfg = SearchConfig(disp_bound=3.0, disp_step=0.5, squeeze_max=0.4,
                       squeeze_step=0.2, angle_step=np.pi / 4, refinements=0)
    f0 = orbit_fidelity(rho, 0.4, 0.0, cfg).fidelity
    for g in (GaussianParams(rot=np.pi / 2), GaussianParams(disp=0.5)):
        u = gaussian_unitary(g, 40).mat
        rho_g = DensityMatrix(u @ rho.mat @ u.conj().T)
        f1 = orbit_fidelity(rho_g, 0.4, 0.0, cfg).fidelity
        assert f1 == pytest.approx(f0, abs=1e-6)


def test_orbit_ties_break_lexicographically():
    # vacuum target, gamma = 0: every rotation ties; smallest node must win
    rho = DensityMatrix.from_state(vacuum(16))
    cfg = SearchConfig(disp_bound=0.5, disp_step=0.5, squeeze_max=0.2,
                       squeeze_step=0.2, angle_step=np.pi / 2, refinements=0)
    fit = orbit_fidelity(rho, 0.0, 0.0, cfg)
    assert fit.fidelity == pytest.approx(1.0, abs=1e-12)
    assert fit.params.disp == 0.0
    assert fit.params.squeeze_r == 0.0
    # first angle on the (-pi, pi] grid with step pi/2 is -pi/2
    assert fit.params.squeeze_phi == pytest.approx(-np.pi / 2)
    assert fit.params.rot == pytest.approx(-np.pi / 2)


def test_best_gaussian_fidelity_gamma_zero_is_one():
    assert best_gaussian_fidelity(0.0, 0.0, 16, FAST) == pytest.approx(1.0, abs=1e-9)


def test_best_gaussian_fidelity_decreases_with_gamma():
    cfg = SearchConfig(disp_bound=2.0, disp_step=0.25, squeeze_max=0.8,
                       squeeze_step=0.1, angle_step=np.pi / 8, refinements=1)
    vals = [best_gaussian_fidelity(g, 0.0, 48, cfg) for g in (0.1, 0.2, 0.3, 0.4)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_empty_grid_is_a_config_error():
    with pytest.raises(ValueError):
        SearchConfig(disp_step=0.0)


def test_search_config_dict_round_trip():
    cfg = SearchConfig(disp_bound=2.0, refinements=1)
    assert SearchConfig.from_dict(cfg.to_dict()) == cfg
