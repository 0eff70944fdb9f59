import math

import numpy as np
import pytest

from chiral_qfim.channel import (
    COORDS_ALPHA_PHI,
    COORDS_CHIRAL,
    ChiralParams,
    DomainError,
    RatePicture,
    apply_channel_kraus,
    apply_channel_rk4,
    channel_alpha_derivative,
    channel_phi_derivative,
    coordinate_jacobian,
    noon_output_analytic,
)
from chiral_qfim.fock import (
    NOON_HV,
    SINGLE_PHOTON_H,
    FockSpace,
    TwoModeState,
    coherent_product_state,
    default_coherent_space,
    hv_to_pm_state,
    mode_operators,
)


def random_density(rng, space):
    a = rng.standard_normal((space.dim, space.dim)) + 1j * rng.standard_normal(
        (space.dim, space.dim)
    )
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    return TwoModeState(space=space, rho=rho, label="random")


def test_params_validation():
    p = ChiralParams(0.3, 0.1, 0.7, 0.2)
    assert p.x_s == pytest.approx(0.2)
    assert p.x_d == pytest.approx(0.1)
    assert p.delta == pytest.approx(0.5)
    assert p.sigma == pytest.approx(0.9)
    assert p.eta_plus == pytest.approx(0.7)
    with pytest.raises(DomainError):
        ChiralParams(1.0, 0.0)
    with pytest.raises(DomainError):
        ChiralParams(-0.1, 0.0)
    with pytest.raises(DomainError):
        ChiralParams(0.1, 0.2, math.nan, 0.0)


def test_from_chiral_round_trip():
    p = ChiralParams.from_chiral(x_d=0.1, x_s=0.3, delta=0.5, sigma=1.1)
    assert p.alpha_plus == pytest.approx(0.4)
    assert p.alpha_minus == pytest.approx(0.2)
    assert p.phi_plus == pytest.approx(0.8)
    assert p.phi_minus == pytest.approx(0.3)
    again = ChiralParams.from_chiral(p.x_d, p.x_s, p.delta, p.sigma)
    for name in ("alpha_plus", "alpha_minus", "phi_plus", "phi_minus"):
        assert getattr(again, name) == pytest.approx(getattr(p, name), abs=1e-15)


def test_rate_picture_round_trip():
    for t in (1.0, 0.5, 3.0):
        p = ChiralParams(0.6, 0.25, 1.3, -0.4)
        r = p.to_rates(t=t)
        assert r.gamma_plus == pytest.approx(-math.log(0.4) / (2 * t))
        back = r.to_params()
        for name in ("alpha_plus", "alpha_minus", "phi_plus", "phi_minus"):
            assert getattr(back, name) == pytest.approx(getattr(p, name), abs=1e-12)


def test_rate_picture_validation():
    with pytest.raises(DomainError):
        RatePicture(-0.1, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        RatePicture(0.1, 0.1, 0.0, 0.0, t=0.0)
    with pytest.raises(DomainError):
        ChiralParams(0.1, 0.1).to_rates(t=-1.0)


def test_coordinate_jacobian_blocks():
    j = coordinate_jacobian(COORDS_ALPHA_PHI, COORDS_CHIRAL)
    expected = np.array(
        [
            [0.5, -0.5, 0, 0],
            [0.5, 0.5, 0, 0],
            [0, 0, 1, -1],
            [0, 0, 1, 1],
        ]
    )
    np.testing.assert_allclose(j.matrix, expected, atol=0)
    j_inv = coordinate_jacobian(COORDS_CHIRAL, COORDS_ALPHA_PHI)
    np.testing.assert_allclose(j.matrix @ j_inv.matrix, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(
        coordinate_jacobian(COORDS_CHIRAL, COORDS_CHIRAL).matrix, np.eye(4), atol=0
    )
    with pytest.raises(ValueError):
        coordinate_jacobian("polar", COORDS_CHIRAL)


def test_kraus_identity_channel():
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    out = apply_channel_kraus(state, ChiralParams(0.0, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(out.rho, state.rho, atol=1e-15)


def test_kraus_coherent_to_coherent():
    # dropped input coherences across the cutoff have magnitude ~ sqrt(tail)
    # and partially re-enter the kept block under damping, so the entrywise
    # agreement scales with sqrt(budget); a tight budget makes the check sharp
    budget = 1e-13
    params = ChiralParams(0.3, 0.45, 0.7, -0.2)
    amp_plus, amp_minus = 0.8, 0.5 + 0.3j
    space, _ = default_coherent_space(amp_plus, amp_minus, budget=budget, cap=None)
    state = coherent_product_state(space, amp_plus, amp_minus, truncation_budget=budget)
    out = apply_channel_kraus(state, params)
    expected = coherent_product_state(
        space,
        amp_plus * math.sqrt(params.eta_plus) * np.exp(-1j * params.phi_plus),
        amp_minus * math.sqrt(params.eta_minus) * np.exp(-1j * params.phi_minus),
        truncation_budget=budget,
    )
    assert np.max(np.abs(out.rho - expected.rho)) <= 1e-7
    assert abs(out.trace() - state.trace()) <= 1e-12


def test_kraus_single_photon_example():
    space = FockSpace(1, 1)
    state = hv_to_pm_state(SINGLE_PHOTON_H, space)
    params = ChiralParams(0.6, 0.4, 0.3, 0.0)
    out = apply_channel_kraus(state, params)
    k10, k01, k00 = space.index(1, 0), space.index(0, 1), space.index(0, 0)
    assert out.rho[k10, k10].real == pytest.approx(0.2)
    assert out.rho[k01, k01].real == pytest.approx(0.3)
    assert out.rho[k00, k00].real == pytest.approx(0.5)
    off = out.rho[k10, k01]
    assert abs(off) == pytest.approx(0.5 * math.sqrt(0.24))
    # off-diagonal carries e^{−iΔ} in this package's convention
    expected = 0.5 * math.sqrt(0.4 * 0.6) * np.exp(-1j * params.delta)
    assert off == pytest.approx(expected)
    out.validate_psd()


def test_rk4_identity_params():
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    out = apply_channel_rk4(state, ChiralParams(0.0, 0.0, 0.0, 0.0), steps=50)
    np.testing.assert_allclose(out.rho, state.rho, atol=1e-12)


def test_rk4_agrees_with_kraus_on_noon():
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    params = ChiralParams(0.3, 0.1, 0.7, 0.2)
    out_rk4 = apply_channel_rk4(state, params)
    out_kraus = apply_channel_kraus(state, params)
    assert np.max(np.abs(out_rk4.rho - out_kraus.rho)) <= 1e-8
    assert out_rk4.meta["rk4_trace_drift"] <= 1e-9
    assert out_rk4.meta["rk4_hermiticity_drift"] <= 1e-10
    assert "rk4_warning" not in out_rk4.meta


def test_rk4_single_mode_coherent_amplitude_decay():
    amp = 0.6
    space, _ = default_coherent_space(amp, 0.0)
    state = coherent_product_state(space, amp, 0.0)
    params = ChiralParams(0.4, 0.0, 0.5, 0.0)
    out = apply_channel_rk4(state, params, steps=400)
    ops = mode_operators(space)
    got = out.expectation(ops.a_plus)
    gamma = -math.log(1 - 0.4) / 2.0
    expected = amp * np.exp(-1j * 0.5 - gamma)
    assert got == pytest.approx(expected, abs=1e-8)


def test_rk4_step_warning_metadata():
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    out = apply_channel_rk4(state, ChiralParams(0.9, 0.8, 2.5, 1.0), steps=2)
    assert "rk4_warning" in out.meta
    with pytest.raises(ValueError):
        apply_channel_rk4(state, ChiralParams(0.1, 0.1), steps=0)


def test_noon_analytic_lossless_limit():
    space = FockSpace(2, 2)
    params = ChiralParams(0.0, 0.0, 0.45, 0.1)
    out = noon_output_analytic(params, space)
    state = hv_to_pm_state(NOON_HV, space)
    k20, k02 = space.index(2, 0), space.index(0, 2)
    assert out.rho[k20, k20] == pytest.approx(0.5)
    assert out.rho[k02, k20] == pytest.approx(-0.5 * np.exp(2j * params.delta))
    # applying the channel to the projector gives the same matrix
    np.testing.assert_allclose(out.rho, apply_channel_kraus(state, params).rho, atol=1e-14)


def test_noon_analytic_vacuum_weight():
    space = FockSpace(2, 2)
    out = noon_output_analytic(ChiralParams(0.5, 0.5, 0.0, 0.0), space)
    k00 = space.index(0, 0)
    assert out.rho[k00, k00].real == pytest.approx(0.25)


def test_noon_analytic_matches_kraus_on_grid():
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    worst = 0.0
    for ap in np.linspace(0.0, 0.8, 5):
        for am in np.linspace(0.0, 0.8, 5):
            for delta in np.linspace(-1.5, 2.5, 5):
                params = ChiralParams(ap, am, delta, 0.0)
                direct = noon_output_analytic(params, space)
                oracle = apply_channel_kraus(state, params)
                worst = max(worst, np.max(np.abs(direct.rho - oracle.rho)))
    assert worst <= 1e-12


def test_complete_positivity_spot_check():
    rng = np.random.default_rng(17)
    space = FockSpace(3, 2)
    for _ in range(5):
        state = random_density(rng, space)
        params = ChiralParams(
            rng.uniform(0, 0.95), rng.uniform(0, 0.95), rng.uniform(-2, 2), rng.uniform(-2, 2)
        )
        out = apply_channel_kraus(state, params)
        assert np.linalg.eigvalsh(out.rho)[0] >= -1e-10
        assert abs(out.trace() - 1.0) <= 1e-12


def test_semigroup_composition():
    rng = np.random.default_rng(29)
    space = FockSpace(3, 3)
    state = random_density(rng, space)
    first = ChiralParams(0.3, 0.15, 0.4, -0.1)
    second = ChiralParams(0.2, 0.5, 0.25, 0.7)
    combined = ChiralParams(
        1 - first.eta_plus * second.eta_plus,
        1 - first.eta_minus * second.eta_minus,
        first.phi_plus + second.phi_plus,
        first.phi_minus + second.phi_minus,
    )
    two_step = apply_channel_kraus(apply_channel_kraus(state, first), second)
    one_step = apply_channel_kraus(state, combined)
    assert np.max(np.abs(two_step.rho - one_step.rho)) <= 1e-10


def test_photon_number_decay_all_inputs():
    params = ChiralParams(0.35, 0.6, 0.3, 0.8)
    space = FockSpace(2, 2)
    inputs = [
        hv_to_pm_state(SINGLE_PHOTON_H, space),
        hv_to_pm_state(NOON_HV, space),
    ]
    cspace, _ = default_coherent_space(0.7, 0.4)
    inputs.append(coherent_product_state(cspace, 0.7, 0.4))
    for state in inputs:
        ops = mode_operators(state.space)
        out = apply_channel_kraus(state, params)
        for n_op, eta in ((ops.n_plus, params.eta_plus), (ops.n_minus, params.eta_minus)):
            n_in = state.expectation(n_op).real
            n_out = out.expectation(n_op).real
            assert abs(n_out - eta * n_in) <= 1e-10


def finite_difference_alpha(state, params, mode, h=1e-5):
    kw = dict(
        alpha_plus=params.alpha_plus,
        alpha_minus=params.alpha_minus,
        phi_plus=params.phi_plus,
        phi_minus=params.phi_minus,
    )
    name = f"alpha_{mode}"
    alpha = kw[name]
    if alpha >= h:
        hi = dict(kw, **{name: alpha + h})
        lo = dict(kw, **{name: alpha - h})
        return (
            apply_channel_kraus(state, ChiralParams(**hi)).rho
            - apply_channel_kraus(state, ChiralParams(**lo)).rho
        ) / (2 * h)
    # second-order one-sided stencil at the α = 0 boundary
    f0 = apply_channel_kraus(state, ChiralParams(**kw)).rho
    f1 = apply_channel_kraus(state, ChiralParams(**dict(kw, **{name: alpha + h}))).rho
    f2 = apply_channel_kraus(state, ChiralParams(**dict(kw, **{name: alpha + 2 * h}))).rho
    return (-3 * f0 + 4 * f1 - f2) / (2 * h)


@pytest.mark.parametrize("mode", ["plus", "minus"])
def test_alpha_derivative_matches_finite_difference(mode):
    params = ChiralParams(0.3, 0.45, 0.6, -0.3)
    space = FockSpace(2, 2)
    states = [hv_to_pm_state(NOON_HV, space), hv_to_pm_state(SINGLE_PHOTON_H, space)]
    cspace, _ = default_coherent_space(0.8, 0.5)
    states.append(coherent_product_state(cspace, 0.8, 0.5))
    for state in states:
        exact = channel_alpha_derivative(state, params, mode)
        approx = finite_difference_alpha(state, params, mode)
        assert np.max(np.abs(exact - approx)) <= 1e-8
        assert abs(np.trace(exact)) <= 1e-9
        assert np.max(np.abs(exact - exact.conj().T)) <= 1e-10


def test_alpha_derivative_at_zero_loss():
    params = ChiralParams(0.0, 0.2, 0.1, 0.0)
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    exact = channel_alpha_derivative(state, params, "plus")
    approx = finite_difference_alpha(state, params, "plus")
    assert np.max(np.abs(exact - approx)) <= 1e-7


@pytest.mark.parametrize("mode", ["plus", "minus"])
def test_phi_derivative_matches_finite_difference(mode):
    params = ChiralParams(0.3, 0.45, 0.6, -0.3)
    space = FockSpace(2, 2)
    state = hv_to_pm_state(NOON_HV, space)
    out = apply_channel_kraus(state, params)
    exact = channel_phi_derivative(out, mode)
    h = 1e-6
    name = f"phi_{mode}"
    kw = dict(
        alpha_plus=0.3, alpha_minus=0.45, phi_plus=0.6, phi_minus=-0.3
    )
    hi = dict(kw, **{name: kw[name] + h})
    lo = dict(kw, **{name: kw[name] - h})
    approx = (
        apply_channel_kraus(state, ChiralParams(**hi)).rho
        - apply_channel_kraus(state, ChiralParams(**lo)).rho
    ) / (2 * h)
    assert np.max(np.abs(exact - approx)) <= 1e-8
    assert abs(np.trace(exact)) <= 1e-12
