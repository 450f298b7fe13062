import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_hermite, factorial

from pskit import packets, quartic, wigner
from pskit.packets import PhysConfig, make_gaussian
from pskit.quartic import QuarticParams
from pskit.wigner import PhaseSpaceGrid

from oracles import bilinear, fd_derivative, fd_polar, fock_psi_mp, hermite_classical

TIMES = (0.0, 0.4, 0.8, 1.2)


@pytest.fixture(scope="module")
def params():
    return QuarticParams()


@pytest.fixture(scope="module")
def state0(params):
    return quartic.initial_state(params)


def test_default_parameters(params):
    assert params.alpha == pytest.approx(3 / np.sqrt(2))
    assert params.lambda_hbar == pytest.approx(0.01)
    assert params.n_max == 46
    assert quartic.poisson_tail(params.alpha, params.n_max) < 1e-12


def test_coherent_vacuum_and_ground_coefficient(params):
    c = quartic.initial_state(params).coeffs
    assert c[0] == pytest.approx(np.exp(-2.25), rel=1e-14)
    assert c[0].real == pytest.approx(0.105399, abs=1e-6)
    vac = quartic.coherent_coefficients(0, 5).coeffs
    np.testing.assert_array_equal(vac, [1, 0, 0, 0, 0, 0])


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0, 4), phi=st.floats(0, 2 * np.pi))
def test_coherent_occupation_is_poisson(r, phi):
    alpha = r * np.exp(1j * phi)
    state = quartic.coherent_coefficients(alpha, quartic.default_n_max(alpha))
    w = np.abs(state.coeffs) ** 2
    n = np.arange(w.size)
    assert state.norm() == pytest.approx(1, abs=1e-12)
    assert np.sum(n * w) == pytest.approx(r * r, abs=1e-8)
    assert np.sum((n - r * r) ** 2 * w) == pytest.approx(r * r, abs=1e-8)
    # c_n against the closed form at extended precision
    with mp.workdps(30):
        a = mp.mpc(alpha.real, alpha.imag)
        for k in (0, 1, 7, w.size - 1):
            ref = mp.exp(-abs(a) ** 2 / 2) * a**k / mp.sqrt(mp.factorial(k))
            assert abs(complex(ref) - state.coeffs[k]) < 1e-14


def test_truncation_is_guarded():
    alpha = 3 / np.sqrt(2)
    with pytest.raises(ValueError, match="n_max"):
        quartic.coherent_coefficients(alpha, 10)
    with pytest.raises(ValueError, match="n_max"):
        QuarticParams(alpha=alpha, n_max=10)


def test_eigenenergies(params):
    assert quartic.eigenenergy(0, params) == 0
    assert quartic.eigenenergy(1, params) == pytest.approx(1.0)
    assert quartic.eigenenergy(2, params) == pytest.approx(2.02, rel=1e-14)
    cfg = PhysConfig(hbar=0.5, omega=2.0)
    p = QuarticParams(cfg=cfg, lambda_hbar=0.03)
    assert quartic.eigenenergy(3, p) == pytest.approx(0.5 * 2.0 * 3 + 0.5 * 0.03 * 6, rel=1e-14)
    with pytest.raises(ValueError):
        quartic.eigenenergy(-1, params)


def test_evolve_identity_at_zero(params, state0):
    np.testing.assert_array_equal(quartic.evolve(state0, params, 0.0).coeffs, state0.coeffs)


@pytest.mark.parametrize("t", [0.37, 2.0, 13.1])
def test_harmonic_limit_is_rotation(t):
    p = QuarticParams(lambda_hbar=0.0)
    state = quartic.evolve(quartic.initial_state(p), p, t)
    rotated = quartic.coherent_coefficients(p.alpha * np.exp(-1j * t), p.n_max)
    assert abs(quartic.overlap(rotated, state)) == pytest.approx(1, abs=1e-12)


def test_kerr_revival(params, state0):
    t = np.pi / params.lambda_hbar
    kerr = quartic.evolve(state0, params, t)
    harmonic_params = QuarticParams(lambda_hbar=0.0)
    harmonic = quartic.evolve(state0, harmonic_params, t)
    assert abs(quartic.overlap(harmonic, kerr)) == pytest.approx(1, abs=1e-10)


def test_norm_and_energy_conservation(params, state0):
    e0 = quartic.mean_energy(state0, params)
    for tT in TIMES + (7.3, 123.4):
        s = quartic.evolve(state0, params, tT * params.period)
        assert abs(s.norm() - state0.norm()) < 1e-12
        assert abs(quartic.mean_energy(s, params) - e0) < 1e-12


def test_hermite_values():
    phi, dphi = quartic.hermite_phi(5, np.array([0.0, 1.0]))
    assert phi[0, 0] == pytest.approx(np.pi**-0.25, rel=1e-15)
    assert phi[0, 0] == pytest.approx(0.751126, abs=1e-6)
    assert phi[1, 0] == 0.0
    # undo the normalization at xs = 1 to recover H_3(1) = 8 - 12
    h3 = phi[3, 1] * np.sqrt(2**3 * factorial(3) * np.sqrt(np.pi)) * np.exp(0.5)
    assert h3 == pytest.approx(-4.0, rel=1e-13)
    assert float(hermite_classical(3, mp.mpf(1))[3]) == -4.0


@pytest.mark.parametrize("n_max", [10, 60, 150])
def test_hermite_against_classical_polynomials(n_max):
    xs = np.linspace(-9, 9, 37)
    phi, dphi = quartic.hermite_phi(n_max, xs)
    for n in range(0, n_max + 1, max(1, n_max // 10)):
        with mp.workdps(50):
            ref = []
            for x in xs:
                H = hermite_classical(n, mp.mpf(x))[n]
                ref.append(float(H * mp.exp(-mp.mpf(x) ** 2 / 2)
                                 / mp.sqrt(2**n * mp.factorial(n) * mp.sqrt(mp.pi))))
        np.testing.assert_allclose(phi[n], ref, rtol=1e-9, atol=1e-13)
    # scipy's unnormalized polynomials as a second opinion at low order
    if n_max <= 60:
        n = 8
        ref = eval_hermite(n, xs) * np.exp(-xs**2 / 2) / np.sqrt(2**n * factorial(n) * np.sqrt(np.pi))
        np.testing.assert_allclose(phi[n], ref, rtol=1e-10, atol=1e-14)
    # derivative identity phi_n' = sqrt(n/2) phi_{n-1} - sqrt((n+1)/2) phi_{n+1}
    n = np.arange(1, n_max)[:, None]
    alt = np.sqrt(n / 2) * phi[:-2] - np.sqrt((n + 1) / 2) * phi[2:]
    np.testing.assert_allclose(dphi[1:-1], alt, rtol=1e-10, atol=1e-13)


def test_vacuum_is_gaussian():
    cfg = PhysConfig(hbar=0.7, mass=1.8, omega=2.5)
    p = QuarticParams(cfg=cfg, alpha=0)
    vac = quartic.coherent_coefficients(0, p.n_max)
    delta = np.sqrt(cfg.hbar / (cfg.mass * cfg.omega))
    psi = quartic.fock_to_position(vac, p, -5 * delta, 10 * delta / 200, 201)
    ref = packets.eval_polar(make_gaussian(0, 0, delta), cfg, psi.x).R
    assert np.max(np.abs(psi.psi - ref)) < 1e-14 * ref.max() * 10


@pytest.mark.parametrize("tT", TIMES)
def test_dpsi_matches_finite_differences(tT, params, state0):
    s = quartic.evolve(state0, params, tT * params.period)
    x = np.linspace(-9, 9, 73)
    psi, dpsi, _ = quartic.evaluate(s, params, x)
    keep = np.abs(psi) ** 2 > 1e-8 * np.max(np.abs(psi) ** 2)
    scale = np.max(np.abs(dpsi))
    for xi, d in zip(x[keep], dpsi[keep]):
        ref, _ = fd_derivative(lambda z: fock_psi_mp(s.coeffs, z), xi)
        ref = complex(ref)
        assert abs(d - ref) <= 1e-6 * max(abs(ref), 1e-3 * scale)


def test_coherent_peak_position(params, state0):
    L = params.length_scale
    psi = quartic.fock_to_position(state0, params, -10 * L, 20 * L / 400, 401)
    peak = psi.x[np.argmax(np.abs(psi.psi))] / L
    assert abs(peak - 3.0) <= 20 / 400


def test_under_resolved_grid_is_rejected(params, state0):
    limit = quartic.max_grid_step(state0, params)
    with pytest.raises(ValueError, match="dx <"):
        quartic.fock_to_position(state0, params, -10, 1.01 * limit, 10)


def test_polar_from_complex_real_and_plane_wave():
    x = np.linspace(-3, 3, 61)
    psi = np.exp(-x**2 / 2) * (1 + 0.3 * x)
    dpsi = np.gradient(psi, x)  # values are arbitrary inputs here, not a derivative check
    d2psi = np.gradient(dpsi, x)
    pol = quartic.polar_from_complex(psi, dpsi, d2psi)
    np.testing.assert_array_equal(pol.dS, 0.0)
    np.testing.assert_allclose(pol.rpp_over_r, d2psi / psi, rtol=1e-12)

    p0, hbar = 1.7, 0.8
    R, dR, d2R = np.exp(-x**2 / 2), -x * np.exp(-x**2 / 2), (x**2 - 1) * np.exp(-x**2 / 2)
    c = np.exp(1j * p0 * x / hbar)
    k = p0 / hbar
    pol = quartic.polar_from_complex(R * c, (dR + 1j * k * R) * c,
                                     (d2R + 2j * k * dR - k * k * R) * c, hbar=hbar)
    np.testing.assert_allclose(pol.dS, p0, rtol=1e-14)
    np.testing.assert_allclose(pol.rpp_over_r, x**2 - 1, rtol=1e-12, atol=1e-12)


def test_polar_from_complex_masks_nodes():
    psi = np.array([1.0, 0.0, 1e-14, 0.5])
    pol = quartic.polar_from_complex(psi, np.ones(4), np.ones(4))
    np.testing.assert_array_equal(pol.valid, [True, False, False, True])
    assert np.isnan(pol.rpp_over_r[1]) and np.isnan(pol.dS[2])


@pytest.mark.parametrize("tT", TIMES)
def test_polar_formulas_against_finite_differences(tT, params, state0):
    s = quartic.evolve(state0, params, tT * params.period)
    x = np.linspace(-10, 10, 161)
    psi, dpsi, d2psi = quartic.evaluate(s, params, x)
    pol = quartic.polar_from_complex(psi, dpsi, d2psi)
    keep = np.abs(psi) ** 2 > 1e-8 * np.max(np.abs(psi) ** 2)
    L = params.length_scale
    for xi, rpp, sp in zip(x[keep], pol.rpp_over_r[keep], pol.dS[keep]):
        ref_rpp, ref_sp = fd_polar(lambda z: fock_psi_mp(s.coeffs, z), xi)
        # relative error, floored at the natural scale where the exact value crosses zero
        assert abs(rpp - ref_rpp) <= 1e-6 * max(abs(ref_rpp), 1 / L**2)
        assert abs(sp - ref_sp) <= 1e-6 * max(abs(ref_sp), params.cfg.hbar / L)


def test_printed_plus_sign_fails_the_oracle(params, state0):
    # with "+" on the squared first-derivative term the formula disagrees with R''/R
    s = quartic.evolve(state0, params, 0.4 * params.period)
    x = np.array([2.0])
    psi, d1, d2 = quartic.evaluate(s, params, x)
    rho = np.abs(psi) ** 2
    cross = (np.conj(psi) * d1).real
    plus = ((np.abs(d1) ** 2 + (np.conj(psi) * d2).real) / rho + cross**2 / rho**2)[0]
    ref, _ = fd_polar(lambda z: fock_psi_mp(s.coeffs, z), 2.0)
    assert abs(plus - ref) > 1e-2 * max(abs(ref), 1)
    assert quartic.polar_from_complex(psi, d1, d2).rpp_over_r[0] == pytest.approx(ref, rel=1e-6)


def test_harmonic_limit_rotates_wigner_field():
    p = QuarticParams(lambda_hbar=0.0)
    s0 = quartic.initial_state(p)
    # bilinear resampling error is ~h^2/8 |W''| ~ 1.2e-4 at 512 points over +-7; 640 brings it to ~7e-5
    grid = PhaseSpaceGrid(-7, 7, -7, 7, 640, 640)

    def field(state):
        psi = quartic.fock_to_position(state, p, -20.0, 40.0 / 2047, 2048)
        return wigner.wigner_transform(psi, grid, p.cfg).values

    angle = 2 * np.pi * 0.3
    W0 = field(s0)
    Wt = field(quartic.evolve(s0, p, angle))
    X, P = grid.mesh()
    # phase-space flow is a clockwise rotation by omega t; pull back to t = 0
    back_x = X * np.cos(angle) - P * np.sin(angle)
    back_p = P * np.cos(angle) + X * np.sin(angle)
    resampled = bilinear(W0, grid.xs, grid.ps, back_x, back_p)
    assert np.max(np.abs(Wt - resampled)) < 1e-4


def test_effective_size_and_grid_limit(params, state0):
    n_eff = quartic.effective_size(state0)
    assert 0 < n_eff <= params.n_max
    w = np.abs(state0.coeffs) ** 2
    assert w[n_eff + 1:].sum() < 1e-12 <= w[n_eff:].sum()
    assert quartic.max_grid_step(state0, params) == pytest.approx(
        np.pi * params.length_scale / np.sqrt(2 * n_eff))
