import numpy as np
import pytest

from conftest import small_imaging
from risimaging.geometry import CarrierConfig, GridSpec, PanelSpec
from risimaging.channel import incident_propagation
from risimaging.codebook import random_codebook
from risimaging.exceptions import DimensionError, DivergenceError, InitializationError
from risimaging.forward import MeasurementSet, assemble_imaging_matrix, amplitude_measurements, synthesize_measurements
from risimaging.recon import (
    LSOptions,
    WFOptions,
    align_phase,
    auto_regularization,
    compute_weights,
    init_norm,
    ls_reconstruct,
    reweighted_wf,
    robust_potential,
    spectral_initialize,
    spectral_matrix,
    top_eigenvector,
    wf_gradient,
    wf_objective,
)


def _cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _pm1(rng, m, n):
    return rng.choice([-1.0, 1.0], size=(m, n)).astype(complex)


# --------------------------------------------------------------------------
# least squares
# --------------------------------------------------------------------------

def test_ls_identity(rng):
    s = _cplx(rng, 5)
    r = ls_reconstruct(np.eye(5), s)
    np.testing.assert_allclose(r.estimate, s, atol=1e-14)
    assert not r.rank_deficient


def test_ls_round_trip_full_rank(rng):
    _, _, _, H = small_imaging(T=40, rows=4, cols=4, counts=(3, 3, 1))
    s = _cplx(rng, 9)
    y = synthesize_measurements(H, s)
    r = ls_reconstruct(H, y)
    assert np.linalg.norm(r.estimate - s) / np.linalg.norm(s) < 1e-8


def test_ls_min_norm_when_rank_deficient(rng):
    # N = 3x3 < M = 16
    _, _, _, H = small_imaging(T=30, rows=3, cols=3, counts=(4, 4, 1))
    y = H.matrix @ _cplx(rng, 16)
    with pytest.warns(RuntimeWarning, match="rank deficient"):
        r = ls_reconstruct(H, y)
    assert r.rank_deficient
    U, sv, Vh = np.linalg.svd(H.matrix, full_matrices=False)
    keep = sv > max(H.shape) * np.finfo(float).eps * sv[0]
    oracle = Vh[keep].conj().T @ ((U[:, keep].conj().T @ y) / sv[keep])
    np.testing.assert_allclose(r.estimate, oracle, rtol=1e-8, atol=1e-10 * np.abs(oracle).max())


def test_ls_normal_equations(rng):
    A = _cplx(rng, 30, 8)
    y = _cplx(rng, 30)
    z = ls_reconstruct(A, y).estimate
    assert np.linalg.norm(A.conj().T @ (A @ z - y)) < 1e-8 * np.linalg.norm(A.conj().T @ y)


def test_ls_tikhonov_closed_form(rng):
    A = _cplx(rng, 20, 6)
    y = _cplx(rng, 20)
    lam = 0.3
    z = ls_reconstruct(A, y, LSOptions(regularization=lam)).estimate
    oracle = np.linalg.solve(A.conj().T @ A + lam * np.eye(6), A.conj().T @ y)
    np.testing.assert_allclose(z, oracle, rtol=1e-10)


def test_ls_iterative_matches_direct(rng):
    A = _cplx(rng, 40, 10)
    y = _cplx(rng, 40)
    for reg in (0.0, 0.1):
        d = ls_reconstruct(A, y, LSOptions(regularization=reg)).estimate
        i = ls_reconstruct(A, y, LSOptions(regularization=reg, policy="iterative")).estimate
        np.testing.assert_allclose(i, d, rtol=1e-8)


def test_ls_auto_regularization(rng):
    _, _, _, H = small_imaging(T=40, rows=4, cols=4, counts=(3, 3, 1))
    s = _cplx(rng, 9)
    noisy = synthesize_measurements(H, s, snr_db=20.0, seed=1)
    r = ls_reconstruct(H, noisy, LSOptions(regularization="auto"))
    assert r.regularization == pytest.approx(auto_regularization(H.matrix, noisy.values, noisy.noise_variance))
    assert r.regularization > 0
    clean = synthesize_measurements(H, s)
    assert ls_reconstruct(H, clean, LSOptions(regularization="auto")).regularization == 0.0


def test_ls_input_errors():
    with pytest.raises(ValueError):
        ls_reconstruct(np.eye(2), amplitude_measurements(MeasurementSet(np.ones(2, complex))))
    with pytest.raises(DimensionError):
        ls_reconstruct(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        LSOptions(regularization=-1.0)


# --------------------------------------------------------------------------
# spectral initialisation
# --------------------------------------------------------------------------

def test_spectral_rank_one():
    n, m = 4, 10
    A = np.zeros((m, n), complex)
    A[:, 0] = 1.0
    x = np.eye(n)[0]
    z = spectral_initialize(A, np.abs(A @ x) ** 2)
    v = z / np.linalg.norm(z)
    assert abs(abs(v[0]) - 1) < 1e-10


def test_spectral_alignment_small(rng):
    n, m = 4, 256
    A = _cplx(rng, m, n)
    x = _cplx(rng, n)
    z = spectral_initialize(A, np.abs(A @ x) ** 2)
    cos = abs(np.vdot(z, x)) / (np.linalg.norm(z) * np.linalg.norm(x))
    assert cos > 0.9


def test_power_iteration_matches_eigh(rng):
    A = _cplx(rng, 60, 7)
    y = np.abs(A @ _cplx(rng, 7)) ** 2
    Y = spectral_matrix(A, y)
    np.testing.assert_allclose(Y, sum(y[i] * np.outer(A[i].conj(), A[i]) for i in range(60)) / 60, atol=1e-12)
    v, lam = top_eigenvector(Y)
    w, V = np.linalg.eigh(Y)
    assert lam == pytest.approx(w[-1], rel=1e-9)
    assert abs(np.vdot(v, V[:, -1])) == pytest.approx(1.0, abs=1e-8)


def test_power_iteration_is_deterministic(rng):
    Y = spectral_matrix(_cplx(rng, 30, 5), rng.random(30))
    a, _ = top_eigenvector(Y)
    b, _ = top_eigenvector(Y)
    assert a.tobytes() == b.tobytes()


def test_init_norm_formula(rng):
    A = _cplx(rng, 50, 6)
    y = rng.random(50)
    assert init_norm(A, y) ** 2 == pytest.approx(6 * y.sum() / np.sum(np.abs(A) ** 2))
    z = spectral_initialize(A, y)
    assert np.linalg.norm(z) == pytest.approx(init_norm(A, y))
    assert np.linalg.norm(spectral_initialize(A, y, norm=3.0)) == pytest.approx(3.0)


def test_init_norm_isotropic_rows():
    # y_i = c ||h_i||^2 gives init_norm^2 = c n
    A = np.exp(1j * np.linspace(0, 5, 40 * 3)).reshape(40, 3)
    y = 2.5 * np.sum(np.abs(A) ** 2, axis=1)
    assert init_norm(A, y) ** 2 == pytest.approx(2.5 * 3)


def test_spectral_zero_data():
    with pytest.raises(InitializationError):
        spectral_initialize(np.ones((3, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        spectral_initialize(np.ones((3, 2)), -np.ones(3))


# --------------------------------------------------------------------------
# weights, objective, gradient
# --------------------------------------------------------------------------

def test_weights(rng):
    A = _cplx(rng, 9, 3)
    z = _cplx(rng, 3)
    exact = np.abs(A @ z) ** 2
    eta = 0.2
    np.testing.assert_allclose(compute_weights(A, z, exact, eta), 1 / eta)
    y = exact + rng.normal(size=9)
    w = compute_weights(A, z, y, eta)
    assert np.all((w > 0) & (w <= 1 / eta))
    for i in range(9):
        assert w[i] == pytest.approx(1.0 / (abs(abs(A[i] @ z) ** 2 - y[i]) + eta))
    assert compute_weights(A, z, exact + 1e12, eta).max() < 1e-11


def _fd_gradient(A, z, y, w, h=1e-6):
    g = np.zeros_like(z)
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = h
        dre = (wf_objective(A, z + e, y, w) - wf_objective(A, z - e, y, w)) / (2 * h)
        dim = (wf_objective(A, z + 1j * e, y, w) - wf_objective(A, z - 1j * e, y, w)) / (2 * h)
        g[j] = dre + 1j * dim
    return g


def test_gradient_finite_differences(flavour, rng):
    A = _cplx(rng, 7, 3)
    z = _cplx(rng, 3)
    y = np.abs(A @ _cplx(rng, 3)) ** 2
    w = rng.random(7) + 0.1
    g = wf_gradient(A, z, y, w)
    fd = _fd_gradient(A, z, y, w)
    assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-12)) < 1e-5


def test_gradient_closed_form(flavour, rng):
    A = _cplx(rng, 11, 4)
    z = _cplx(rng, 4)
    y = rng.random(11)
    w = rng.random(11)
    a = A @ z
    ref = (1 / 11) * sum(2 * w[i] * (abs(a[i]) ** 2 - y[i]) * A[i].conj() * a[i] for i in range(11))
    np.testing.assert_allclose(wf_gradient(A, z, y, w), ref, rtol=1e-12)


def test_gradient_zero_at_minimiser(flavour, rng):
    A = _cplx(rng, 8, 3)
    x = _cplx(rng, 3)
    y = np.abs(A @ x) ** 2
    assert np.abs(wf_gradient(A, x, y, np.ones(8))).max() < 1e-12


def test_gradient_linear_in_weights(flavour, rng):
    A = _cplx(rng, 8, 3)
    z = _cplx(rng, 3)
    y = rng.random(8)
    w = rng.random(8)
    np.testing.assert_allclose(wf_gradient(A, z, y, 3.5 * w), 3.5 * wf_gradient(A, z, y, w), rtol=1e-12)


def test_objective_phase_invariant(flavour, rng):
    A = _cplx(rng, 8, 3)
    z = _cplx(rng, 3)
    y = rng.random(8)
    w = rng.random(8)
    f = wf_objective(A, z, y, w)
    for phi in (0.3, 2.0, -1.1):
        assert wf_objective(A, np.exp(1j * phi) * z, y, w) == pytest.approx(f, rel=1e-12)


# --------------------------------------------------------------------------
# amplitude-only solver
# --------------------------------------------------------------------------

def test_wf_recovers_real_source(rng):
    n, m = 16, 128
    A = _pm1(rng, m, n)
    x = np.abs(rng.normal(size=n)) + 0j
    r = reweighted_wf(A, np.abs(A @ x))
    err = np.linalg.norm(align_phase(r.estimate, x) - x) / np.linalg.norm(x)
    assert err < 1e-6 and r.converged


def test_wf_recovers_complex_source(rng):
    n, m = 12, 120
    A = _cplx(rng, m, n)
    x = _cplx(rng, n)
    r = reweighted_wf(A, np.abs(A @ x))
    assert np.linalg.norm(align_phase(r.estimate, x) - x) / np.linalg.norm(x) < 1e-6


def _ris_rows(receiver):
    carrier = CarrierConfig()
    grid = GridSpec((0, 0, 0), (3, 3, 1), (3.0, 3.0, 3.0))
    panel = PanelSpec.facing((0, 0, 15.0), grid.origin, 16, 16, carrier.wavelength / 2)
    H = assemble_imaging_matrix(grid, [panel], [receiver], carrier, random_codebook([panel.size], 150, 0))
    return H, incident_propagation(grid, panel, carrier)


def test_wf_on_ris_rows_with_off_axis_receiver():
    H, _ = _ris_rows((2.0, 1.0, 10.0))
    x = np.exp(1j * np.linspace(0, 3, 9)) * np.linspace(1, 2, 9)
    r = reweighted_wf(H, np.abs(H.matrix @ x))
    assert np.linalg.norm(align_phase(r.estimate, x) - x) / np.linalg.norm(x) < 1e-6


def test_on_axis_receiver_has_a_twin():
    # real +-1 patterns and a receiver on the panel axis: the point-mirrored,
    # conjugated scene produces the same amplitudes. Mirror cells share their
    # range, so only the propagation phase has to be undone.
    H, hi = _ris_rows((0.0, 0.0, 10.0))
    x = np.exp(1j * np.linspace(0, 3, 9)) * np.linspace(1, 2, 9)
    twin = (np.conj(x) * np.conj(hi) / hi)[::-1]
    np.testing.assert_allclose(np.abs(H.matrix @ twin), np.abs(H.matrix @ x), rtol=1e-9)
    assert np.linalg.norm(align_phase(twin, x) - x) / np.linalg.norm(x) > 0.5


def test_wf_history_monotone(rng):
    A = _cplx(rng, 80, 10)
    x = _cplx(rng, 10)
    r = reweighted_wf(A, np.abs(A @ x), WFOptions(max_iter=200))
    h = r.objective_history
    assert len(h) == r.iterations + 1
    assert np.all(np.diff(h) <= 1e-12 * max(h[0], 1e-300))
    assert r.objective_history[0] == pytest.approx(robust_potential(A, r.initial, np.abs(A @ x) ** 2,
                                                                    0.1 * np.mean(np.abs(A @ x) ** 2)))


def test_wf_fixed_step_does_not_increase(rng):
    A = _cplx(rng, 80, 10)
    x = _cplx(rng, 10)
    r = reweighted_wf(A, np.abs(A @ x), WFOptions(max_iter=300, line_search=False))
    assert r.objective_history[-1] <= r.objective_history[0]


def test_wf_global_phase_invariance(rng):
    A = _cplx(rng, 60, 6)
    x = _cplx(rng, 6)
    r1 = reweighted_wf(A, np.abs(A @ x), WFOptions(max_iter=50))
    r2 = reweighted_wf(A, np.abs(A @ (np.exp(1.3j) * x)), WFOptions(max_iter=50))
    np.testing.assert_allclose(r1.objective_history, r2.objective_history, rtol=1e-9,
                               atol=1e-12 * r1.objective_history[0])


def test_wf_underdetermined_no_crash(rng):
    A = _cplx(rng, 5, 12)
    x = _cplx(rng, 12)
    r = reweighted_wf(A, np.abs(A @ x), WFOptions(max_iter=100))
    err = np.linalg.norm(align_phase(r.estimate, x) - x) / np.linalg.norm(x)
    assert (not r.converged) or err > 1e-3


def test_wf_options_and_variants(rng):
    A = _cplx(rng, 60, 6)
    y = np.abs(A @ _cplx(rng, 6))
    for opts in (
        WFOptions(max_iter=30, eta_schedule="decay"),
        WFOptions(max_iter=30, objective="amplitude"),
        WFOptions(max_iter=30, inner_steps=3),
    ):
        r = reweighted_wf(A, y, opts)
        assert np.all(np.isfinite(r.estimate))
    r = reweighted_wf(A, y, WFOptions(max_iter=5, keep_weights=True))
    eta = 0.1 * np.mean(y**2)
    assert len(r.weights) == r.iterations
    assert all(np.all((w > 0) & (w <= 1 / eta)) for w in r.weights)
    for bad in (dict(max_iter=0), dict(tol=0.0), dict(eta_factor=0.0), dict(eta_schedule="x"), dict(objective="x")):
        with pytest.raises(ValueError):
            WFOptions(**bad)


def test_wf_divergence_reported(rng):
    A = _cplx(rng, 20, 4)
    y = np.abs(A @ _cplx(rng, 4))
    with pytest.raises(DivergenceError) as info:
        reweighted_wf(A, y, WFOptions(max_iter=50, line_search=False, step_size=1e200))
    assert info.value.iteration >= 1


def test_wf_input_checks(rng):
    A = _cplx(rng, 20, 4)
    with pytest.raises(InitializationError):
        reweighted_wf(A, np.zeros(20))
    with pytest.raises(DimensionError):
        reweighted_wf(A, np.ones(19))
    with pytest.raises(ValueError):
        reweighted_wf(A, MeasurementSet(np.ones(20, complex)))


# --------------------------------------------------------------------------
# phase alignment
# --------------------------------------------------------------------------

def test_align_known_rotation(rng):
    ref = _cplx(rng, 8)
    np.testing.assert_allclose(align_phase(np.exp(1j * np.pi / 3) * ref, ref), ref, atol=1e-12)


def test_align_orthogonal_pair():
    ref = np.array([1.0, 0.0], complex)
    z = np.array([0.0, 2.0j])
    out = align_phase(z, ref)
    assert np.linalg.norm(out) == pytest.approx(2.0)
    assert np.linalg.norm(out - ref) ** 2 == pytest.approx(5.0)


def test_align_grid_search_oracle(rng):
    z, ref = _cplx(rng, 2, 10)
    best = np.linalg.norm(align_phase(z, ref) - ref)
    grid = min(np.linalg.norm(np.exp(1j * p) * z - ref) for p in np.linspace(0, 2 * np.pi, 360, endpoint=False))
    assert best <= grid + 1e-12
    assert grid - best < 1e-3 * np.linalg.norm(ref)


def test_align_zero_reference():
    z = np.array([1.0 + 1j, 2.0])
    with pytest.warns(RuntimeWarning):
        out = align_phase(z, np.zeros(2))
    np.testing.assert_array_equal(out, z)
    with pytest.raises(DimensionError):
        align_phase(z, np.zeros(3))
