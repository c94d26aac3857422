"""Averaging-engine checks.

The two closed forms doing the heavy lifting:

* linear commutator oracle  [b1, b2](x) = (B2 B1 - B1 B2) x for linear
  fields b_i(x) = B_i x, pinning the bracket sign convention;
* the sin/cos oscillation sin(tau) b1 + cos(tau) b2, whose averaged drift
  integrates by hand to -[b1, b2] / 2, pinning the 1/2 prefactor placement.
"""

import math

import numpy as np
import pytest

from recavg import avgcore, seek3d
from recavg.avgcore import (
    AveragedSystem,
    QuadratureError,
    QuadratureSettings,
    SingularField,
    SingularSystem,
    TwoScaleField,
    TwoScaleSystem,
    average_fields,
    constant_field,
    convergence_study,
    lie_bracket,
    rora_reduce,
    simulate_averaged,
    simulate_singular,
    simulate_two_scale,
)
from recavg.odeint import IntegratorSettings

TWO_PI = 2.0 * math.pi

B1 = np.array([[0.0, 1.0], [0.0, 0.0]])
B2 = np.array([[0.0, 0.0], [1.0, 0.0]])
COMMUTATOR = B2 @ B1 - B1 @ B2  # equals diag(-1, 1)


def sincos_field(with_jac=True):
    """sin(tau) B1 x + cos(tau) B2 x as a TwoScaleField."""

    def func(x, t, sigma, tau):
        tau = np.asarray(tau)
        v1, v2 = B1 @ x, B2 @ x
        if tau.ndim == 0:
            return math.sin(tau) * v1 + math.cos(tau) * v2
        return np.sin(tau)[:, None] * v1[None, :] + np.cos(tau)[:, None] * v2[None, :]

    jac = None
    if with_jac:

        def jac(x, t, sigma, tau):
            tau = np.asarray(tau)
            if tau.ndim == 0:
                return math.sin(tau) * B1 + math.cos(tau) * B2
            return np.sin(tau)[:, None, None] * B1 + np.cos(tau)[:, None, None] * B2

    return TwoScaleField(
        dim=2, func=func, T1=TWO_PI, T2=TWO_PI, jac=jac,
        vectorized=True, depends_sigma=False,
    )


def sincos_system(omega=400.0, with_jac=True):
    return TwoScaleSystem(
        f1=sincos_field(with_jac), f2=constant_field(2, TWO_PI, TWO_PI), omega=omega
    )


def expected_drift(x):
    return -0.5 * (COMMUTATOR @ np.asarray(x))


# --- lie_bracket ------------------------------------------------------------

def test_bracket_of_constants_is_zero():
    f = lambda x: np.array([1.0, -2.0])
    g = lambda x: np.array([0.5, 3.0])
    assert np.abs(lie_bracket(f, g, np.array([0.3, -0.7]))).max() < 1e-12


def test_bracket_linear_commutator_oracle():
    # finite differences against the exact matrix commutator
    f = lambda x: B1 @ x
    g = lambda x: B2 @ x
    rng = np.random.default_rng(11)
    for _ in range(10):
        x = rng.normal(size=2)
        assert np.abs(lie_bracket(f, g, x) - COMMUTATOR @ x).max() < 1e-9


def test_bracket_with_self_vanishes():
    f = lambda x: np.array([math.sin(x[0]), x[0] * x[1]])
    x = np.array([0.4, -1.2])
    assert np.abs(lie_bracket(f, f, x)).max() < 1e-9


def test_bracket_antisymmetry():
    rng = np.random.default_rng(12)

    def f(x):
        return np.array([math.sin(x[1]), x[0] ** 2, x[2]])

    def g(x):
        return np.array([x[0] * x[2], math.cos(x[0]), x[1]])

    for _ in range(20):
        x = rng.normal(size=3)
        total = lie_bracket(f, g, x) + lie_bracket(g, f, x)
        assert np.abs(total).max() < 1e-9


def test_bracket_analytic_jacobians_used():
    f = lambda x: B1 @ x
    g = lambda x: B2 @ x
    x = np.array([0.7, -0.2])
    out = lie_bracket(f, g, x, jac_f=lambda x: B1, jac_g=lambda x: B2)
    assert np.abs(out - COMMUTATOR @ x).max() < 1e-14


def test_bracket_rejects_non_finite_jacobian():
    f = lambda x: np.array([math.sqrt(abs(x[0])), 0.0])
    with pytest.raises(ValueError):
        lie_bracket(f, f, np.array([0.0, 0.0]), jac_f=lambda x: np.array([[np.nan, 0], [0, 0]]))


# --- construction-time assumption checks ------------------------------------

def test_nonzero_mean_f1_rejected():
    bad = constant_field(2, TWO_PI, TWO_PI, value=[1.0, 0.0])
    with pytest.raises(ValueError, match="tau-mean"):
        TwoScaleSystem(f1=bad, f2=constant_field(2, TWO_PI, TWO_PI), omega=10.0)


def test_wrong_period_rejected():
    def func(x, t, sigma, tau):
        return np.array([math.sin(tau), 0.0])

    bad = TwoScaleField(dim=2, func=func, T1=TWO_PI, T2=math.pi)
    with pytest.raises(ValueError, match="periodic"):
        TwoScaleSystem(f1=bad, f2=constant_field(2, TWO_PI, math.pi), omega=10.0)


def test_singular_equilibrium_violation_rejected():
    f = SingularField(dim=1, fast_dim=1, func=lambda x, z, t, s, tau: np.zeros(1),
                      T1=TWO_PI, T2=TWO_PI)
    with pytest.raises(ValueError, match="not zero"):
        SingularSystem(
            f1=f, f2=f,
            g=lambda x, z, t: x - z + 0.5,
            phi=lambda x, t: x,
            mu=0.1, omega=10.0,
        )


# --- average_fields ----------------------------------------------------------

def test_sincos_closed_form_fd_route():
    # no analytic Jacobian: exercises the finite-difference path
    sys = sincos_system(with_jac=False)
    averaged = average_fields(sys)
    rng = np.random.default_rng(13)
    for _ in range(10):
        x = rng.normal(size=2)
        assert np.abs(averaged(x, 0.0) - expected_drift(x)).max() < 1e-8


def test_sincos_closed_form_analytic_route():
    averaged = average_fields(sincos_system())
    rng = np.random.default_rng(14)
    for _ in range(10):
        x = rng.normal(size=2)
        assert np.abs(averaged(x, 0.0) - expected_drift(x)).max() < 1e-8


def test_constant_f2_passes_through():
    value = np.array([0.3, -1.1])
    sys = TwoScaleSystem(
        f1=sincos_field(), f2=constant_field(2, TWO_PI, TWO_PI, value=value), omega=50.0
    )
    averaged = average_fields(sys)
    x = np.array([0.2, 0.4])
    assert np.abs(averaged(x, 0.0) - (expected_drift(x) + value)).max() < 1e-8


def test_state_independent_f1_averages_to_zero():
    def func(x, t, sigma, tau):
        tau = np.asarray(tau)
        if tau.ndim == 0:
            return np.array([math.sin(tau), math.cos(tau)])
        return np.stack([np.sin(tau), np.cos(tau)], axis=1)

    sys = TwoScaleSystem(
        f1=TwoScaleField(dim=2, func=func, T1=TWO_PI, T2=TWO_PI, vectorized=True,
                         depends_sigma=False),
        f2=constant_field(2, TWO_PI, TWO_PI),
        omega=10.0,
    )
    averaged = average_fields(sys)
    assert np.abs(averaged(np.array([1.0, 2.0]), 0.0)).max() < 1e-10


def test_quadrature_doubling_consistency():
    # the cumulative antiderivative limits accuracy: 64 -> 128 moves the
    # output by 1.2e-8 on this field, every further doubling by 16x less
    sys = sincos_system()
    x = np.array([0.8, -0.5])
    coarse = average_fields(sys, QuadratureSettings(base_panels=128, max_refinements=0))
    fine = average_fields(sys, QuadratureSettings(base_panels=256, max_refinements=0))
    assert np.abs(coarse(x, 0.0) - fine(x, 0.0)).max() <= 1e-8


def test_quadrature_non_convergence_raises():
    sys = sincos_system()
    averaged = average_fields(sys, QuadratureSettings(base_panels=4, tol=1e-16, max_refinements=1))
    with pytest.raises(QuadratureError):
        averaged(np.array([1.0, 0.5]), 0.0)


# --- simulation wrappers ------------------------------------------------------

def test_simulate_two_scale_zero_fields_constant():
    sys = TwoScaleSystem(
        f1=constant_field(2, TWO_PI, TWO_PI),
        f2=constant_field(2, TWO_PI, TWO_PI),
        omega=100.0,
    )
    x0 = np.array([1.0, -1.0])
    traj = simulate_two_scale(sys, x0, 0.0, 1.0)
    assert np.abs(traj.states - x0).max() == 0.0


def test_simulate_two_scale_tracks_averaged_flow():
    sys = sincos_system(omega=400.0)
    x0 = np.array([1.0, 1.0])
    settings = IntegratorSettings(steps_per_period=64, projection=False)
    traj = simulate_two_scale(sys, x0, 0.0, 2.0, settings, sample_dt=0.01)
    averaged = average_fields(sys, QuadratureSettings(base_panels=32))
    ref = simulate_averaged(averaged, x0, 0.0, 2.0, settings, sample_dt=0.01)
    gap = np.linalg.norm(traj.states - ref.states, axis=1).max()
    assert gap < 0.2


def test_simulate_two_scale_t0_shift_invariance():
    sys = sincos_system(omega=100.0)
    x0 = np.array([0.5, -0.25])
    settings = IntegratorSettings(steps_per_period=64, projection=False)
    a = simulate_two_scale(sys, x0, 0.0, 1.0, settings, sample_dt=0.05)
    b = simulate_two_scale(sys, x0, 5.0, 1.0, settings, sample_dt=0.05)
    assert np.allclose(a.times + 5.0, b.times, atol=1e-12)
    assert np.abs(a.states - b.states).max() < 1e-12


def test_simulate_averaged_zero_field_constant():
    asys = AveragedSystem(dim=2, func=lambda x, t: np.zeros(2))
    x0 = np.array([2.0, 3.0])
    traj = simulate_averaged(asys, x0, 0.0, 1.0)
    assert np.abs(traj.states - x0).max() == 0.0


def test_simulate_averaged_linear_closed_form():
    drift = -0.5 * COMMUTATOR  # diag(1/2, -1/2)
    asys = AveragedSystem(dim=2, func=lambda x, t: drift @ x)
    x0 = np.array([1.0, 2.0])
    traj = simulate_averaged(asys, x0, 0.0, 2.0, IntegratorSettings(steps_per_period=256))
    expected = np.array([x0[0] * math.exp(1.0), x0[1] * math.exp(-1.0)])
    assert np.abs(traj.final_state - expected).max() < 1e-8


# --- singular systems ---------------------------------------------------------

def _frozen_singular(mu, omega=1.0):
    """1-D slow state with zero drift; fast state relaxes to phi(x) = x."""
    zero = SingularField(
        dim=1, fast_dim=1,
        func=lambda x, z, t, s, tau: np.zeros(1) if np.ndim(tau) == 0
        else np.zeros((len(tau), 1)),
        T1=TWO_PI, T2=TWO_PI, vectorized=True, depends_sigma=False,
    )
    return SingularSystem(
        f1=zero, f2=zero,
        g=lambda x, z, t: x - z,
        phi=lambda x, t: x,
        mu=mu, omega=omega,
    )


def test_singular_scalar_relaxation_closed_form():
    mu = 0.5
    ssys = _frozen_singular(mu)
    x0, z0 = np.array([0.7]), np.array([0.2])
    settings = IntegratorSettings(steps_per_period=256)
    traj = simulate_singular(ssys, x0, z0, 0.0, mu, settings, sample_dt=mu / 8)
    expected = z0[0] + (1.0 - math.exp(-1.0)) * (x0[0] - z0[0])
    assert abs(traj.final_state[1] - expected) < 1e-6
    assert np.abs(traj.states[:, 0] - x0[0]).max() == 0.0  # slow state frozen


def _embedded_tracking_error(mu, tf=5.0):
    params = seek3d.SeekParams(alpha=0.125, omega=4.0 * math.pi, mu=mu)
    field = seek3d.signal_field("static")
    ssys = seek3d.embedded_system(params, field, validate=False)
    p0 = np.array([-2.0, -2.0, 6.0])
    x0 = seek3d.embed_columns(p0, np.eye(3))
    z0 = ssys.phi(x0, 0.0)
    settings = IntegratorSettings(steps_per_period=64, projection=False)
    traj = simulate_singular(ssys, x0, z0, 0.0, tf, settings, sample_dt=0.01)
    worst = 0.0
    for t, y in zip(traj.times, traj.states):
        c = field.strength(y[0:3], t)
        worst = max(worst, abs(y[12] - c))
    return worst


def test_singular_seek3d_filter_tracks_signal():
    assert _embedded_tracking_error(1e-3) <= 0.1


def test_singular_tracking_error_scales_with_mu():
    e1 = _embedded_tracking_error(1e-3)
    e2 = _embedded_tracking_error(5e-4)
    assert 1.5 <= e1 / e2 <= 2.5


# --- slow-manifold reduction ---------------------------------------------------

def test_reduction_noop_when_fields_ignore_z():
    def f1_func(x, z, t, sigma, tau):
        tau = np.asarray(tau)
        v1, v2 = B1 @ x, B2 @ x
        if tau.ndim == 0:
            return math.sin(tau) * v1 + math.cos(tau) * v2
        return np.sin(tau)[:, None] * v1[None, :] + np.cos(tau)[:, None] * v2[None, :]

    f1 = SingularField(dim=2, fast_dim=2, func=f1_func, T1=TWO_PI, T2=TWO_PI,
                       vectorized=True, depends_sigma=False)
    f2 = SingularField(
        dim=2, fast_dim=2,
        func=lambda x, z, t, s, tau: np.zeros(2) if np.ndim(tau) == 0
        else np.zeros((len(tau), 2)),
        T1=TWO_PI, T2=TWO_PI, vectorized=True, depends_sigma=False,
    )
    ssys = SingularSystem(
        f1=f1, f2=f2, g=lambda x, z, t: x - z, phi=lambda x, t: x, mu=0.1, omega=50.0
    )
    reduced_avg = rora_reduce(ssys)
    plain_avg = average_fields(sincos_system(omega=50.0))
    rng = np.random.default_rng(15)
    for _ in range(5):
        x = rng.normal(size=2)
        assert np.abs(reduced_avg(x, 0.0) - plain_avg(x, 0.0)).max() < 1e-10


def test_reduction_zero_f1_gives_mean_of_substituted_f2():
    def f2_func(x, z, t, sigma, tau):
        tau = np.asarray(tau)
        base = z + np.sin(tau if tau.ndim == 0 else tau[:, None]) * x
        return base

    zero = SingularField(
        dim=1, fast_dim=1,
        func=lambda x, z, t, s, tau: np.zeros(1) if np.ndim(tau) == 0
        else np.zeros((len(tau), 1)),
        T1=TWO_PI, T2=TWO_PI, vectorized=True, depends_sigma=False,
    )
    f2 = SingularField(dim=1, fast_dim=1, func=f2_func, T1=TWO_PI, T2=TWO_PI,
                       vectorized=True, depends_sigma=False)
    ssys = SingularSystem(
        f1=zero, f2=f2, g=lambda x, z, t: 2.0 * x - z, phi=lambda x, t: 2.0 * x,
        mu=0.1, omega=30.0,
    )
    averaged = rora_reduce(ssys)
    x = np.array([0.7])
    # mean of z + sin(tau) x over a period with z = 2 x is just 2 x
    assert np.abs(averaged(x, 0.0) - 2.0 * x).max() < 1e-9


def test_reduction_matches_closed_form_gain():
    params = seek3d.SeekParams(alpha=0.125, omega=4.0 * math.pi, mu=1e-2)
    field = seek3d.signal_field("static")
    ssys = seek3d.embedded_system(params, field, validate=False)
    averaged = rora_reduce(ssys, QuadratureSettings(base_panels=64, tol=1e-7))
    rng = np.random.default_rng(16)
    from recavg.geom3 import rot_exp

    for _ in range(4):
        p = rng.normal(0.0, 2.0, 3)
        Q = rot_exp(rng.normal(size=3))
        x = seek3d.embed_columns(p, Q)
        got = averaged(x, 0.0)
        want_p = Q @ seek3d.AVERAGED_GAIN @ Q.T @ field.gradient(p, 0.0)
        assert np.abs(got[0:3] - want_p).max() < 1e-6
        assert np.abs(got[3:]).max() < 1e-8


# --- convergence study ----------------------------------------------------------

def test_convergence_study_sincos_rate():
    report = convergence_study(
        sincos_system(), np.array([1.0, 1.0]), 0.0, 2.0,
        [1e2, 1e3, 1e4],
        IntegratorSettings(steps_per_period=64, projection=False),
        QuadratureSettings(base_panels=32),
    )
    errs = report.sup_errors
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert -0.65 <= report.fitted_slope <= -0.35
    assert report.empirical_C > 0


def test_convergence_study_quadrupling_ratio():
    report = convergence_study(
        sincos_system(), np.array([1.0, 1.0]), 0.0, 2.0,
        [400.0, 1600.0, 6400.0],
        IntegratorSettings(steps_per_period=64, projection=False),
        QuadratureSettings(base_panels=32),
    )
    for ratio in report.error_ratios():
        assert 1.5 <= ratio <= 2.5


def test_convergence_study_rejects_bad_omegas():
    sys = sincos_system()
    x0 = np.array([1.0, 1.0])
    with pytest.raises(ValueError):
        convergence_study(sys, x0, 0.0, 1.0, [100.0, 100.0, 200.0])
    with pytest.raises(ValueError):
        convergence_study(sys, x0, 0.0, 1.0, [100.0, 200.0])
    with pytest.raises(ValueError):
        convergence_study(sys, x0, 0.0, 1.0, [-1.0, 1.0, 2.0])


def test_convergence_study_concurrent_matches_serial():
    omegas = [100.0, 400.0, 1600.0]
    kwargs = dict(
        settings=IntegratorSettings(steps_per_period=64, projection=False),
        quad=QuadratureSettings(base_panels=32),
    )
    serial = convergence_study(
        sincos_system(), np.array([1.0, 1.0]), 0.0, 1.0, omegas, workers=1, **kwargs
    )
    threaded = convergence_study(
        sincos_system(), np.array([1.0, 1.0]), 0.0, 1.0, omegas, workers=3, **kwargs
    )
    assert serial.sup_errors == threaded.sup_errors
    assert serial.fitted_slope == threaded.fitted_slope
