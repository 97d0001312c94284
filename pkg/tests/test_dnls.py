import math

import numpy as np
import pytest

from latticewave.dnls import (
    NlsConfig,
    continuum_gaussian,
    energy,
    evolve,
    mass,
    nonlinear_phase_flow,
    s1_norm,
    step_strang,
    uniform_bound_experiment,
)
from latticewave.errors import ConfigurationError, DivergenceError, WindowError
from latticewave.harness import AdmissiblePair, admissible_pairs
from latticewave.lattice import GridFunction, Lattice, from_function, lp_norm, plane_wave, point_mass
from latticewave.propagators import schrodinger_flow
from latticewave.spectral import bessel_derivative


def smooth_data(lat, amplitude=1.0, width=2.0):
    return from_function(lat, continuum_gaussian(amplitude, width))


# ---------------------------------------------------------------------------
# invariants of the pieces

def test_mass_examples():
    lat = Lattice(h=0.5, d=1, M=8)
    f = point_mass(lat)
    assert mass(f) == pytest.approx(0.5)
    assert mass(f * 3.0) == pytest.approx(9 * 0.5)
    g = smooth_data(Lattice(h=0.5, d=1, M=64))
    assert mass(schrodinger_flow(g, 1.7)) == pytest.approx(mass(g), rel=1e-12)


def test_energy_single_site():
    lat = Lattice(h=1.0, d=1, M=8)
    a, lam, p = 1.3, -0.7, 3.0
    u = point_mass(lat, value=a)
    expected = a**2 + lam * a ** (p + 1) / (p + 1)
    assert energy(u, lam, p) == pytest.approx(expected, rel=1e-12)


def test_energy_kinetic_nonnegative_and_plane_wave():
    lat = Lattice(h=0.5, d=1, M=32)
    rng = np.random.default_rng(0)
    f = GridFunction(lat, rng.standard_normal(32) + 1j * rng.standard_normal(32))
    assert energy(f, 0.0, 2.5) >= 0.0
    k = 5
    pw = plane_wave(lat, k)
    xi = 2 * np.pi * k / (lat.h * lat.M)
    ev = (4.0 / lat.h**2) * np.sin(lat.h * xi / 2) ** 2
    assert energy(pw, 0.0, 3.0) == pytest.approx(0.5 * ev * mass(pw), rel=1e-10)


def test_nonlinear_phase_flow():
    lat = Lattice(h=0.5, d=1, M=32)
    rng = np.random.default_rng(1)
    u = GridFunction(lat, rng.standard_normal(32) + 1j * rng.standard_normal(32))
    np.testing.assert_allclose(nonlinear_phase_flow(u, 0.0, 1.0, 3.0).values, u.values)
    np.testing.assert_allclose(nonlinear_phase_flow(u, 0.7, 0.0, 3.0).values, u.values)
    out = nonlinear_phase_flow(u, 0.9, -1.0, 2.5)
    np.testing.assert_allclose(np.abs(out.values), np.abs(u.values), rtol=1e-13)


def test_strang_linear_limit_and_reversibility():
    lat = Lattice(h=0.5, d=1, M=64)
    u = smooth_data(lat)
    cfg0 = NlsConfig(lam=0.0, p=3.0, dt=0.05, T=1.0)
    np.testing.assert_allclose(step_strang(u, 0.05, cfg0).values,
                               schrodinger_flow(u, 0.05).values, atol=1e-12)
    cfg = NlsConfig(lam=1.0, p=3.0, dt=0.05, T=1.0)
    back = step_strang(step_strang(u, 0.05, cfg), -0.05, cfg)
    assert np.abs(back.values - u.values).max() < 1e-10


def test_strang_mass_conservation_many_steps():
    lat = Lattice(h=0.5, d=1, M=64)
    u = smooth_data(lat)
    cfg = NlsConfig(lam=1.0, p=3.0, dt=0.01, T=1.0)
    m0 = mass(u)
    for _ in range(1000):
        u = step_strang(u, cfg.dt, cfg)
    assert abs(mass(u) - m0) / m0 < 1e-10


# ---------------------------------------------------------------------------
# integral-form oracle

def picard_solution(u0, lam, p, T, n_s, tol=1e-12, max_iter=300):
    """Fixed-point iteration of the integral form on a uniform fine grid.

    u(t) = flow(t) u0 - i lam * flow(t) * cumtrapz_s flow(-s) (|u|^(p-1) u)(s),
    trapezoid in s.  Independent of the split-step path.
    """
    lat = u0.lattice
    ts = np.linspace(0.0, T, n_s + 1)
    ds = ts[1] - ts[0]
    lin = [schrodinger_flow(u0, float(t)).values for t in ts]
    u = [v.copy() for v in lin]
    for _ in range(max_iter):
        z = [schrodinger_flow(GridFunction(lat, np.abs(v) ** (p - 1.0) * v), -float(t)).values
             for v, t in zip(u, ts)]
        cums = [np.zeros_like(z[0])]
        for j in range(1, len(ts)):
            cums.append(cums[-1] + 0.5 * ds * (z[j - 1] + z[j]))
        new = [lin[j] - 1j * lam * schrodinger_flow(GridFunction(lat, cums[j]), float(ts[j])).values
               for j in range(len(ts))]
        delta = max(float(np.abs(a - b).max()) for a, b in zip(new, u))
        u = new
        if delta < tol:
            return ts, u
    raise RuntimeError("fixed-point iteration did not converge")


def strang_endpoint(u0, lam, p, T, dt):
    cfg = NlsConfig(lam=lam, p=p, dt=dt, T=T)
    u = u0
    for _ in range(int(round(T / dt))):
        u = step_strang(u, dt, cfg)
    return u


def test_strang_second_order_against_integral_oracle():
    lat = Lattice(h=0.5, d=1, M=64)
    u0 = smooth_data(lat, amplitude=0.8)
    lam, p, T = 1.0, 3.0, 0.25
    _, ref = picard_solution(u0, lam, p, T, n_s=2048)
    target = ref[-1]
    errs = []
    for dt in (0.025, 0.0125):
        got = strang_endpoint(u0, lam, p, T, dt).values
        errs.append(float(np.abs(got - target).max()))
    ratio = errs[0] / errs[1]
    assert 3.0 < ratio < 5.2


# ---------------------------------------------------------------------------
# evolve

def test_evolve_zero_data():
    lat = Lattice(h=0.5, d=1, M=32)
    traj = evolve(GridFunction(lat, np.zeros(32)), NlsConfig(lam=1.0, p=3.0, dt=0.1, T=0.5))
    assert np.all(traj.monitors["mass"] == 0.0)
    for state in traj.states:
        assert np.all(state.values == 0.0)


def test_evolve_mass_series_constant():
    lat = Lattice(h=0.5, d=1, M=64)
    traj = evolve(smooth_data(lat), NlsConfig(lam=-1.0, p=2.5, dt=0.01, T=1.0))
    m = traj.monitors["mass"]
    assert np.abs(m - m[0]).max() / m[0] < 1e-10
    assert traj.times.size == m.size == 101
    # single-site data behaves the same way
    spike = evolve(point_mass(lat), NlsConfig(lam=1.0, p=3.0, dt=0.01, T=0.5))
    ms = spike.monitors["mass"]
    assert np.abs(ms - ms[0]).max() / ms[0] < 1e-10


def test_evolve_energy_drift_second_order():
    lat = Lattice(h=0.5, d=1, M=64)
    u0 = smooth_data(lat)
    drifts = []
    for dt in (0.02, 0.01):
        traj = evolve(u0, NlsConfig(lam=1.0, p=3.0, dt=dt, T=1.0))
        e = traj.monitors["energy"]
        drifts.append(np.abs(e - e[0]).max())
    assert 3.2 < drifts[0] / drifts[1] < 4.8


def test_evolve_divergence_detection():
    lat = Lattice(h=0.5, d=1, M=32)
    huge = GridFunction(lat, np.full(32, 1e200, dtype=complex))
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as err:
            evolve(huge, NlsConfig(lam=-1.0, p=3.0, dt=0.1, T=1.0))
    assert err.value.last_valid_time is not None


def test_evolve_boundary_monitor():
    lat = Lattice(h=1.0, d=1, M=16)
    with pytest.raises(WindowError):
        evolve(point_mass(lat), NlsConfig(lam=0.0, p=2.0, dt=0.25, T=20.0))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        NlsConfig(lam=1.0, p=1.0, dt=0.1, T=1.0)
    with pytest.raises(ConfigurationError):
        NlsConfig(lam=1.0, p=3.0, dt=-0.1, T=1.0)
    with pytest.raises(ConfigurationError):
        NlsConfig(lam=1.0, p=3.0, dt=0.1, T=1.0, monitors=frozenset({"vorticity"}))


# ---------------------------------------------------------------------------
# space-time norm of trajectories

def test_s1_norm_zero_and_monotone():
    lat = Lattice(h=0.5, d=1, M=32)
    traj = evolve(GridFunction(lat, np.zeros(32)), NlsConfig(lam=1.0, p=3.0, dt=0.1, T=0.5))
    pairs = admissible_pairs(1, 4)
    assert s1_norm(traj, pairs) == 0.0
    with pytest.raises(ConfigurationError):
        s1_norm(traj, [])


def test_s1_norm_stride_self_convergence():
    lat = Lattice(h=0.5, d=1, M=64)
    u0 = smooth_data(lat)
    pairs = admissible_pairs(1, 5)
    vals = []
    for stride in (4, 2, 1):
        traj = evolve(u0, NlsConfig(lam=1.0, p=3.0, dt=0.01, T=0.5, snapshot_stride=stride))
        vals.append(s1_norm(traj, pairs))
    assert abs(vals[1] - vals[2]) / vals[2] < 0.005
    assert abs(vals[0] - vals[2]) / vals[2] < 0.02


def test_s1_norm_sup_pair_linear_flow():
    lat = Lattice(h=0.5, d=1, M=64)
    u0 = smooth_data(lat)
    traj = evolve(u0, NlsConfig(lam=0.0, p=3.0, dt=0.02, T=0.5, snapshot_stride=1))
    sup_pair = AdmissiblePair(q=math.inf, r=2.0, d=1)
    expected = lp_norm(bessel_derivative(u0, 1.0), 2)
    assert s1_norm(traj, [sup_pair]) == pytest.approx(expected, rel=1e-10)
    more = s1_norm(traj, admissible_pairs(1, 5))
    assert more >= s1_norm(traj, [sup_pair]) - 1e-12


def test_uniform_bound_experiment_defocusing_smoke():
    scan = uniform_bound_experiment([1.0, 0.5], continuum_gaussian(1.0, 2.0),
                                    d=1, box=32.0, lam=1.0, p=3.0, dt=0.01, T=0.2,
                                    pairs_count=4, snapshot_stride=2)
    cols = scan.columns
    for row in scan.rows:
        h1_sup = row[cols.index("h1_sup")]
        bound = row[cols.index("h1_bound")]
        assert h1_sup <= bound * (1 + 1e-6)
    assert "s1" in scan.fits
