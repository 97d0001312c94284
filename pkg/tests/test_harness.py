import math

import numpy as np
import pytest

from latticewave.errors import ConfigurationError, WindowError
from latticewave.harness import (
    AdmissiblePair,
    admissible_pairs,
    decay_data,
    decay_time_grid,
    dispersive_decay_scan,
    inequality_constant_scan,
    knapp_eps_exponents,
    knapp_experiment,
    knapp_h_sharpness,
    loglog_fit,
    random_ensemble,
    strichartz_norm,
    uniformity_scan,
)
from latticewave.lattice import GridFunction, Lattice, gaussian, lp_norm, point_mass


# ---------------------------------------------------------------------------
# fits

def test_loglog_fit_recovers_power_law():
    x = np.geomspace(1, 100, 20)
    y = 3.0 * x**-0.5
    fit = loglog_fit(x, y)
    assert fit["slope"] == pytest.approx(-0.5, abs=1e-12)
    assert fit["r_squared"] == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# admissible pairs

def test_admissible_pairs_endpoints():
    p1 = admissible_pairs(1, 5)
    assert math.isinf(p1[0].r) and p1[0].q == pytest.approx(6.0)
    assert p1[-1].r == pytest.approx(2.0) and math.isinf(p1[-1].q)
    p2 = admissible_pairs(2, 4)
    assert math.isinf(p2[0].r) and p2[0].q == pytest.approx(3.0)


def test_admissible_pairs_identity_and_exclusion():
    for d in (1, 2, 3):
        for pair in admissible_pairs(d, 7):
            inv_q = 0.0 if math.isinf(pair.q) else 1.0 / pair.q
            inv_r = 0.0 if math.isinf(pair.r) else 1.0 / pair.r
            assert abs(3 * inv_q + d * inv_r - d / 2) < 1e-12
            assert not (d == 3 and pair.q == 2 and math.isinf(pair.r))
    with pytest.raises(ConfigurationError):
        AdmissiblePair(q=2.0, r=math.inf, d=3)
    with pytest.raises(ConfigurationError):
        admissible_pairs(1, 1)


# ---------------------------------------------------------------------------
# decay scans

def test_decay_scan_full_spectrum_smoke():
    lat = Lattice(h=1.0, d=1, M=1024)
    fit = dispersive_decay_scan("schrodinger", decay_data(lat), decay_time_grid(2.0, 60.0, 15))
    assert fit.slope == pytest.approx(-1.0 / 3.0, abs=0.08)
    assert fit.r_squared > 0.9


def test_decay_scan_slope_is_amplitude_invariant():
    lat = Lattice(h=1.0, d=1, M=512)
    grid = decay_time_grid(2.0, 30.0, 10)
    a = dispersive_decay_scan("schrodinger", decay_data(lat), grid)
    b = dispersive_decay_scan("schrodinger", decay_data(lat) * 37.0, grid)
    assert a.slope == pytest.approx(b.slope, abs=1e-12)


def test_decay_scan_window_violation():
    lat = Lattice(h=1.0, d=1, M=64)
    grid = decay_time_grid(1.0, 500.0, 10)
    with pytest.raises(WindowError) as err:
        dispersive_decay_scan("schrodinger", decay_data(lat), grid)
    assert err.value.largest_valid_t is not None


# ---------------------------------------------------------------------------
# space-time norm

def test_strichartz_sup_pair_equals_l2():
    lat = Lattice(h=0.5, d=1, M=64)
    rng = np.random.default_rng(0)
    u0 = GridFunction(lat, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    u0 = u0 * (1.0 / lp_norm(u0, 2))
    pair = AdmissiblePair(q=math.inf, r=2.0, d=1)
    val = strichartz_norm(u0, pair, T=2.0, check_window=False)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_strichartz_quadrature_self_convergence():
    lat = Lattice(h=0.5, d=1, M=128)
    u0 = gaussian(lat, 2.0)
    u0 = u0 * (1.0 / lp_norm(u0, 2))
    pair = AdmissiblePair(q=6.0, r=math.inf, d=1)
    coarse = strichartz_norm(u0, pair, T=4.0, n_t=128)
    fine = strichartz_norm(u0, pair, T=4.0, n_t=256)
    assert abs(fine - coarse) / fine < 0.005


def test_strichartz_rejects_small_quadrature():
    lat = Lattice(h=0.5, d=1, M=64)
    pair = AdmissiblePair(q=6.0, r=math.inf, d=1)
    with pytest.raises(ConfigurationError):
        strichartz_norm(point_mass(lat), pair, T=1.0, n_t=16)


def test_strichartz_finite_on_random_mean_zero():
    lat = Lattice(h=0.5, d=1, M=128)
    rng = np.random.default_rng(5)
    v = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    u0 = GridFunction(lat, v - v.mean())
    pair = AdmissiblePair(q=6.0, r=math.inf, d=1)
    from latticewave.spectral import fractional_derivative

    S = strichartz_norm(u0, pair, T=1.0, n_t=64, check_window=False)
    rhs = lp_norm(fractional_derivative(u0, 1.0 / 6.0), 2)
    assert np.isfinite(S / rhs) and S / rhs > 0


# ---------------------------------------------------------------------------
# uniformity scan plumbing

def test_uniformity_scan_single_cell_has_no_fit():
    pair = AdmissiblePair(q=6.0, r=math.inf, d=1)
    scan = uniformity_scan("schrodinger", [0.5], pair, box=32.0, horizon_fraction=0.1, n_t=64)
    assert scan.fits == {}
    assert len(scan.rows) == 1
    assert set(scan.columns) >= {"h", "strichartz", "ratio_with", "ratio_without"}


def test_uniformity_scan_half_wave_mode():
    pair = AdmissiblePair(q=6.0, r=math.inf, d=1)
    scan = uniformity_scan("klein_gordon", [0.5], pair, box=32.0, horizon_fraction=0.1, n_t=64)
    row = scan.rows[0]
    assert row[scan.columns.index("ratio_with")] > 0
    with pytest.raises(ConfigurationError):
        uniformity_scan("klein_gordon", [0.5], AdmissiblePair(q=3.0, r=math.inf, d=2), box=16.0)


def test_uniformity_scan_threads_match_serial():
    pair = AdmissiblePair(q=6.0, r=math.inf, d=1)
    kw = dict(box=32.0, horizon_fraction=0.1, n_t=64)
    serial = uniformity_scan("schrodinger", [1.0, 0.5], pair, threads=1, **kw)
    threaded = uniformity_scan("schrodinger", [1.0, 0.5], pair, threads=2, **kw)
    assert serial.rows == threaded.rows


# ---------------------------------------------------------------------------
# ensembles and constant scans

def test_random_ensemble_is_deterministic_and_mean_zero():
    lat = Lattice(h=0.5, d=1, M=64)
    a = random_ensemble(lat, 8, seed=3, cell_key=1)
    b = random_ensemble(lat, 8, seed=3, cell_key=1)
    for fa, fb in zip(a, b):
        np.testing.assert_array_equal(fa.values, fb.values)
    for f in a:
        assert abs(f.values.mean()) < 1e-12
    c = random_ensemble(lat, 8, seed=4, cell_key=1)
    assert any(np.abs(fa.values - fc.values).max() > 1e-8 for fa, fc in zip(a, c))


def test_bernstein_contraction_at_p_equals_q():
    scan = inequality_constant_scan("bernstein", [1.0, 0.5], box=16.0, d=1,
                                    p=2.0, q=2.0, ensemble=12, seed=0)
    for row in scan.rows:
        assert row[scan.columns.index("max_ratio")] <= 1.0 + 1e-10


def test_constant_scan_validates_hypotheses():
    with pytest.raises(ConfigurationError, match="theta"):
        inequality_constant_scan("gagliardo_nirenberg", [1.0], d=1, p=2.0, q=4.0, s=1.0, theta=1.5)
    with pytest.raises(ConfigurationError, match="1/q = 1/p - theta"):
        inequality_constant_scan("gagliardo_nirenberg", [1.0], d=1, p=2.0, q=4.0, s=1.0, theta=0.3)
    with pytest.raises(ConfigurationError, match="1 < p < q"):
        inequality_constant_scan("sobolev_endpoint", [1.0], d=1, p=1.0, q=2.0, s=0.5)
    with pytest.raises(ConfigurationError):
        inequality_constant_scan("no_such_kind", [1.0])


def test_gagliardo_nirenberg_scan_bounded():
    # 1/q = 1/p - theta*s/d with p=2, s=1, theta=1/2, q=inf in d=1
    scan = inequality_constant_scan("gagliardo_nirenberg", [1.0, 0.5, 0.25], box=16.0, d=1,
                                    p=2.0, q=math.inf, s=1.0, theta=0.5, ensemble=16, seed=1)
    maxima = scan.column("max_ratio")
    assert np.all(maxima > 0)
    assert maxima.max() / maxima.min() < 2.0


def test_norm_equivalence_scan_two_sided():
    scan = inequality_constant_scan("norm_equivalence", [1.0, 0.5], box=16.0, d=1,
                                    p=2.0, s=1.0, ensemble=12, seed=2)
    hi = scan.column("max_ratio_power")
    lo = scan.column("min_ratio_power")
    assert np.all(hi >= lo)
    # p = 2 sandwich from the symbol comparison: ratios within [2/pi, 1]
    assert np.all(hi <= 1.0 + 1e-10)
    assert np.all(lo >= 2.0 / np.pi - 1e-10)


def test_square_function_scan_two_sided():
    scan = inequality_constant_scan("square_function", [1.0, 0.5], box=16.0, d=1,
                                    p=2.0, ensemble=12, seed=3)
    hi = scan.column("max_ratio")
    lo = scan.column("min_ratio")
    assert np.all((lo > 0) & (hi >= lo) & (hi < 2.0))


# ---------------------------------------------------------------------------
# sharpness experiment

def test_knapp_constraint_validation():
    pair = AdmissiblePair(q=8.0, r=8.0, d=1)
    with pytest.raises(ValueError, match="constraint"):
        knapp_experiment(0.25, 0.2, 0.125, pair, M=4096)
    with pytest.raises(ConfigurationError):
        knapp_experiment(0.5, 0.02, 1.0 / 6.0, AdmissiblePair(q=6.0, r=math.inf, d=1), M=4096)


def test_knapp_report_contents():
    pair = AdmissiblePair(q=8.0, r=8.0, d=1)
    rep = knapp_experiment(0.5, 0.04, 0.125, pair, M=2**13, n_t=401, u_window=100.0, x_window=64.0)
    assert rep.left_norm > 0 and rep.right_norm > 0
    assert rep.metadata["surface_points"] > 0
    assert rep.predicted_left_scaling == pytest.approx(0.5**0.125 * (0.04 / 0.5) ** 0.5)


def test_knapp_eps_exponent_fit_smoke():
    pair = AdmissiblePair(q=8.0, r=8.0, d=1)
    reps = [knapp_experiment(0.5, eps, 0.125, pair, M=2**14, n_t=601, u_window=150.0, x_window=128.0)
            for eps in (0.04, 0.02)]
    fits = knapp_eps_exponents(reps)
    assert fits["left"]["slope"] == pytest.approx(0.5, abs=0.1)
    assert fits["right"]["slope"] == pytest.approx(0.5, abs=0.1)
    with pytest.raises(ConfigurationError):
        knapp_eps_exponents(reps[:1])


def test_knapp_h_sharpness_direction():
    pair = AdmissiblePair(q=8.0, r=8.0, d=1)
    scan = knapp_h_sharpness([0.5, 0.25, 0.125], s=0.0, pair=pair,
                             M=2**14, n_t=601, u_window=150.0, x_window=128.0)
    assert scan.fits["ratio"]["slope"] > 0.05  # below-threshold weight: no uniform constant
