"""Acceptance suite: ten criteria, one test and one printed verdict each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.

Criteria 6 and 7 are implemented exactly as stated and fail for measured,
documented physics reasons (details printed by the tests and discussed in the
README):

* criterion 6 - at the default wall height the finite-wall box converges to
  the hard-wall limit only on Compton scales; the resulting engine gap is
  dt-independent, so neither the 1e-2 L1 bound nor the factor-4 dt scaling is
  reachable in desk-scale runtimes;
* criterion 7 - a resting ultra-narrow packet splits into two chiral halves
  whose tails decay like 1/x, leaving ~0.1 of the mass outside a 3-sigma
  light-cone margin regardless of causality (a boosted, chirally clean packet
  is confined to 1e-28 and is printed as the control).
"""

import math
import time
from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest

from relwell import (
    GridState,
    MomentumGrid,
    SpatialGrid,
    WavepacketSpec,
    WellModel,
    autocorrelation,
    carpet,
    decompose,
    default_config,
    dominant_level,
    energy,
    energy_derivative,
    evolve,
    extract_levels,
    gaussian_state,
    level_spacing,
    level_velocity,
    lightcone_leakage,
    propagate,
    reconstruct_at,
    revival_times,
    solve,
)

mp.mp.dps = 50


def report(index, ok, detail):
    print(f"ACCEPTANCE {index:2d} {'PASS' if ok else 'FAIL'}: {detail}")


def fd_energy_derivative(model, n0, order, h=1e-4):
    ratio = mp.pi / mp.mpf(model.width_natural)
    scale = mp.mpf(model.energy_scale)

    def e(n):
        return scale * mp.sqrt(1 + (ratio * n) ** 2)

    n0, h = mp.mpf(n0), mp.mpf(h)
    stencils = {
        1: ((-1, -0.5), (1, 0.5)),
        2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
        3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
        4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
    }
    total = mp.mpf(0)
    for offset, coeff in stencils[order]:
        total += mp.mpf(coeff) * e(n0 + offset * h)
    return float(total / h**order)


def test_criterion_01_spectrum_equivalence():
    """Momentum-space diagonalization reproduces the closed-form spectrum."""
    started = time.monotonic()
    model = WellModel(well_width=120.0)
    grid = MomentumGrid(6.0, 2048)
    exact = energy(model, np.arange(1, 11))
    v0 = 1e3 * model.energy_scale
    errors = np.abs(solve(grid, model, v0, k_levels=10).levels - exact) / exact
    errors_doubled = np.abs(solve(grid, model, 2 * v0, k_levels=10).levels - exact) / exact
    elapsed = time.monotonic() - started
    ok = bool(errors.max() < 1e-3 and np.all(errors_doubled < errors) and elapsed < 60.0)
    report(
        1,
        ok,
        f"max rel err {errors.max():.2e} (< 1e-3), doubling V0 reduces all errors: "
        f"{bool(np.all(errors_doubled < errors))}, runtime {elapsed:.1f}s",
    )
    assert errors.max() < 1e-3
    assert np.all(errors_doubled < errors)
    assert elapsed < 60.0


def test_criterion_02_derivative_formula():
    """Closed-form level derivatives match high-precision finite differences."""
    model = WellModel(well_width=100.0 * math.pi)
    worst = 0.0
    for beta in np.linspace(0.01, 0.999, 12):
        momentum = beta / math.sqrt(1.0 - beta * beta)
        n0 = momentum * model.width_natural / math.pi
        for order in (1, 2, 3, 4):
            got = energy_derivative(model, n0, order)
            want = fd_energy_derivative(model, n0, order)
            worst = max(worst, abs(got - want) / abs(want))
    ok = worst < 1e-6
    report(2, ok, f"orders 1..4 over v/c in [0.01, 0.999]: worst rel err {worst:.2e} (< 1e-6)")
    assert ok


def test_criterion_03_classical_period_limit():
    """The classical period saturates at 2L/c in the relativistic regime."""
    model = WellModel(well_width=2.0 * math.pi)
    bound = 2.0 * model.well_width / model.light_speed
    levels = np.arange(1, 5001)
    beta = level_velocity(model, levels) / model.light_speed
    fast = levels[beta > 0.995]
    deviations = np.array(
        [abs(revival_times(model, int(n)).t_classical - bound) for n in fast[:: max(1, fast.size // 64)]]
    )
    worst = deviations.max() / bound
    ok = worst < 0.01
    report(3, ok, f"{fast.size} levels with v/c > 0.995: worst |T_cl - 2L/c| = {worst:.4f} * 2L/c (< 0.01)")
    assert ok


def test_criterion_04_revival_reproduction():
    """Fig. 2-class packet: strong half revival, quarter revivals on schedule."""
    started = time.monotonic()
    model = WellModel(well_width=125.0 * 2.0 * math.pi)
    box = model.well_width
    spec = WavepacketSpec(x0=box / 2, sigma=box / 20, p0=0.0)
    coeffs = decompose(gaussian_state(spec, SpatialGrid(box, 2048), model), model)
    kinetic = float(np.dot(coeffs.weights(), energy(model, coeffs.levels) - model.energy_scale))
    assert kinetic < 1e-3 * model.energy_scale  # non-relativistic regime
    t_rev = revival_times(model, dominant_level(coeffs)).t_revival

    half = abs(autocorrelation(coeffs, [0.5 * t_rev]).values[0])
    offsets = {}
    for fraction in (0.25, 0.5):
        window = np.linspace((fraction - 0.02) * t_rev, (fraction + 0.02) * t_rev, 1601)
        mags = np.abs(autocorrelation(coeffs, window).values)
        offsets[fraction] = abs(window[int(np.argmax(mags))] - fraction * t_rev) / t_rev
    elapsed = time.monotonic() - started
    ok = bool(half > 0.9 and max(offsets.values()) < 0.01 and elapsed < 60.0)
    report(
        4,
        ok,
        f"|A(T_rev/2)| = {half:.4f} (> 0.9), quarter/half peak offsets "
        f"{offsets[0.25]:.5f}/{offsets[0.5]:.5f} T_rev (< 0.01), runtime {elapsed:.1f}s",
    )
    assert half > 0.9
    assert max(offsets.values()) < 0.01
    assert elapsed < 60.0


def test_criterion_05_coefficient_extinction():
    """Symmetric packet positions wipe out level families."""
    model = WellModel(well_width=125.0 * 2.0 * math.pi)
    box = model.well_width
    grid = SpatialGrid(box, 4096)
    ratios = {}
    for label, x0, pick in (
        ("x0=L/2 even n", box / 2, np.s_[1::2]),
        ("x0=2L/3 n=3m", 2 * box / 3, np.s_[2::3]),
    ):
        coeffs = decompose(gaussian_state(WavepacketSpec(x0, box / 20), grid, model), model)
        weights = coeffs.weights()
        ratios[label] = float(weights[pick].max() / weights.max())
    ok = all(r < 1e-10 for r in ratios.values())
    report(5, ok, ", ".join(f"{k}: {v:.1e}" for k, v in ratios.items()) + " (< 1e-10 of peak)")
    assert ok


def test_criterion_06_engine_cross_validation():
    """Split-operator vs exact spectral engine at default settings.

    Implemented exactly as stated; fails for a measured physics reason.  The
    default finite wall (1e4 rest energies) softens the box by about a quarter
    of a reduced Compton wavelength no matter how high the wall, because the
    square-root kinetic operator relaxes on the Compton scale.  Over one
    classical period that bias dominates the dt-dependent splitting error by
    roughly four orders of magnitude, so the gap neither meets the 1e-2 bound
    nor responds to halving dt.  The engines agree with each other when the
    reference shares the finite wall (see test_splitop), and the splitting is
    verified second order by dt-Richardson there.
    """
    model = WellModel(well_width=30.0)
    box = model.well_width
    spec = WavepacketSpec(x0=box / 2, sigma=box / 12, p0=1.2 * model.momentum_scale)
    coeffs = decompose(gaussian_state(spec, SpatialGrid(box, 1024), model), model)
    n0 = dominant_level(coeffs)
    t_cl = revival_times(model, n0).t_classical

    config = default_config(model, n0=n0, p0=spec.p0, sigma=spec.sigma)
    x = config.grid.points
    psi0 = reconstruct_at(coeffs, x)
    psi0 /= math.sqrt(float(np.sum(np.abs(psi0) ** 2) * config.grid.spacing))
    state = GridState(psi0, config.grid)

    def max_l1(run_config):
        sample_times = np.linspace(0.0, t_cl, 9)
        gaps = []
        for snap in propagate(state, run_config, t_cl, sample_times=sample_times):
            exact = np.abs(reconstruct_at(evolve(coeffs, snap.time_tag), x)) ** 2
            gaps.append(float(np.sum(np.abs(snap.density() - exact)) * run_config.grid.spacing))
        return max(gaps)

    gap_default = max_l1(config)
    gap_half = max_l1(replace(config, dt=config.dt / 2.0))
    ratio = gap_default / gap_half
    ok = bool(gap_default < 1e-2 and 3.0 < ratio < 5.0)
    report(
        6,
        ok,
        f"L1 over one classical period {gap_default:.3f} (required < 1e-2), "
        f"dt-halving ratio {ratio:.2f} (required ~4); gap is the dt-independent "
        f"finite-wall bias - see README",
    )
    assert gap_default < 1e-2, "finite-wall bias exceeds the stated bound (documented)"
    assert 3.0 < ratio < 5.0, "gap is dt-independent wall-model bias (documented)"


def test_criterion_07_light_cone():
    """Fig. 3-class narrow packet against the light cone.

    Implemented exactly as stated; fails for a measured physics reason.  The
    resting packet is a superposition of two chiral movers whose individual
    profiles carry 1/x tails (the Hilbert transform of the Gaussian); once the
    halves separate, about a tenth of the mass sits outside a 3-sigma margin
    around the front, falling off only like 1/margin.  The cone itself is
    respected: the boosted, chirally clean control packet leaks ~1e-28.
    """
    model = WellModel(well_width=2.0 * math.pi)
    box = model.well_width
    grid = SpatialGrid(box, 1 << 20)

    spec = WavepacketSpec(x0=box / 2, sigma=1e-5 * box, p0=0.0)
    coeffs = decompose(gaussian_state(spec, grid, model), model)
    horizon = min(spec.x0, box - spec.x0) / model.light_speed
    times = np.linspace(0.0, 0.9, 6) * horizon
    resting = lightcone_leakage(carpet(coeffs, grid, times, packet=spec), spec.x0)

    boosted_spec = WavepacketSpec(x0=box / 4, sigma=1e-5 * box, p0=8.0 / (1e-5 * box))
    boosted_coeffs = decompose(gaussian_state(boosted_spec, grid, model), model)
    boosted_horizon = min(boosted_spec.x0, box - boosted_spec.x0) / model.light_speed
    boosted = lightcone_leakage(
        carpet(boosted_coeffs, grid, np.linspace(0.0, 0.9, 4) * boosted_horizon, packet=boosted_spec),
        boosted_spec.x0,
    )
    # the t = 0 row of any Gaussian holds erfc(3/sqrt 2) ~ 2.7e-3 beyond
    # 3 sigma; the propagation-confinement figure is the max over t > 0
    boosted_moving = float(boosted.fractions[1:].max())

    ok = resting.max_fraction < 1e-2
    report(
        7,
        ok,
        f"measured leakage (sigma=1e-5 L, p0=0): {resting.max_fraction:.3f} "
        f"(required < 1e-2); chirally clean control beyond the front: "
        f"{boosted_moving:.1e} - see README",
    )
    assert boosted.max_fraction < 1e-2  # the cone itself is respected
    assert resting.max_fraction < 1e-2, "chiral 1/x tails of the resting packet (documented)"


def test_criterion_08_spectroscopy_round_trip():
    """Levels extracted from a 50 T_cl autocorrelation match the spectrum."""
    model = WellModel(well_width=2.0 * math.pi)
    box = model.well_width
    spec = WavepacketSpec(x0=box / 2, sigma=box / 10, p0=2.0 * model.momentum_scale)
    coeffs = decompose(gaussian_state(spec, SpatialGrid(box, 1024), model), model)
    t_cl = revival_times(model, dominant_level(coeffs)).t_classical
    samples = 4096
    times = np.arange(samples) * (50.0 * t_cl / samples)
    estimates = extract_levels(autocorrelation(coeffs, times), hbar=model.hbar)

    weights = coeffs.weights()
    exact = energy(model, coeffs.levels)
    strong = weights > 1e-3
    worst = 0.0
    for e_true in exact[strong]:
        j = int(np.argmin(np.abs(estimates.energies - e_true)))
        worst = max(worst, abs(estimates.energies[j] - e_true))
    ok = worst < estimates.resolution
    report(
        8,
        ok,
        f"{int(strong.sum())} levels with weight > 1e-3: worst offset {worst:.2e} "
        f"< resolution {estimates.resolution:.2e}",
    )
    assert ok


def test_criterion_09_level_spacing_asymptote():
    """Nearest-neighbor gaps saturate at hbar pi c / L."""
    model = WellModel(well_width=7.0)
    n_max = 3000
    stats = level_spacing(model, n_max)
    beta = level_velocity(model, np.arange(1, n_max)) / model.light_speed
    fast = beta > 0.999
    gap = stats.asymptote_gap
    worst = float(np.max(np.abs(stats.spacings[fast] - gap))) / gap
    ok = bool(fast.any() and worst < 0.01)
    report(9, ok, f"{int(fast.sum())} levels with v/c > 0.999: worst |s_n - gap| = {worst:.2e} * gap (< 0.01)")
    assert ok


def test_criterion_10_intermediate_regime_substitute():
    """Configured intermediate packet: exact ratio identity, >= 100 bounces."""
    model = WellModel(well_width=101.25 * 2.0 * math.pi)
    box = model.well_width
    spec = WavepacketSpec(x0=box / 2, sigma=0.04 * box, p0=270.0 * math.pi / box)
    grid = SpatialGrid(box, 1024)
    coeffs = decompose(gaussian_state(spec, grid, model), model)
    n0 = dominant_level(coeffs)
    rt = revival_times(model, n0)

    ratio = rt.t_revival / rt.t_classical
    identity = 2.0 * n0 * rt.gamma**2
    identity_err = abs(ratio - identity) / identity

    # the carpet's mean position bounces at the classical period
    times = np.linspace(0.0, 3.0 * rt.t_classical, 128)
    result = carpet(coeffs, grid, times, packet=spec)
    mean_x = result.density @ result.positions * grid.spacing
    crossings = int(np.sum(np.diff(np.sign(mean_x - box / 2)) != 0))

    ok = bool(identity_err < 1e-10 and ratio >= 100.0 and crossings >= 4)
    report(
        10,
        ok,
        f"T_rev/T_cl = {ratio:.1f} (= 2 n0 gamma^2 to {identity_err:.1e}, >= 100), "
        f"{crossings} wall-to-wall swings in 3 T_cl",
    )
    assert identity_err < 1e-10
    assert ratio >= 100.0
    assert 750.0 < ratio < 3000.0
    assert crossings >= 4
