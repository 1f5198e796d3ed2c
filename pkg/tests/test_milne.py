"""Half-space layer solver: classification, exact profiles, monotone iteration."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgkcoupling import (
    ConeError,
    DiscreteDistribution,
    LayerClass,
    LayerData,
    LayerGrid,
    VelocityGrid,
    back_flux,
    classify,
    confinement_norm,
    flux_moment,
    golse_iterate,
    maxwellian,
    maxwellian_values,
    relaxation_layer_profile,
    solve_layer,
    start_profile,
)

VG = VelocityGrid(1.0, 40)
GRID = LayerGrid(10.0, 200)


def half_range(values):
    return DiscreteDistribution(VG, np.where(VG.positive, values, 0.0))


def random_profile(rng, grid=GRID, vg=VG):
    raw = rng.uniform(0.0, 1.0, (grid.n_cells + 1, vg.n_cells))
    return np.where(vg.positive, raw, -raw)


def test_layer_data_validation():
    g = maxwellian(0.5, VG)
    with pytest.raises(ConeError):
        LayerData(0.7, g)  # above the largest flux the velocity interval carries
    with pytest.raises(ConeError):
        LayerData(-0.1, g)
    bad = DiscreteDistribution(VG, maxwellian_values(-0.5, VG))
    with pytest.raises(ValueError):
        LayerData(0.1, bad)  # nonzero values on the incoming xi < 0 half


def test_classification_regimes():
    g = maxwellian(0.6, VG)
    v_in = flux_moment(g)
    assert classify(LayerData(v_in, g)) is LayerClass.RELAXATION
    assert classify(LayerData(v_in + 0.05, g)) is LayerClass.SHOCK
    with pytest.raises(ConeError):
        classify(LayerData(v_in - 0.05, g))


def test_golse_iterate_matches_sequential_recurrence():
    # oracle: the same exponential-integrator sweep written as an explicit
    # node-by-node loop
    rng = np.random.default_rng(0)
    data = LayerData(0.3, half_range(rng.uniform(0.0, 1.0, VG.n_cells)))
    values = random_profile(rng)
    out = golse_iterate(data, GRID, values)

    u = VG.dxi * values.sum(axis=1)
    src = np.array([maxwellian_values(float(ui), VG) for ui in u])
    dy = GRID.dy
    expect = np.empty_like(values)
    for j, xi in enumerate(VG.centers):
        h = dy / abs(xi)
        decay = np.exp(-h)
        a = -np.expm1(-h)
        w_far = 1.0 - a / h if xi > 0 else a / h - decay
        w_near = a - w_far
        if xi > 0:
            expect[0, j] = data.incoming.values[j]
            for k in range(GRID.n_cells):
                expect[k + 1, j] = decay * expect[k, j] + w_near * src[k, j] + w_far * src[k + 1, j]
        else:
            expect[-1, j] = src[-1, j]
            for k in range(GRID.n_cells - 1, -1, -1):
                expect[k, j] = decay * expect[k + 1, j] + w_near * src[k, j] + w_far * src[k + 1, j]
    np.testing.assert_allclose(out, expect, atol=1e-12)


def test_iterate_monotone_in_input():
    rng = np.random.default_rng(1)
    data = LayerData(0.3, half_range(rng.uniform(0.0, 0.9, VG.n_cells)))
    lo = random_profile(rng)
    hi = np.clip(lo + rng.uniform(0.0, 0.1, lo.shape), -1.0, 1.0)
    hi = np.where(VG.positive, np.clip(hi, 0.0, 1.0), np.clip(hi, -1.0, 0.0))
    lo = np.minimum(lo, hi)
    out_lo = golse_iterate(data, GRID, lo)
    out_hi = golse_iterate(data, GRID, hi)
    assert (out_hi - out_lo).min() >= -1e-12


def test_exact_relaxation_profile():
    g = maxwellian(0.6, VG)
    prof = solve_layer(LayerData(0.18, g), GRID)
    assert prof.classification is LayerClass.RELAXATION
    assert prof.u_infinity == pytest.approx(0.6, abs=1e-9)
    target = maxwellian_values(0.6, VG)
    worst = max(VG.dxi * np.abs(prof.values[k] - target).sum() for k in range(prof.values.shape[0]))
    assert worst < 1e-8
    assert prof.min_increment >= -1e-12


def test_exact_shock_profile():
    zero = DiscreteDistribution(VG, np.zeros(VG.n_cells))
    prof = solve_layer(LayerData(0.18, zero), GRID)
    assert prof.classification is LayerClass.SHOCK
    assert prof.u_infinity == pytest.approx(-0.6, abs=1e-12)
    target = maxwellian_values(-0.6, VG)
    worst = max(VG.dxi * np.abs(prof.values[k] - target).sum() for k in range(prof.values.shape[0]))
    assert worst < 1e-12  # the far equilibrium seed is already the solution


def test_flux_profile_constant():
    g = maxwellian(0.6, VG)
    prof = solve_layer(LayerData(0.18, g), GRID)
    dev = np.abs(prof.flux_profile() - 0.18).max()
    assert dev < 1e-6


def test_solver_independent_of_start():
    rng = np.random.default_rng(3)
    vals = np.zeros(VG.n_cells)
    vals[VG.positive] = 0.5
    data = LayerData(0.25, DiscreteDistribution(VG, vals))
    cold = solve_layer(data, GRID)
    warm = solve_layer(data, GRID, start=random_profile(rng))
    assert np.abs(cold.values - warm.values).max() < 1e-7


def test_back_flux_halves():
    vals = np.zeros(VG.n_cells)
    vals[VG.positive] = 0.5
    relax = solve_layer(LayerData(0.25, DiscreteDistribution(VG, vals)), GRID)
    assert np.abs(back_flux(relax).values).max() == 0.0
    shock = solve_layer(LayerData(0.18, DiscreteDistribution(VG, np.zeros(VG.n_cells))), GRID)
    bf = back_flux(shock)
    assert np.all(bf.values[VG.positive] == 0.0)
    assert bf.values.min() < -0.9  # the returning stream carries the far state


def test_flux_defect_refines_with_dy():
    # the transport weights integrate a piecewise-linear-in-y source exactly,
    # so the flux constancy defect in the transition region should shrink at
    # roughly second order when the node spacing halves
    vals = np.zeros(VG.n_cells)
    vals[VG.positive] = 0.5
    data = LayerData(0.25, DiscreteDistribution(VG, vals))
    devs = []
    for n_y in (100, 200, 400):
        prof = solve_layer(data, LayerGrid(10.0, n_y))
        devs.append(np.abs(prof.flux_profile() - 0.25).max())
    assert devs[0] > devs[1] > devs[2]
    assert devs[0] / devs[1] > 2.5
    assert devs[1] / devs[2] > 2.5


def test_relaxation_march_matches_sweep():
    for u in (0.25, 0.6, 0.85):
        g = maxwellian(u, VG)
        data = LayerData(flux_moment(g), g)
        sweep = solve_layer(data, GRID)
        march = relaxation_layer_profile(data, GRID)
        assert march.classification is LayerClass.RELAXATION
        assert np.abs(sweep.values - march.values).max() < 1e-6
        assert np.all(march.values[:, ~VG.positive] == 0.0)


def test_relaxation_march_rejects_shock_data():
    zero = DiscreteDistribution(VG, np.zeros(VG.n_cells))
    with pytest.raises(ValueError):
        relaxation_layer_profile(LayerData(0.18, zero), GRID)


def test_confinement_norm_decreases_with_distance():
    g = maxwellian(0.6, VG)
    prof = solve_layer(LayerData(0.18, g), GRID)
    # the exact equilibrium profile has essentially no excess mass anywhere
    assert confinement_norm(prof) < 1e-7


def test_start_profile_shapes():
    g = maxwellian(0.6, VG)
    relax_seed = start_profile(LayerData(0.18, g), LayerClass.RELAXATION, GRID)
    assert not relax_seed.any()
    shock_seed = start_profile(LayerData(0.18, g), LayerClass.SHOCK, GRID)
    np.testing.assert_array_equal(shock_seed[0], maxwellian_values(-0.6, VG))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31),
    flux=st.floats(min_value=0.0, max_value=0.5),
)
def test_iterate_preserves_admissibility(seed, flux):
    rng = np.random.default_rng(seed)
    g = half_range(rng.uniform(0.0, 1.0, VG.n_cells))
    data = LayerData(max(flux, float(flux_moment(g))), g)
    out = golse_iterate(data, GRID, random_profile(rng))
    assert out[:, VG.positive].min() >= -1e-13
    assert out[:, VG.positive].max() <= 1.0 + 1e-13
    assert out[:, ~VG.positive].max() <= 1e-13
    assert out[:, ~VG.positive].min() >= -1.0 - 1e-13
