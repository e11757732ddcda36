import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from uplink_se.errors import ConfigError, DomainError
from uplink_se.network import (
    WEAK,
    AttenuationDraw,
    Geometric,
    ScenarioSpec,
    Synthetic,
    TwoCellBounded,
    bs_positions,
    compute_b,
    generate_attenuation,
    make_draw,
    noise_floor,
    noise_power_from_snr_db,
    sample_attenuation,
    snr_db_from_noise_power,
    substream,
)

from conftest import small_config

attenuations = arrays(
    float, st.tuples(st.integers(1, 4), st.integers(1, 5)).map(lambda s: (s[0], s[0], s[1])),
    elements=st.floats(1e-3, 1e3),
)


def test_b_single_cell_oracle():
    b = compute_b(np.ones((1, 1, 1)), 100, 1.0)
    assert b[0, 0, 0] == pytest.approx(100 / 101, rel=1e-15)


def test_noise_floor_single_cell_oracle():
    draw = make_draw(np.ones((1, 1, 1)), 100, 1.0)
    assert noise_floor(draw, None, 1.0)[0] == pytest.approx(1.009901, abs=1e-6)


def test_b_zero_for_silent_interferer():
    d = np.ones((2, 2, 3))
    d[0, 1, 1] = 0.0
    b = compute_b(d, 10, 1.0)
    assert b[0, 1, 1] == 0.0
    assert np.all(b[0, 1, [0, 2]] > 0)


def test_b_vanishes_with_huge_noise():
    b = compute_b(np.ones((3, 3, 2)), 10, 1e300)
    assert np.all(b < 1e-298)


@pytest.mark.parametrize("d,tau,s2", [(-np.ones((1, 1, 1)), 1, 1.0), (np.ones((1, 1, 1)), 0, 1.0),
                                      (np.ones((1, 1, 1)), 1, 0.0), (np.ones((1, 1, 1)), 1, -1.0)])
def test_b_domain_errors(d, tau, s2):
    with pytest.raises(DomainError):
        compute_b(d, tau, s2)


@given(attenuations, st.integers(1, 500), st.floats(1e-6, 1e3))
def test_b_bounds_and_formula(d, tau, s2):
    b = compute_b(d, tau, s2)
    assert np.all(b >= 0) and np.all(b < 1)
    assert np.all(b.sum(axis=1) < 1)
    d2 = d ** 2
    expect = tau * d2 / (s2 + tau * d2.sum(axis=1, keepdims=True))
    np.testing.assert_array_equal(b, expect)


@given(attenuations, st.integers(1, 500), st.floats(1e-6, 1e3))
def test_b_strictly_increasing_in_tau(d, tau, s2):
    assert np.all(compute_b(d, tau + 1, s2) > compute_b(d, tau, s2))


@given(attenuations, st.integers(1, 500))
def test_b_sums_to_one_without_noise(d, tau):
    assert np.all(1 - compute_b(d, tau, 1e-14).sum(axis=1) < 1e-6)


def test_noise_floor_perfect_estimation():
    d = np.full((2, 2, 3), 0.7)
    draw = AttenuationDraw(d, np.ones_like(d))
    np.testing.assert_allclose(noise_floor(draw, None, 0.3), 0.3)


@given(attenuations, st.floats(1e-3, 10), st.floats(0.01, 1.0))
def test_noise_floor_linear_in_zeta(d, s2, z):
    draw = make_draw(d, 5, s2)
    full = noise_floor(draw, None, s2, 1.0)
    part = noise_floor(draw, None, s2, z)
    np.testing.assert_allclose(full - part, (1 - z) * s2, rtol=1e-9, atol=1e-12 * full.max())


def test_noise_floor_active_subset():
    d = np.arange(1, 28, dtype=float).reshape(3, 3, 3) / 10
    draw = make_draw(d, 4, 0.5)
    resid = (1 - draw.b) * draw.d ** 2
    got = noise_floor(draw, [2, 0], 0.5, 0.5)
    expect = [resid[k][[0, 2]].sum() + 0.25 for k in (0, 2)]
    np.testing.assert_allclose(got, expect, rtol=1e-12)


@pytest.mark.parametrize("kw", [dict(active_cells=[]), dict(zeta=0.0), dict(zeta=1.5), dict(active_cells=[5])])
def test_noise_floor_errors(kw):
    draw = make_draw(np.ones((2, 2, 1)), 4, 1.0)
    args = dict(active_cells=None, zeta=1.0)
    args.update(kw)
    with pytest.raises(ConfigError):
        noise_floor(draw, args["active_cells"], 1.0, args["zeta"])


@pytest.mark.parametrize("kw", [dict(pilot_symbols=3), dict(pilot_symbols=200), dict(cells=0),
                                dict(noise_power=0.0), dict(antennas=2.5)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        small_config(**kw)


def test_config_derived_quantities():
    c = small_config(users_per_cell=40, antennas=200, pilot_symbols=100, coherence_symbols=1000)
    assert c.ratio * c.antennas == c.users_per_cell
    assert c.prelog == 0.9 and c.data_symbols == 900
    assert c.replace(pilot_symbols=200).prelog < c.prelog


@given(st.floats(-60, 60))
def test_snr_round_trip(x):
    assert snr_db_from_noise_power(noise_power_from_snr_db(x)) == pytest.approx(x, rel=1e-15, abs=1e-13)
    s2 = noise_power_from_snr_db(x)
    assert noise_power_from_snr_db(snr_db_from_noise_power(s2)) == pytest.approx(s2, rel=1e-14)


def test_generate_is_deterministic():
    cfg = small_config()
    a = generate_attenuation(cfg, WEAK, 99, 3)
    b = generate_attenuation(cfg, WEAK, 99, 3)
    np.testing.assert_array_equal(a.d, b.d)
    np.testing.assert_array_equal(a.b, b.b)
    c = generate_attenuation(cfg, WEAK, 99, 4)
    assert not np.array_equal(a.d, c.d)


def test_draw_is_immutable():
    draw = generate_attenuation(small_config(), WEAK, 1)
    with pytest.raises(ValueError):
        draw.d[0, 0, 0] = 1.0


def test_substreams_ignore_call_order():
    x = substream(5, 1, 2).random(3)
    substream(5, 9, 9).random(100)
    np.testing.assert_array_equal(x, substream(5, 1, 2).random(3))


def test_two_cell_point_mass():
    scen = ScenarioSpec(TwoCellBounded(1, 1, 1, 1))
    draw = generate_attenuation(small_config(cells=2), scen, 0)
    np.testing.assert_array_equal(draw.d ** 2, 1.0)


def test_two_cell_supports():
    scen = ScenarioSpec(TwoCellBounded(100, 200, 0.5, 1))
    d2 = sample_attenuation(2, 5000, scen, np.random.default_rng(0)) ** 2
    direct = d2[[0, 1], [0, 1]]
    cross = d2[[0, 1], [1, 0]]
    assert direct.min() >= 100 and direct.max() <= 200
    assert cross.min() >= 0.5 and cross.max() <= 1


def test_two_cell_needs_two_cells():
    with pytest.raises(ConfigError):
        generate_attenuation(small_config(cells=3), ScenarioSpec(TwoCellBounded(1, 2, 1, 2)), 0)


@pytest.mark.parametrize("args", [(2, 1, 1, 1), (1, 1, 0, 1), (-1, 1, 1, 1)])
def test_two_cell_invalid(args):
    with pytest.raises(ConfigError):
        TwoCellBounded(*args)


def test_synthetic_direct_link_without_shadowing():
    d = sample_attenuation(5, 4000, ScenarioSpec(Synthetic(3.0), 0.0), np.random.default_rng(1))
    direct = d[np.arange(5), np.arange(5)]
    # C^2 = U[1, 2] on the direct link, so d = 1 / U
    assert direct.min() >= 0.5 and direct.max() <= 1.0


def test_synthetic_cross_index_is_cyclic():
    d = sample_attenuation(3, 20000, ScenarioSpec(Synthetic(1.0), 0.0), np.random.default_rng(2))
    # (k - l) mod 3 == 1 for (1, 0), (2, 1), (0, 2)
    med = np.median(d, axis=2)
    np.testing.assert_allclose([med[1, 0], med[2, 1], med[0, 2]], np.exp(-1) / 1.5, rtol=0.03)


def test_shadowing_is_amplitude_lognormal():
    # 20 log10 d = G - 20 log10 U with G ~ N(0, 8^2) and U ~ U[1, 2]
    db = 20 * np.log10(sample_attenuation(1, 200000, ScenarioSpec(Synthetic(0.0), 8.0), np.random.default_rng(3)).ravel())
    u_db = 20 * np.log10(np.random.default_rng(4).uniform(1, 2, 200000))
    assert np.std(db) == pytest.approx(np.sqrt(64 + np.var(u_db)), rel=0.01)
    assert np.mean(db) == pytest.approx(-np.mean(u_db), abs=0.06)


def test_interference_ratio_shrinks_with_alpha():
    meds = []
    for alpha in (0.25, 1.0, 3.0):
        d = sample_attenuation(5, 4000, ScenarioSpec(Synthetic(alpha)), np.random.default_rng(7))
        d2 = d ** 2
        own = d2[np.arange(5), np.arange(5)]
        cross = d2[0, 1:] / own[None, 0]
        meds.append(np.median(cross))
    assert meds[0] > meds[1] > meds[2]


def test_geometric_layout():
    geo = Geometric(1.0)
    pos = bs_positions(5, geo)
    np.testing.assert_allclose(pos[0], [500, 500])
    np.testing.assert_allclose(np.linalg.norm(pos[1:] - pos[0], axis=1), 300)


@pytest.mark.parametrize("seed", range(3))
def test_geometric_nearest_association(seed):
    scen = ScenarioSpec(Geometric(1.0), 0.0)
    d = sample_attenuation(5, 300, scen, np.random.default_rng(seed))
    dist = d ** -0.5  # C = d^{-1/2} without shadowing
    serving = dist[np.arange(5), np.arange(5)]
    assert np.all(serving <= dist.min(axis=0) * (1 + 1e-12))
    assert dist.min() >= 10 * (1 - 1e-12)


def test_geometric_random_association_breaks_nearest():
    scen = ScenarioSpec(Geometric(0.0), 0.0)
    d = sample_attenuation(5, 300, scen, np.random.default_rng(0))
    dist = d ** -0.5
    serving = dist[np.arange(5), np.arange(5)]
    # p = 0 never picks the nearest BS; only clamped ties can coincide
    assert np.mean(serving <= dist.min(axis=0) * (1 + 1e-12)) < 0.05


@pytest.mark.parametrize("kw", [dict(p=1.5), dict(p=0.5, circle_radius_m=600), dict(p=0.5, min_distance_m=0)])
def test_geometric_invalid(kw):
    with pytest.raises(ConfigError):
        Geometric(**kw)
