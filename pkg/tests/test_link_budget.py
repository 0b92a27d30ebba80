import math

import numpy as np
import pytest

from app.core.constellation import elevation_angles, propagate_ecef, propagate_velocity_ecef
from app.core.errors import InvalidInputError
from app.core.link_budget import (
    fspl_db, inr, inr_threshold_from_delta_t, link_metrics, noise_power_dbw, power_control_db,
    sinr, snr, spectral_efficiency_loss, tx_power_dbw,
)
from app.core.phased_array import array_frame_direction, max_gain
from app.core.scenario import build_context, city_users
from app.core.scene import build_scene
from app.models.constellation import STARLINK_SHELLS, SystemRole
from app.models.radio import Boresight, ProtectionThreshold, RadioConfig, parse_threshold, user_array
from app.models.scenario import ScenarioConfig
from app.utils.helper import to_db, to_linear

from tests.helpers import direct_sum_gain_linear


@pytest.fixture
def radio():
    return RadioConfig()


def test_threshold_from_noise_rise():
    assert inr_threshold_from_delta_t(0.06) == pytest.approx(-12.2, abs=0.05)
    with pytest.raises(InvalidInputError):
        inr_threshold_from_delta_t(0.0)


def test_spectral_efficiency_loss_examples():
    assert 0.05 <= spectral_efficiency_loss(-15.0, -12.2) <= 0.06
    assert 0.45 <= spectral_efficiency_loss(-30.0, 0.0) <= 0.50
    assert spectral_efficiency_loss(10.0, -math.inf) == pytest.approx(0.0)


def test_fspl_at_550_km(radio):
    assert fspl_db(550e3, radio.carrier_hz) == pytest.approx(173.28, abs=0.05)
    # 6 dB per doubling of range
    assert fspl_db(1100e3, radio.carrier_hz) - fspl_db(550e3, radio.carrier_hz) == pytest.approx(6.0206, abs=1e-4)
    with pytest.raises(InvalidInputError):
        fspl_db(0.0, radio.carrier_hz)


def test_fspl_vectorized(radio):
    out = fspl_db(np.array([550e3, 1100e3]), radio.carrier_hz)
    assert out.shape == (2,)


def test_noise_power(radio):
    assert noise_power_dbw(radio) == pytest.approx(-116.78, abs=0.01)
    assert noise_power_dbw(radio, noise_figure_db=0.0) == pytest.approx(-117.98, abs=0.01)


def test_power_control_boosts_higher_shells(radio):
    assert power_control_db(radio, 540, 540) == 0.0
    assert power_control_db(radio, 570, 540) == pytest.approx(0.47, abs=0.01)
    tight = radio.model_copy(update={"power_control_limit_db": 0.2})
    assert power_control_db(tight, 570, 540) == pytest.approx(0.2)
    off = radio.model_copy(update={"power_control": False})
    assert power_control_db(off, 570, 540) == 0.0


def test_tx_power_from_eirp_density(radio):
    g = max_gain(radio.satellite_array)
    p = tx_power_dbw(radio, SystemRole.primary, STARLINK_SHELLS[0], g, ref_altitude_km=540)
    assert p == pytest.approx(-54.3 + 10 * math.log10(400e6) - g)
    s = tx_power_dbw(radio, SystemRole.secondary, STARLINK_SHELLS[0], g, ref_altitude_km=540)
    assert s - p == pytest.approx(1.0)


def test_snr_and_inr_share_the_budget(radio):
    n = noise_power_dbw(radio)
    a = float(snr(-4.0, 36.0, 30.0, 600e3, radio))
    b = float(inr(-4.0, 36.0, 30.0, 600e3, radio, noise_dbw=n))
    assert a == pytest.approx(b)
    assert float(inr(-4.0, -math.inf, 30.0, 600e3, radio)) == -math.inf


def test_sinr_properties():
    assert sinr(10.0, 0.0) == pytest.approx(10.0 - 10 * math.log10(2))
    assert sinr(10.0, -math.inf) == pytest.approx(10.0)
    values = sinr(np.linspace(-10, 20, 31)[:, None], np.linspace(-40, 10, 11)[None, :])
    assert np.all(values <= np.linspace(-10, 20, 31)[:, None] + 1e-12)


def test_link_metrics_consistent():
    m = link_metrics(8.0, -3.0, -116.78)
    assert m.sinr_db == pytest.approx(sinr(8.0, -3.0))
    assert m.received_signal_dbw == pytest.approx(-108.78)
    assert m.interference_dbw == pytest.approx(-119.78)


def test_protection_threshold_parsing():
    assert parse_threshold("unconstrained") == math.inf
    assert parse_threshold(None) == math.inf
    assert parse_threshold(-12.2) == -12.2
    assert ProtectionThreshold(inr_th_db="unconstrained").label == "unconstrained"
    with pytest.raises(ValueError):
        parse_threshold(float("nan"))
    with pytest.raises(ValueError):
        parse_threshold(-math.inf)


# --- Full scene against a straight-line recomputation ---

@pytest.fixture(scope="module")
def default_context():
    return build_context(ScenarioConfig(user_separation_m=5000.0))


def _direction(system, sat_id, origin, target, t):
    sat = system.satellites[sat_id]
    return array_frame_direction(origin, target, Boresight.nadir, propagate_velocity_ecef(sat, t))


def _link_db(tx_dbw, g_tx_lin, g_rx_lin, a, b, radio, nf):
    d = float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    path_loss = 20.0 * math.log10(4.0 * math.pi * d * radio.carrier_hz / 299792458.0)
    noise = radio.noise_psd_dbm_hz - 30.0 + 10.0 * math.log10(radio.bandwidth_hz) + nf
    return tx_dbw + 10.0 * math.log10(g_tx_lin) + 10.0 * math.log10(g_rx_lin) - path_loss - noise


def test_scene_matrices_match_recomputation_from_positions(default_context):
    ctx = default_context
    cfg = ctx.config
    radio = cfg.radio
    sat = radio.satellite_array
    primary, secondary = ctx.primary, ctx.secondary
    assert np.array_equal(primary.arrays.ids, np.arange(len(primary.arrays)))
    assert np.array_equal(secondary.arrays.ids, np.arange(len(secondary.arrays)))

    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(20):
        city = cfg.cities[int(rng.integers(len(cfg.cities)))]
        t = float(rng.uniform(0.0, 86400.0))
        n = int(rng.choice([8, 16, 32]))
        u, v = city_users(cfg, city, user_array(n))
        scene = build_scene(t, u, v, primary, secondary, radio, cfg.eps_min_deg)
        u_pos, v_pos = scene.user_u_pos, scene.user_v_pos

        pos_p = {int(p): propagate_ecef(primary.satellites[int(p)], t) for p in primary.arrays.ids}
        pos_s = {int(s): propagate_ecef(secondary.satellites[int(s)], t) for s in secondary.arrays.ids}
        elev_p = elevation_angles(u_pos, np.array(list(pos_p.values())))
        elev_s = elevation_angles(v_pos, np.array(list(pos_s.values())))
        vis_p = [p for p, e in zip(pos_p, elev_p) if e >= cfg.eps_min_deg]
        vis_s = [s for s, e in zip(pos_s, elev_s) if e >= cfg.eps_min_deg]
        assert list(scene.primary_ids) == vis_p
        assert list(scene.secondary_ids) == vis_s

        for i, p in enumerate(vis_p):
            expected = _link_db(primary.tx_power_dbw[p], sat.num_elements, n * n, pos_p[p], u_pos,
                                radio, u.noise_figure_db)
            assert scene.snr_u[i] == pytest.approx(expected, abs=1e-9)
        for j, s in enumerate(vis_s):
            expected = _link_db(secondary.tx_power_dbw[s], sat.num_elements, n * n, pos_s[s], v_pos,
                                radio, v.noise_figure_db)
            assert scene.snr_v[j] == pytest.approx(expected, abs=1e-9)

        pairs = [(i, j) for i in range(len(vis_p)) for j in range(len(vis_s))]
        for k in rng.permutation(len(pairs))[:40]:
            i, j = pairs[k]
            p, s = vis_p[i], vis_s[j]

            # u steered at p, hit by s steered at v
            g_tx = direct_sum_gain_linear(sat.rows, sat.cols, _direction(secondary, s, pos_s[s], v_pos, t),
                                          _direction(secondary, s, pos_s[s], u_pos, t))
            g_rx = direct_sum_gain_linear(n, n, array_frame_direction(u_pos, pos_p[p], Boresight.zenith),
                                          array_frame_direction(u_pos, pos_s[s], Boresight.zenith))
            tol = 1e-9 if min(g_tx, g_rx) > 1e-4 else 1e-3
            expected = _link_db(secondary.tx_power_dbw[s], g_tx, g_rx, pos_s[s], u_pos, radio, u.noise_figure_db)
            assert scene.inr_u[i, j] == pytest.approx(expected, abs=tol)

            # v steered at s, hit by p steered at u
            g_tx = direct_sum_gain_linear(sat.rows, sat.cols, _direction(primary, p, pos_p[p], u_pos, t),
                                          _direction(primary, p, pos_p[p], v_pos, t))
            g_rx = direct_sum_gain_linear(n, n, array_frame_direction(v_pos, pos_s[s], Boresight.zenith),
                                          array_frame_direction(v_pos, pos_p[p], Boresight.zenith))
            tol = 1e-9 if min(g_tx, g_rx) > 1e-4 else 1e-3
            expected = _link_db(primary.tx_power_dbw[p], g_tx, g_rx, pos_p[p], v_pos, radio, v.noise_figure_db)
            assert scene.inr_v[j, i] == pytest.approx(expected, abs=tol)
            checked += 2
    assert checked > 500


def test_noise_figure_shifts_snr_and_inr(default_context):
    ctx = default_context
    cfg = ctx.config
    city = cfg.cities[0]
    base_u, base_v = city_users(cfg, city, user_array(16))
    noisy_u = base_u.model_copy(update={"noise_figure_db": base_u.noise_figure_db + 3.0})
    noisy_v = base_v.model_copy(update={"noise_figure_db": base_v.noise_figure_db + 3.0})
    for t in (0.0, 900.0):
        a = build_scene(t, base_u, base_v, ctx.primary, ctx.secondary, cfg.radio, cfg.eps_min_deg)
        b = build_scene(t, noisy_u, noisy_v, ctx.primary, ctx.secondary, cfg.radio, cfg.eps_min_deg)
        assert b.noise_u_dbw - a.noise_u_dbw == pytest.approx(3.0)
        for name in ("snr_u", "snr_v", "inr_u", "inr_v"):
            np.testing.assert_allclose(getattr(b, name), getattr(a, name) - 3.0, atol=1e-9)


def test_db_linear_round_trip():
    x = np.linspace(-200.0, 50.0, 2501)
    assert np.max(np.abs(to_db(to_linear(x)) - x)) <= 1e-12
    assert to_db(0.0) == -math.inf
