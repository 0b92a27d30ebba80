from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple
import logging

import numpy as np

from app.core.constellation import (
    ConstellationArrays, build_constellation, elevation_angle, elevation_angles, propagate_ecef,
    propagate_velocity_ecef, user_ecef,
)
from app.core.link_budget import inr, noise_power_dbw, sinr, snr, tx_power_dbw
from app.core.phased_array import (
    array_frame_direction, max_gain, satellite_frames, steered_gain_linear, to_frame, user_frame,
)
from app.models.constellation import ConstellationSpec, SatelliteState
from app.models.geometry import GroundUser, LinkGeometry
from app.models.radio import ArraySpec, Boresight, RadioConfig
from app.utils.helper import to_db

logger = logging.getLogger("scene")


@dataclass(frozen=True)
class SystemState:
    """A propagated-on-demand constellation with its per-satellite transmit power."""
    spec: ConstellationSpec
    satellites: Tuple[SatelliteState, ...]
    arrays: ConstellationArrays
    tx_power_dbw: np.ndarray
    sat_array: ArraySpec


def build_system(spec: ConstellationSpec, radio: RadioConfig) -> SystemState:
    sats = build_constellation(spec)
    arrays = ConstellationArrays.from_states(sats)
    g_max = max_gain(radio.satellite_array)
    ref = spec.reference_altitude_km
    per_shell = np.array([tx_power_dbw(radio, spec.role, shell, g_max, ref) for shell in spec.shells])
    return SystemState(spec=spec, satellites=tuple(sats), arrays=arrays,
                       tx_power_dbw=per_shell[arrays.shell_index], sat_array=radio.satellite_array)


@dataclass(frozen=True)
class SceneSnapshot:
    """Everything selection needs at one instant. Matrices are read-only.

    inr_u[i, j]: INR at primary user u served by primary_ids[i] from secondary_ids[j].
    inr_v[j, i]: INR at secondary user v served by secondary_ids[j] from primary_ids[i].
    """
    t_s: float
    user_u_pos: np.ndarray
    user_v_pos: np.ndarray
    primary_ids: np.ndarray
    secondary_ids: np.ndarray
    primary_pos: np.ndarray
    secondary_pos: np.ndarray
    snr_u: np.ndarray
    snr_v: np.ndarray
    inr_u: np.ndarray
    inr_v: np.ndarray
    noise_u_dbw: float = 0.0
    noise_v_dbw: float = 0.0
    elev_p: np.ndarray = field(default=None)
    elev_s: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("primary_ids", "secondary_ids", "primary_pos", "secondary_pos",
                     "snr_u", "snr_v", "inr_u", "inr_v", "elev_p", "elev_s"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def n_primary(self) -> int:
        return len(self.primary_ids)

    @property
    def n_secondary(self) -> int:
        return len(self.secondary_ids)

    @cached_property
    def sinr_u(self) -> np.ndarray:
        return np.asarray(sinr(self.snr_u[:, None], self.inr_u))

    @cached_property
    def sinr_v(self) -> np.ndarray:
        return np.asarray(sinr(self.snr_v[:, None], self.inr_v))

    def primary_index(self, sat_id: int) -> int:
        return int(np.flatnonzero(self.primary_ids == sat_id)[0])

    def secondary_index(self, sat_id: int) -> int:
        return int(np.flatnonzero(self.secondary_ids == sat_id)[0])


def link_geometry(system: SystemState, sat_id: int, user_pos: np.ndarray, t_s: float) -> LinkGeometry:
    """Range, elevation and both array-frame directions of one user-satellite link."""
    sat = system.satellites[int(np.flatnonzero(system.arrays.ids == sat_id)[0])]
    sat_pos = propagate_ecef(sat, t_s)
    sat_vel = propagate_velocity_ecef(sat, t_s)
    d_user = array_frame_direction(user_pos, sat_pos, Boresight.zenith)
    d_sat = array_frame_direction(sat_pos, user_pos, Boresight.nadir, sat_vel)
    return LinkGeometry(
        range_m=float(np.linalg.norm(sat_pos - user_pos)),
        elevation_deg=elevation_angle(user_pos, sat_pos),
        dir_user_frame=tuple(float(x) for x in d_user),
        dir_sat_frame=tuple(float(x) for x in d_sat),
    )


def _gain_db(array: ArraySpec, steer, ev):
    return to_db(steered_gain_linear(array.rows, array.cols, steer, ev))


def build_scene(t_s: float, user_u: GroundUser, user_v: GroundUser,
                primary: SystemState, secondary: SystemState,
                radio: RadioConfig, eps_min_deg: float) -> SceneSnapshot:
    u_pos = user_ecef(user_u)
    v_pos = user_ecef(user_v)

    pos_p_all = primary.arrays.positions(t_s)
    pos_s_all = secondary.arrays.positions(t_s)
    elev_p_all = elevation_angles(u_pos, pos_p_all)
    elev_s_all = elevation_angles(v_pos, pos_s_all)
    P = np.flatnonzero(elev_p_all >= eps_min_deg)
    S = np.flatnonzero(elev_s_all >= eps_min_deg)

    pos_p, pos_s = pos_p_all[P], pos_s_all[S]
    frames_p = satellite_frames(pos_p, primary.arrays.velocities(t_s)[P])
    frames_s = satellite_frames(pos_s, secondary.arrays.velocities(t_s)[S])
    u_frame, v_frame = user_frame(u_pos), user_frame(v_pos)

    noise_u = noise_power_dbw(radio, user_u.noise_figure_db)
    noise_v = noise_power_dbw(radio, user_v.noise_figure_db)
    tx_p = primary.tx_power_dbw[P]
    tx_s = secondary.tx_power_dbw[S]

    r_up = np.linalg.norm(pos_p - u_pos, axis=-1)
    r_us = np.linalg.norm(pos_s - u_pos, axis=-1)
    r_vs = np.linalg.norm(pos_s - v_pos, axis=-1)
    r_vp = np.linalg.norm(pos_p - v_pos, axis=-1)

    # matched links attain peak gain at both ends
    snr_u = snr(tx_p, max_gain(primary.sat_array), max_gain(user_u.array), r_up, radio, noise_u)
    snr_v = snr(tx_s, max_gain(secondary.sat_array), max_gain(user_v.array), r_vs, radio, noise_v)

    d_u_p = to_frame(u_frame, u_pos, pos_p)
    d_u_s = to_frame(u_frame, u_pos, pos_s)
    d_v_s = to_frame(v_frame, v_pos, pos_s)
    d_v_p = to_frame(v_frame, v_pos, pos_p)
    d_p_u = to_frame(frames_p, pos_p, u_pos)
    d_p_v = to_frame(frames_p, pos_p, v_pos)
    d_s_v = to_frame(frames_s, pos_s, v_pos)
    d_s_u = to_frame(frames_s, pos_s, u_pos)

    # rows index the victim's serving satellite, columns the interferer
    g_tx_s_u = _gain_db(secondary.sat_array, d_s_v, d_s_u)
    g_rx_u = _gain_db(user_u.array, d_u_p[:, None, :], d_u_s[None, :, :])
    inr_u = inr(tx_s[None, :], g_tx_s_u[None, :], g_rx_u, r_us[None, :], radio, noise_u)

    g_tx_p_v = _gain_db(primary.sat_array, d_p_u, d_p_v)
    g_rx_v = _gain_db(user_v.array, d_v_s[:, None, :], d_v_p[None, :, :])
    inr_v = inr(tx_p[None, :], g_tx_p_v[None, :], g_rx_v, r_vp[None, :], radio, noise_v)

    return SceneSnapshot(
        t_s=t_s, user_u_pos=u_pos, user_v_pos=v_pos,
        primary_ids=primary.arrays.ids[P], secondary_ids=secondary.arrays.ids[S],
        primary_pos=pos_p, secondary_pos=pos_s,
        snr_u=np.asarray(snr_u, dtype=float).reshape(len(P)),
        snr_v=np.asarray(snr_v, dtype=float).reshape(len(S)),
        inr_u=np.broadcast_to(np.asarray(inr_u, dtype=float), (len(P), len(S))),
        inr_v=np.broadcast_to(np.asarray(inr_v, dtype=float), (len(S), len(P))),
        noise_u_dbw=noise_u, noise_v_dbw=noise_v,
        elev_p=elev_p_all[P], elev_s=elev_s_all[S],
    )
