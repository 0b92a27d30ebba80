from dataclasses import dataclass
from typing import List, Optional, Sequence, Union
import logging
import math

import numpy as np
import pandas as pd

from app.core.errors import GeometryError, InvalidInputError
from app.models.constellation import ConstellationSpec, SatelliteState
from app.models.geometry import GroundUser

logger = logging.getLogger("constellation")

# --- Constants ---
R_EARTH_M = 6371.0e3
MU_EARTH = 3.986004418e14
OMEGA_EARTH = 7.2921159e-5  # sidereal rate, rad/s


def orbital_period_s(altitude_km: float) -> float:
    a = R_EARTH_M + altitude_km * 1e3
    return 2.0 * math.pi * math.sqrt(a ** 3 / MU_EARTH)


def build_constellation(spec: ConstellationSpec, seed_phasing: Optional[int] = None) -> List[SatelliteState]:
    """Walker-Delta layout of every shell: planes evenly spread over 360 deg of RAAN,
    satellites evenly spread in anomaly, inter-plane offset F*360/(P*S)."""
    F = spec.seed_phasing if seed_phasing is None else seed_phasing
    raan_offset = math.radians(spec.raan_offset_deg)
    sats = []
    sat_id = 0
    for shell_idx, shell in enumerate(spec.shells):
        a = R_EARTH_M + shell.altitude_km * 1e3
        n = 2.0 * math.pi / orbital_period_s(shell.altitude_km)
        N = shell.num_planes
        M = shell.sats_per_plane
        delta_f = 2.0 * math.pi * F / (N * M)
        epoch_shift = n * spec.epoch_offset_s
        for k in range(N):
            raan = (2.0 * math.pi * k / N + raan_offset) % (2.0 * math.pi)
            for j in range(M):
                phase = (2.0 * math.pi * j / M + delta_f * k + epoch_shift) % (2.0 * math.pi)
                sats.append(SatelliteState(
                    id=sat_id, shell=shell, shell_index=shell_idx,
                    raan_rad=raan, arg_phase_rad=phase,
                    semi_major_axis_m=a, mean_motion_rad_s=n
                ))
                sat_id += 1
    logger.debug(f"Built {spec.name}: {len(sats)} satellites in {len(spec.shells)} shells")
    return sats


def _inertial(raan, phase, inc, a):
    cO, sO = np.cos(raan), np.sin(raan)
    cu, su = np.cos(phase), np.sin(phase)
    ci, si = np.cos(inc), np.sin(inc)
    pos = np.stack([cO * cu - sO * su * ci, sO * cu + cO * su * ci, su * si], axis=-1)
    # d(pos)/d(phase); scale by a*n for the inertial velocity
    dpos = np.stack([-cO * su - sO * cu * ci, -sO * su + cO * cu * ci, cu * si], axis=-1)
    a = np.asarray(a)[..., None]
    return a * pos, a * dpos


def _earth_fixed(vec, t):
    th = OMEGA_EARTH * t
    c, s = math.cos(th), math.sin(th)
    x, y, z = vec[..., 0], vec[..., 1], vec[..., 2]
    return np.stack([c * x + s * y, -s * x + c * y, z], axis=-1)


@dataclass(frozen=True)
class ConstellationArrays:
    """Column view of a constellation for vectorized propagation."""
    ids: np.ndarray
    raan: np.ndarray
    phase0: np.ndarray
    inclination: np.ndarray
    sma: np.ndarray
    mean_motion: np.ndarray
    altitude_km: np.ndarray
    shell_index: np.ndarray

    @classmethod
    def from_states(cls, sats: Sequence[SatelliteState]) -> "ConstellationArrays":
        return cls(
            ids=np.array([s.id for s in sats], dtype=np.int64),
            raan=np.array([s.raan_rad for s in sats]),
            phase0=np.array([s.arg_phase_rad for s in sats]),
            inclination=np.array([s.inclination_rad for s in sats]),
            sma=np.array([s.semi_major_axis_m for s in sats]),
            mean_motion=np.array([s.mean_motion_rad_s for s in sats]),
            altitude_km=np.array([s.shell.altitude_km for s in sats]),
            shell_index=np.array([s.shell_index for s in sats], dtype=np.int64),
        )

    def __len__(self):
        return len(self.ids)

    def positions(self, t: float) -> np.ndarray:
        pos, _ = _inertial(self.raan, self.phase0 + self.mean_motion * t, self.inclination, self.sma)
        return _earth_fixed(pos, t)

    def velocities(self, t: float) -> np.ndarray:
        phase = self.phase0 + self.mean_motion * t
        pos, dpos = _inertial(self.raan, phase, self.inclination, self.sma)
        return _earth_fixed_velocity(_earth_fixed(pos, t), _earth_fixed(dpos * self.mean_motion[:, None], t))


def _earth_fixed_velocity(pos_e, vel_rotated):
    # v_ecef = R(t) v_eci - omega x r_ecef
    corr = np.stack([OMEGA_EARTH * pos_e[..., 1], -OMEGA_EARTH * pos_e[..., 0],
                     np.zeros_like(pos_e[..., 2])], axis=-1)
    return vel_rotated + corr


def propagate_ecef(sat: SatelliteState, t: float) -> np.ndarray:
    pos, _ = _inertial(sat.raan_rad, sat.arg_phase_rad + sat.mean_motion_rad_s * t,
                       sat.inclination_rad, sat.semi_major_axis_m)
    return _earth_fixed(pos, t)


def propagate_velocity_ecef(sat: SatelliteState, t: float) -> np.ndarray:
    pos, dpos = _inertial(sat.raan_rad, sat.arg_phase_rad + sat.mean_motion_rad_s * t,
                          sat.inclination_rad, sat.semi_major_axis_m)
    return _earth_fixed_velocity(_earth_fixed(pos, t), _earth_fixed(dpos * sat.mean_motion_rad_s, t))


def geodetic_to_ecef(lat_deg: float, lon_deg: float, alt_m: float = 0.0) -> np.ndarray:
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    r = R_EARTH_M + alt_m
    return np.array([r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat)])


def user_ecef(user: GroundUser) -> np.ndarray:
    return geodetic_to_ecef(user.lat_deg, user.lon_deg, user.alt_m)


def offset_east(lat_deg: float, lon_deg: float, distance_m: float) -> tuple[float, float]:
    """Point `distance_m` due East along the parallel (spherical Earth)."""
    if distance_m == 0:
        return lat_deg, lon_deg
    coslat = math.cos(math.radians(lat_deg))
    if coslat < 1e-12:
        raise GeometryError("Cannot offset East from a pole")
    dlon = math.degrees(distance_m / (R_EARTH_M * coslat))
    lon = (lon_deg + dlon + 180.0) % 360.0 - 180.0
    return lat_deg, lon


def elevation_angles(user_pos: np.ndarray, sat_pos: np.ndarray) -> np.ndarray:
    user_pos = np.asarray(user_pos, dtype=float)
    d = np.asarray(sat_pos, dtype=float) - user_pos
    rng = np.linalg.norm(d, axis=-1)
    if np.any(rng == 0):
        raise GeometryError("Satellite and user positions coincide")
    up = user_pos / np.linalg.norm(user_pos)
    s = np.clip((d @ up) / rng, -1.0, 1.0)
    return np.degrees(np.arcsin(s))


def elevation_angle(user_pos: np.ndarray, sat_pos: np.ndarray) -> float:
    return float(elevation_angles(user_pos, np.asarray(sat_pos, dtype=float)[None, :])[0])


def visible_set(user_pos: np.ndarray,
                sats: Union[Sequence[SatelliteState], ConstellationArrays],
                t: float, eps_min_deg: float) -> List[int]:
    if not 0.0 <= eps_min_deg <= 90.0:
        raise InvalidInputError(f"eps_min_deg must lie in [0, 90], got {eps_min_deg}")
    arrays = sats if isinstance(sats, ConstellationArrays) else ConstellationArrays.from_states(sats)
    if len(arrays) == 0:
        return []
    elev = elevation_angles(user_pos, arrays.positions(t))
    return [int(i) for i in arrays.ids[elev >= eps_min_deg]]


def dump_positions(arrays: ConstellationArrays, times: Sequence[float]) -> pd.DataFrame:
    """Long table t_s, sat_id, x_m, y_m, z_m (ECEF), ordered by time then id."""
    frames = []
    for t in times:
        pos = arrays.positions(t)
        frames.append(pd.DataFrame({"t_s": float(t), "sat_id": arrays.ids.astype(np.int64),
                                    "x_m": pos[:, 0], "y_m": pos[:, 1], "z_m": pos[:, 2]}))
    if not frames:
        return pd.DataFrame(columns=["t_s", "sat_id", "x_m", "y_m", "z_m"])
    return pd.concat(frames, ignore_index=True)
