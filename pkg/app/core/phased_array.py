"""Uniform planar array with half-wavelength spacing and matched-filter steering.

Directions are unit vectors in the array frame: x and y span the aperture
(x along `rows`, y along `cols`), z is boresight. The array factor of an
N-element half-wavelength line steered to direction cosine u_s and evaluated at
u_e is the Dirichlet kernel |sin(N*pi*du/2) / sin(pi*du/2)|^2 with du = u_e - u_s;
the planar factor is the product over both axes, normalized by rows*cols so the
peak equals rows*cols (the array's maximum gain).
"""
from typing import Optional
import logging
import math

import numpy as np

from app.core.errors import GeometryError, InvalidInputError
from app.models.radio import ArraySpec, Boresight, user_array
from app.utils.helper import clamp_db, parse_array_label, to_db

logger = logging.getLogger("phased_array")

UNIT_TOL = 1e-9


def max_gain(spec: ArraySpec) -> float:
    return float(to_db(spec.num_elements))


def _dirichlet_sq(n: int, du):
    half = 0.5 * np.pi * du
    num = np.sin(n * half)
    den = np.sin(half)
    singular = np.abs(den) < 1e-12
    safe = np.where(singular, 1.0, den)
    return np.where(singular, float(n * n), (num / safe) ** 2)


def steered_gain_linear(rows: int, cols: int, steer_dir, eval_dir) -> np.ndarray:
    """Vectorized linear array gain; broadcasts over leading axes of both direction arrays."""
    steer = np.asarray(steer_dir, dtype=float)
    ev = np.asarray(eval_dir, dtype=float)
    g = _dirichlet_sq(rows, ev[..., 0] - steer[..., 0]) * _dirichlet_sq(cols, ev[..., 1] - steer[..., 1])
    g = g / (rows * cols)
    back = (ev[..., 2] < 0.0) | (steer[..., 2] < 0.0)
    return np.where(back, 0.0, g)


def _check_unit(vec, name):
    v = np.asarray(vec, dtype=float)
    if v.shape[-1:] != (3,) or np.any(np.abs(np.linalg.norm(v, axis=-1) - 1.0) > UNIT_TOL):
        raise InvalidInputError(f"{name} must be a unit 3-vector")
    return v


def steered_gain(spec: ArraySpec, steer_dir, eval_dir) -> float:
    steer = _check_unit(steer_dir, "steer_dir")
    ev = _check_unit(eval_dir, "eval_dir")
    return float(to_db(steered_gain_linear(spec.rows, spec.cols, steer, ev)))


# --- Frames ---

def _normalize(v, what="vector"):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise GeometryError(f"Degenerate {what}")
    return v / n


def user_frame(user_pos) -> np.ndarray:
    """Rows are (East, North, Up) for a ground user."""
    up = _normalize(user_pos, "user position")
    lon = math.atan2(up[1], up[0])
    east = np.array([-math.sin(lon), math.cos(lon), 0.0])
    north = np.cross(up, east)
    return np.stack([east, north, up])


def satellite_frames(sat_pos, sat_vel) -> np.ndarray:
    """Per-satellite rows (x, y, z): z = nadir, x = velocity projected off nadir.
    Shapes: (N, 3) in, (N, 3, 3) out."""
    pos = np.atleast_2d(np.asarray(sat_pos, dtype=float))
    vel = np.atleast_2d(np.asarray(sat_vel, dtype=float))
    nadir = -_normalize(pos, "satellite position")
    x = vel - np.sum(vel * nadir, axis=-1, keepdims=True) * nadir
    if np.any(np.linalg.norm(x, axis=-1) < 1e-9 * np.linalg.norm(vel, axis=-1)):
        raise GeometryError("Satellite velocity is parallel to nadir")
    x = _normalize(x, "velocity projection")
    y = np.cross(nadir, x)
    return np.stack([x, y, nadir], axis=-2)


def to_frame(frames: np.ndarray, origin, target) -> np.ndarray:
    """Unit direction origin -> target expressed in `frames` (rows are the axes)."""
    d = _normalize(np.asarray(target, dtype=float) - np.asarray(origin, dtype=float), "direction")
    return np.einsum("...ij,...j->...i", frames, d)


def array_frame_direction(origin, target, boresight: Boresight,
                          velocity: Optional[np.ndarray] = None) -> np.ndarray:
    """Direction from an array at `origin` toward `target`, in that array's frame."""
    if boresight == Boresight.zenith:
        frame = user_frame(origin)
    else:
        if velocity is None:
            raise GeometryError("Satellite frames need the satellite velocity")
        frame = satellite_frames(origin, velocity)[0]
    return to_frame(frame, origin, target)


def azimuth_cut(spec: ArraySpec, angles_deg, normalize: bool = False) -> np.ndarray:
    """Gain (dB) of a boresight-steered array along the x-z principal plane."""
    th = np.radians(np.asarray(angles_deg, dtype=float))
    ev = np.stack([np.sin(th), np.zeros_like(th), np.cos(th)], axis=-1)
    steer = np.array([0.0, 0.0, 1.0])
    g = to_db(steered_gain_linear(spec.rows, spec.cols, steer, ev))
    if normalize:
        g = g - max_gain(spec)
    return g


def pattern_cut(label: str, step_deg: float = 0.5, normalize: bool = True):
    """Cut of a boresight-steered array from -90 to 90 deg; -inf nulls clamped for output."""
    spec = user_array(*parse_array_label(label))
    angles = np.arange(-90.0, 90.0 + step_deg / 2, step_deg)
    return spec, angles, clamp_db(azimuth_cut(spec, angles, normalize=normalize))
