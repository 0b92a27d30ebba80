from typing import List, Optional, Tuple
import logging
import math

import numpy as np

from app.core.errors import GeometryError
from app.core.scene import SceneSnapshot
from app.models.selection import OutageReason, SelectionOutcome, Strategy

logger = logging.getLogger("selection")


def _argmax_lowest_id(values: np.ndarray, ids: np.ndarray, mask: Optional[np.ndarray] = None) -> Optional[int]:
    """Index of the maximum over `mask`; equal maxima resolve to the lowest satellite id."""
    idx = np.arange(len(values)) if mask is None else np.flatnonzero(mask)
    if len(idx) == 0:
        return None
    vals = values[idx]
    best = vals.max()
    tied = idx[vals == best]
    return int(tied[np.argmin(ids[tied])])


def select_primary_index(scene: SceneSnapshot) -> Optional[int]:
    if scene.n_primary == 0:
        return None
    return _argmax_lowest_id(scene.snr_u, scene.primary_ids)


def select_primary(scene: SceneSnapshot) -> Optional[int]:
    """Max-SNR primary satellite id, blind to the secondary system; None on outage."""
    i = select_primary_index(scene)
    return None if i is None else int(scene.primary_ids[i])


def absolute_inr_bounds(scene: SceneSnapshot) -> Optional[Tuple[float, float]]:
    if scene.n_primary == 0 or scene.n_secondary == 0:
        return None
    return float(scene.inr_u.max()), float(scene.inr_u.min())


def conditional_inr_bounds(scene: SceneSnapshot, p_star: int) -> Optional[Tuple[float, float]]:
    if scene.n_secondary == 0:
        return None
    row = scene.inr_u[scene.primary_index(p_star)]
    return float(row.max()), float(row.min())


def feasible_mask(scene: SceneSnapshot, p_index: int, inr_th_db: float) -> np.ndarray:
    if math.isinf(inr_th_db) and inr_th_db > 0:
        return np.ones(scene.n_secondary, dtype=bool)
    return scene.inr_u[p_index] <= inr_th_db


def feasible_set(scene: SceneSnapshot, p_star: int, inr_th_db: float) -> List[int]:
    mask = feasible_mask(scene, scene.primary_index(p_star), inr_th_db)
    return [int(s) for s in scene.secondary_ids[mask]]


def feasible_count(scene: SceneSnapshot, p_star: int, inr_th_db: float) -> int:
    return len(feasible_set(scene, p_star, inr_th_db))


def greedy_max_snr_index(scene: SceneSnapshot) -> Optional[int]:
    if scene.n_secondary == 0:
        return None
    return _argmax_lowest_id(scene.snr_v, scene.secondary_ids)


def greedy_max_sinr_index(scene: SceneSnapshot, p_index: int) -> Optional[int]:
    if scene.n_secondary == 0:
        return None
    return _argmax_lowest_id(scene.sinr_v[:, p_index], scene.secondary_ids)


def useful_mask(scene: SceneSnapshot, p_index: int, inr_th_db: float, delta_db: float) -> np.ndarray:
    """Feasible satellites whose SINR is within delta_db of the best interference-free SNR."""
    if delta_db < 0:
        raise ValueError("delta_db must be non-negative")
    best = greedy_max_snr_index(scene)
    if best is None:
        return np.zeros(0, dtype=bool)
    mask = feasible_mask(scene, p_index, inr_th_db)
    if math.isinf(delta_db):
        return mask
    return mask & (scene.sinr_v[:, p_index] >= scene.snr_v[best] - delta_db)


def useful_count(scene: SceneSnapshot, p_star: int, inr_th_db: float, delta_db: float) -> int:
    return int(useful_mask(scene, scene.primary_index(p_star), inr_th_db, delta_db).sum())


def secondary_index(scene: SceneSnapshot, p_index: int, strategy: Strategy, inr_th_db: float) -> Optional[int]:
    if strategy == Strategy.greedy_max_snr:
        return greedy_max_snr_index(scene)
    if strategy == Strategy.greedy_max_sinr:
        return greedy_max_sinr_index(scene, p_index)
    mask = feasible_mask(scene, p_index, inr_th_db)
    if strategy == Strategy.protective_max_snr:
        return _argmax_lowest_id(scene.snr_v, scene.secondary_ids, mask)
    if strategy == Strategy.protective_max_sinr:
        return _argmax_lowest_id(scene.sinr_v[:, p_index], scene.secondary_ids, mask)
    raise ValueError(f"Unsupported selection strategy '{strategy}'")


def select_secondary(scene: SceneSnapshot, p_star: Optional[int], strategy: Strategy,
                     inr_th_db: float, delta_db: Optional[float] = None) -> SelectionOutcome:
    strategy = Strategy(strategy)
    outcome = SelectionOutcome(strategy=strategy, inr_th_db=inr_th_db, primary_choice=p_star)
    if p_star is None or scene.n_primary == 0:
        outcome.outage = OutageReason.no_primary_visible
        return outcome

    pi = scene.primary_index(p_star)
    outcome.snr_p_db = float(scene.snr_u[pi])
    if scene.n_secondary == 0:
        outcome.outage = OutageReason.no_secondary_visible
        outcome.sinr_p_db = outcome.snr_p_db
        return outcome

    outcome.feasible_count = int(feasible_mask(scene, pi, inr_th_db).sum())
    if delta_db is not None:
        outcome.useful_count = int(useful_mask(scene, pi, inr_th_db, delta_db).sum())

    si = secondary_index(scene, pi, strategy, inr_th_db)
    if si is None:
        outcome.outage = OutageReason.none_feasible
        outcome.sinr_p_db = outcome.snr_p_db
        return outcome

    inr_p = float(scene.inr_u[pi, si])
    outcome.secondary_choice = int(scene.secondary_ids[si])
    outcome.inr_at_primary_db = inr_p
    outcome.sinr_p_db = float(scene.sinr_u[pi, si])
    outcome.snr_s_db = float(scene.snr_v[si])
    outcome.sinr_s_db = float(scene.sinr_v[si, pi])
    outcome.constraint_met = bool(inr_p <= inr_th_db)
    return outcome


def angular_separations(user_pos, sat_a_pos, sat_b_pos) -> np.ndarray:
    """Angle (deg) between user->a and user->b; broadcasts over leading axes."""
    user_pos = np.asarray(user_pos, dtype=float)
    a = np.asarray(sat_a_pos, dtype=float) - user_pos
    b = np.asarray(sat_b_pos, dtype=float) - user_pos
    if np.any(np.linalg.norm(a, axis=-1) == 0) or np.any(np.linalg.norm(b, axis=-1) == 0):
        raise GeometryError("Satellite position coincides with the user")
    return angle_between(a, b)


def angle_between(a, b) -> np.ndarray:
    """Angle (deg) between direction vectors, free of arccos precision loss near 0 and 180 deg."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(a * b, axis=-1)
    return np.degrees(np.arctan2(cross, dot))


def angular_separation(user_pos, sat_a_pos, sat_b_pos) -> float:
    return float(angular_separations(user_pos, sat_a_pos, sat_b_pos))
