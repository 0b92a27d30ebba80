from typing import List, Optional
import logging

import numpy as np

from app.core.errors import InvalidInputError, SolverError
from app.core.scene import SceneSnapshot
from app.core.selection import angle_between, feasible_mask
from app.core.solver import solve_max_min_cp_sat
from app.models.selection import OutageReason, RobustConstraint, RobustOutcome, UncertaintyModel

logger = logging.getLogger("uncertainty")

# mu = p* must keep p* in the cone at gamma = 0 despite rounding in the normalization
ANGLE_TOL_DEG = 1e-9


def direction_of(scene: SceneSnapshot, p_star: int) -> np.ndarray:
    """Unit direction from the primary user toward a visible primary satellite."""
    d = scene.primary_pos[scene.primary_index(p_star)] - scene.user_u_pos
    return d / np.linalg.norm(d)


def candidate_indices(scene: SceneSnapshot, model: UncertaintyModel) -> np.ndarray:
    mu = np.asarray(model.mu_direction, dtype=float)
    if abs(np.linalg.norm(mu) - 1.0) > 1e-9:
        raise InvalidInputError("mu_direction must be a unit 3-vector")
    if scene.n_primary == 0:
        return np.zeros(0, dtype=np.int64)
    ang = angle_between(mu, scene.primary_pos - scene.user_u_pos)
    return np.flatnonzero(ang <= model.gamma_deg + ANGLE_TOL_DEG)


def candidate_primary_set(scene: SceneSnapshot, model: UncertaintyModel) -> List[int]:
    """Visible primary satellites within gamma of mu, as seen from the primary user."""
    return [int(p) for p in scene.primary_ids[candidate_indices(scene, model)]]


def _indices_of(scene: SceneSnapshot, candidates) -> np.ndarray:
    return np.array([scene.primary_index(p) for p in candidates], dtype=np.int64)


def robust_feasible_mask(scene: SceneSnapshot, cand_idx: np.ndarray, inr_th_db: float,
                         constraint: RobustConstraint = RobustConstraint.primary_user) -> np.ndarray:
    if len(cand_idx) == 0:
        raise InvalidInputError("Candidate primary set must be nonempty")
    mask = np.ones(scene.n_secondary, dtype=bool)
    for pi in cand_idx:
        if constraint == RobustConstraint.primary_user:
            mask &= feasible_mask(scene, int(pi), inr_th_db)
        else:
            mask &= scene.inr_v[:, pi] <= inr_th_db
    return mask


def robust_feasible_count(scene: SceneSnapshot, candidates: List[int], inr_th_db: float,
                          constraint: RobustConstraint = RobustConstraint.primary_user) -> int:
    return int(robust_feasible_mask(scene, _indices_of(scene, candidates), inr_th_db, constraint).sum())


def _exhaustive_max_min(scene: SceneSnapshot, cand_idx: np.ndarray, mask: np.ndarray) -> Optional[int]:
    worst = scene.sinr_v[:, cand_idx].min(axis=1)
    best = None
    for j in np.flatnonzero(mask):
        if best is None or worst[j] > worst[best] or (
                worst[j] == worst[best] and scene.secondary_ids[j] < scene.secondary_ids[best]):
            best = int(j)
    return best


def max_guaranteed_sinr(scene: SceneSnapshot, candidates: List[int], inr_th_db: float,
                        gamma_deg: float = 0.0,
                        constraint: RobustConstraint = RobustConstraint.primary_user,
                        solver: str = "exhaustive") -> RobustOutcome:
    """Secondary satellite maximizing its worst-case SINR over every candidate primary
    server, restricted to satellites that protect the primary user against all of them."""
    outcome = RobustOutcome(gamma_deg=gamma_deg, inr_th_db=inr_th_db, candidate_set_size=len(candidates))
    if scene.n_primary == 0 or not candidates:
        outcome.outage = OutageReason.no_primary_visible
        return outcome
    if scene.n_secondary == 0:
        outcome.outage = OutageReason.no_secondary_visible
        return outcome

    cand_idx = _indices_of(scene, candidates)
    mask = robust_feasible_mask(scene, cand_idx, inr_th_db, RobustConstraint(constraint))
    outcome.n_feasible_robust = int(mask.sum())

    if solver == "cp_sat":
        try:
            sj = solve_max_min_cp_sat(scene.sinr_v[:, cand_idx], mask, scene.secondary_ids)
        except SolverError as e:
            logger.warning(f"{e}; falling back to exhaustive search at t={scene.t_s}")
            sj = _exhaustive_max_min(scene, cand_idx, mask)
    elif solver == "exhaustive":
        sj = _exhaustive_max_min(scene, cand_idx, mask)
    else:
        raise InvalidInputError(f"Unknown robust solver '{solver}'")

    if sj is None:
        outcome.outage = OutageReason.none_feasible
        return outcome

    row = scene.sinr_v[sj, cand_idx]
    worst_val = row.min()
    tied = cand_idx[row == worst_val]
    pj = int(tied[np.argmin(scene.primary_ids[tied])])
    outcome.s_prime = int(scene.secondary_ids[sj])
    outcome.p_prime = int(scene.primary_ids[pj])
    outcome.guaranteed_sinr_db = float(worst_val)
    return outcome
