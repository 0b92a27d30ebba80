from ortools.sat.python import cp_model
from typing import Optional
import logging

import numpy as np

from app.core.errors import SolverError

logger = logging.getLogger("solver")

# --- Constants ---
SINR_SCALE = 1_000_000      # CP-SAT works on integers: SINR in micro-dB
SOLVER_TIMEOUT_S = 10.0
NUM_SEARCH_WORKERS = 1      # single worker keeps the search deterministic


def solve_max_min_cp_sat(sinr_db: np.ndarray, feasible: np.ndarray, ids: np.ndarray) -> Optional[int]:
    """Max-min secondary selection as a CP-SAT model.

    sinr_db[j, k] is the SINR of secondary j against candidate primary k. One boolean
    per robust-feasible satellite, exactly one chosen; `t` is bounded by every entry of
    the chosen row. The objective ranks by `t` first and then by the lowest id, so
    ties resolve the same way as the exhaustive scan (up to the micro-dB quantization).
    Returns the row index of the chosen satellite, or None when nothing is feasible.
    Raises SolverError when the search stops short of a proven optimum.
    """
    rows = [int(j) for j in np.flatnonzero(feasible)]
    if not rows:
        return None

    q = np.round(np.asarray(sinr_db, dtype=float) * SINR_SCALE).astype(np.int64)
    worst = q[rows].min(axis=1)
    lo, hi = int(worst.min()), int(worst.max())
    rank = {j: r for r, j in enumerate(sorted(rows, key=lambda j: ids[j]))}

    model = cp_model.CpModel()
    choose = {j: model.NewBoolVar(f"x_{int(ids[j])}") for j in rows}
    t = model.NewIntVar(lo, hi, "t")
    model.AddExactlyOne(choose.values())
    for r, j in enumerate(rows):
        model.Add(t <= int(worst[r])).OnlyEnforceIf(choose[j])

    n = len(rows)
    model.Maximize(t * n - sum(rank[j] * choose[j] for j in rows))

    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = SOLVER_TIMEOUT_S
    solver.parameters.num_search_workers = NUM_SEARCH_WORKERS
    status = solver.Solve(model)

    if status != cp_model.OPTIMAL:
        raise SolverError(f"CP-SAT max-min selection ended with status {solver.StatusName(status)}")
    chosen = [j for j in rows if solver.Value(choose[j])]
    return chosen[0]
