from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence
import logging
import math
import time

import pandas as pd

from app.core.constellation import offset_east
from app.core.globals import progress_state, scenario_results
from app.core.scene import SceneSnapshot, SystemState, build_scene, build_system, link_geometry
from app.core.selection import (
    absolute_inr_bounds, angular_separations, conditional_inr_bounds, feasible_mask,
    greedy_max_sinr_index, greedy_max_snr_index, select_primary_index, select_secondary, useful_mask,
)
from app.core.uncertainty import candidate_primary_set, direction_of, max_guaranteed_sinr
from app.models.geometry import GroundUser, UserRole
from app.models.radio import ArraySpec, user_array
from app.models.scenario import CitySpec, ScenarioConfig
from app.models.selection import OutageReason, Strategy, UncertaintyModel
from app.utils.helper import parse_array_label

logger = logging.getLogger("scenario")

BOUNDS_COLUMNS = [
    "city", "array", "t_s", "n_primary", "n_secondary", "p_star", "snr_p_db", "noise_dbw",
    "inr_max_db", "inr_min_db", "inr_max_cond_db", "inr_min_cond_db",
]

SELECTION_COLUMNS = [
    "city", "array", "t_s", "strategy", "inr_th_db", "p_star", "s_choice",
    "snr_p_db", "sinr_p_db", "snr_s_db", "sinr_s_db", "inr_p_db",
    "n_feasible", "n_useful", "sep_deg", "elev_s_deg", "outage",
    "outage_reason", "constraint_met", "n_primary", "n_secondary",
    "s_greedy_snr", "s_greedy_sinr", "sep_greedy_snr_deg", "sep_greedy_sinr_deg",
]

UNCERTAINTY_COLUMNS = SELECTION_COLUMNS + [
    "gamma_deg", "n_feasible_robust", "guaranteed_sinr_db", "guaranteed_sinr_norm_db",
    "p_worst", "candidate_set_size",
]

NO_ID = -1


def useful_column(delta_db: float) -> str:
    return f"n_useful_{delta_db:g}db"


@dataclass(frozen=True)
class ScenarioContext:
    config: ScenarioConfig
    primary: SystemState
    secondary: SystemState
    arrays: Dict[str, ArraySpec]


def build_context(config: ScenarioConfig) -> ScenarioContext:
    primary = build_system(config.primary, config.radio)
    secondary = build_system(config.secondary, config.radio)
    arrays = {label: user_array(*parse_array_label(label))
              for label in dict.fromkeys(config.user_arrays + config.uncertainty_arrays)}
    logger.info(f"Built {config.primary.name} ({len(primary.arrays)} sats) and "
                f"{config.secondary.name} ({len(secondary.arrays)} sats)")
    return ScenarioContext(config=config, primary=primary, secondary=secondary, arrays=arrays)


def city_users(config: ScenarioConfig, city: CitySpec, array: ArraySpec):
    nf = config.radio.noise_figure_db
    u = GroundUser(lat_deg=city.lat_deg, lon_deg=city.lon_deg, alt_m=city.alt_m,
                   array=array, noise_figure_db=nf, role=UserRole.primary)
    lat_v, lon_v = offset_east(city.lat_deg, city.lon_deg, config.user_separation_m)
    v = GroundUser(lat_deg=lat_v, lon_deg=lon_v, alt_m=city.alt_m,
                   array=array, noise_figure_db=nf, role=UserRole.secondary)
    return u, v


def scene_at(ctx: ScenarioContext, city: CitySpec, label: str, t_s: float) -> SceneSnapshot:
    u, v = city_users(ctx.config, city, ctx.arrays[label])
    return build_scene(t_s, u, v, ctx.primary, ctx.secondary, ctx.config.radio, ctx.config.eps_min_deg)


def _id(x):
    return NO_ID if x is None else int(x)


def _sep(scene: SceneSnapshot, a_pos, b_pos) -> float:
    return float(angular_separations(scene.user_u_pos, a_pos, b_pos))


def bounds_row(city: str, label: str, scene: SceneSnapshot, p_idx: Optional[int]) -> dict:
    row = {"city": city, "array": label, "t_s": scene.t_s,
           "n_primary": scene.n_primary, "n_secondary": scene.n_secondary,
           "p_star": NO_ID, "snr_p_db": math.nan, "noise_dbw": scene.noise_u_dbw,
           "inr_max_db": math.nan, "inr_min_db": math.nan,
           "inr_max_cond_db": math.nan, "inr_min_cond_db": math.nan}
    if p_idx is None:
        return row
    p_star = int(scene.primary_ids[p_idx])
    row["p_star"] = p_star
    row["snr_p_db"] = float(scene.snr_u[p_idx])
    absolute = absolute_inr_bounds(scene)
    if absolute is not None:
        row["inr_max_db"], row["inr_min_db"] = absolute
        row["inr_max_cond_db"], row["inr_min_cond_db"] = conditional_inr_bounds(scene, p_star)
    return row


class StepEvaluator:
    """Builds every metric row of one (city, array, timestep) scene."""

    def __init__(self, config: ScenarioConfig, city: str, label: str, scene: SceneSnapshot):
        self.config = config
        self.city = city
        self.label = label
        self.scene = scene
        self.p_idx = select_primary_index(scene)
        self.p_star = None if self.p_idx is None else int(scene.primary_ids[self.p_idx])
        if self.p_idx is not None and scene.n_secondary:
            self.g_snr = greedy_max_snr_index(scene)
            self.g_sinr = greedy_max_sinr_index(scene, self.p_idx)
        else:
            self.g_snr = self.g_sinr = None

    def base_row(self, strategy: str, inr_th_db: float) -> dict:
        scene = self.scene
        row = {
            "city": self.city, "array": self.label, "t_s": scene.t_s,
            "strategy": strategy, "inr_th_db": inr_th_db,
            "p_star": _id(self.p_star), "s_choice": NO_ID,
            "snr_p_db": math.nan, "sinr_p_db": math.nan, "snr_s_db": math.nan,
            "sinr_s_db": math.nan, "inr_p_db": math.nan,
            "n_feasible": 0, "n_useful": 0, "sep_deg": math.nan, "elev_s_deg": math.nan,
            "outage": True, "outage_reason": OutageReason.no_primary_visible.value,
            "constraint_met": False,
            "n_primary": scene.n_primary, "n_secondary": scene.n_secondary,
            "s_greedy_snr": NO_ID if self.g_snr is None else int(scene.secondary_ids[self.g_snr]),
            "s_greedy_sinr": NO_ID if self.g_sinr is None else int(scene.secondary_ids[self.g_sinr]),
            "sep_greedy_snr_deg": math.nan, "sep_greedy_sinr_deg": math.nan,
        }
        for d in self.config.useful_deltas_db:
            row[useful_column(d)] = 0
        if self.p_idx is None:
            return row
        row["snr_p_db"] = float(scene.snr_u[self.p_idx])
        row["sinr_p_db"] = row["snr_p_db"]
        if scene.n_secondary == 0:
            row["outage_reason"] = OutageReason.no_secondary_visible.value
            return row
        row["n_feasible"] = int(feasible_mask(scene, self.p_idx, inr_th_db).sum())
        row["n_useful"] = int(useful_mask(scene, self.p_idx, inr_th_db, self.config.useful_delta_db).sum())
        for d in self.config.useful_deltas_db:
            row[useful_column(d)] = int(useful_mask(scene, self.p_idx, inr_th_db, d).sum())
        return row

    def fill_choice(self, row: dict, s_choice: Optional[int], inr_th_db: float):
        if s_choice is None:
            return row
        scene = self.scene
        si = scene.secondary_index(s_choice)
        pi = self.p_idx
        s_pos = scene.secondary_pos[si]
        row.update({
            "s_choice": s_choice,
            "sinr_p_db": float(scene.sinr_u[pi, si]),
            "snr_s_db": float(scene.snr_v[si]),
            "sinr_s_db": float(scene.sinr_v[si, pi]),
            "inr_p_db": float(scene.inr_u[pi, si]),
            "sep_deg": _sep(scene, s_pos, scene.primary_pos[pi]),
            "elev_s_deg": float(scene.elev_s[si]),
            "outage": False, "outage_reason": OutageReason.none.value,
            "constraint_met": bool(scene.inr_u[pi, si] <= inr_th_db),
            "sep_greedy_snr_deg": _sep(scene, s_pos, scene.secondary_pos[self.g_snr]),
            "sep_greedy_sinr_deg": _sep(scene, s_pos, scene.secondary_pos[self.g_sinr]),
        })
        return row

    def selection_rows(self) -> List[dict]:
        rows = []
        for th in self.config.thresholds_db:
            for strategy in self.config.strategies:
                row = self.base_row(strategy.value, th)
                if self.p_idx is not None and self.scene.n_secondary:
                    outcome = select_secondary(self.scene, self.p_star, strategy, th)
                    if outcome.is_outage:
                        row["outage_reason"] = outcome.outage.value
                    row = self.fill_choice(row, outcome.secondary_choice, th)
                rows.append(row)
        return rows

    def uncertainty_rows(self) -> List[dict]:
        rows = []
        cfg = self.config
        mu = None if self.p_idx is None else tuple(float(x) for x in direction_of(self.scene, self.p_star))
        for th in cfg.thresholds_db:
            for gamma in cfg.gammas_deg:
                row = self.base_row(Strategy.max_guaranteed_sinr.value, th)
                row.update({"gamma_deg": gamma, "n_feasible_robust": 0, "guaranteed_sinr_db": math.nan,
                            "guaranteed_sinr_norm_db": math.nan, "p_worst": NO_ID, "candidate_set_size": 0})
                if mu is not None:
                    cands = candidate_primary_set(self.scene, UncertaintyModel(mu_direction=mu, gamma_deg=gamma))
                    robust = max_guaranteed_sinr(self.scene, cands, th, gamma_deg=gamma,
                                                 constraint=cfg.robust_constraint, solver=cfg.robust_solver)
                    row["candidate_set_size"] = robust.candidate_set_size
                    row["n_feasible_robust"] = robust.n_feasible_robust
                    if robust.is_outage:
                        row["outage_reason"] = robust.outage.value
                    else:
                        self.fill_choice(row, robust.s_prime, th)
                        row["p_worst"] = robust.p_prime
                        row["guaranteed_sinr_db"] = robust.guaranteed_sinr_db
                        row["guaranteed_sinr_norm_db"] = robust.guaranteed_sinr_db - float(self.scene.snr_v[self.g_snr])
                rows.append(row)
        return rows


def evaluate_step(ctx: ScenarioContext, city: CitySpec, t_s: float):
    bounds, selection, uncertainty = [], [], []
    for label in ctx.arrays:
        scene = scene_at(ctx, city, label, t_s)
        step = StepEvaluator(ctx.config, city.name, label, scene)
        if label in ctx.config.user_arrays:
            bounds.append(bounds_row(city.name, label, scene, step.p_idx))
            selection.extend(step.selection_rows())
        if label in ctx.config.uncertainty_arrays:
            uncertainty.extend(step.uncertainty_rows())
    return bounds, selection, uncertainty


# --- Worker plumbing ---
_worker_ctx: Dict[str, ScenarioContext] = {}


def _init_worker(config_json: str):
    _worker_ctx.clear()
    _worker_ctx["ctx"] = build_context(ScenarioConfig.model_validate_json(config_json))


def _evaluate_chunk(city_name: str, times: Sequence[float]):
    ctx = _worker_ctx["ctx"]
    city = ctx.config.city(city_name)
    out = ([], [], [])
    for t in times:
        for acc, rows in zip(out, evaluate_step(ctx, city, t)):
            acc.extend(rows)
    return out


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    bounds: pd.DataFrame
    selection: pd.DataFrame
    uncertainty: pd.DataFrame


def _frame(rows: List[dict], columns: List[str], keys: List[str]) -> pd.DataFrame:
    df = pd.DataFrame(rows)
    if df.empty:
        return pd.DataFrame(columns=columns)
    extra = [c for c in df.columns if c not in columns]
    df = df[columns + extra]
    return df.sort_values(keys, kind="mergesort").reset_index(drop=True)


class ScenarioRunner:
    CHUNK_STEPS = 240

    def __init__(self, config: ScenarioConfig, process_id: Optional[str] = None,
                 threads: int = 1, cities: Optional[List[str]] = None):
        self.config = config
        self.process_id = process_id
        self.threads = max(1, threads)
        self.cities = [config.city(c) for c in cities] if cities else list(config.cities)
        self.ctx = None

    def update_progress(self, value):
        if self.process_id: progress_state[self.process_id] = value

    def load_data(self):
        self.update_progress(5)
        self.ctx = build_context(self.config)
        self.update_progress(10)

    def chunks(self):
        times = self.config.times()
        for city in self.cities:
            for k in range(0, len(times), self.CHUNK_STEPS):
                yield city.name, times[k:k + self.CHUNK_STEPS]

    def solve(self) -> ScenarioResult:
        chunks = list(self.chunks())
        results = [None] * len(chunks)
        started = time.monotonic()
        logger.info(f"Sweeping {len(self.cities)} cities x {self.config.num_steps} steps "
                    f"in {len(chunks)} chunks on {self.threads} worker(s)")

        if self.threads == 1:
            _worker_ctx["ctx"] = self.ctx
            for i, (city, times) in enumerate(chunks):
                results[i] = _evaluate_chunk(city, times)
                self.update_progress(10 + int((i + 1) / len(chunks) * 85))
        else:
            with ProcessPoolExecutor(max_workers=self.threads, initializer=_init_worker,
                                     initargs=(self.config.model_dump_json(),)) as pool:
                futures = {pool.submit(_evaluate_chunk, city, times): i for i, (city, times) in enumerate(chunks)}
                for done, fut in enumerate(as_completed(futures), 1):
                    results[futures[fut]] = fut.result()
                    self.update_progress(10 + int(done / len(chunks) * 85))

        bounds, selection, uncertainty = [], [], []
        for b, s, u in results:
            bounds.extend(b); selection.extend(s); uncertainty.extend(u)

        result = ScenarioResult(
            config=self.config,
            bounds=_frame(bounds, BOUNDS_COLUMNS, ["city", "array", "t_s"]),
            selection=_frame(selection, SELECTION_COLUMNS, ["city", "array", "t_s", "strategy", "inr_th_db"]),
            uncertainty=_frame(uncertainty, UNCERTAINTY_COLUMNS,
                               ["city", "array", "t_s", "strategy", "inr_th_db", "gamma_deg"]),
        )
        outages = int(result.selection["outage"].sum()) if len(result.selection) else 0
        logger.info(f"Sweep finished in {time.monotonic() - started:.1f}s: "
                    f"{len(result.selection)} selection rows ({outages} outages), "
                    f"{len(result.uncertainty)} uncertainty rows")
        return result


def run_scenario(config: ScenarioConfig, cities: Optional[List[str]] = None,
                 threads: int = 1, process_id: Optional[str] = None) -> ScenarioResult:
    runner = ScenarioRunner(config, process_id=process_id, threads=threads, cities=cities)
    runner.load_data()
    return runner.solve()


def generate_results(config: ScenarioConfig, process_id: str,
                     cities: Optional[List[str]] = None, threads: int = 1):
    """Background entry point for the API: stores the result under `process_id`."""
    try:
        result = run_scenario(config, cities=cities, threads=threads, process_id=process_id)
        scenario_results[process_id] = result
        progress_state[process_id] = 100
        return result
    except Exception as e:
        logger.exception(e)
        progress_state[process_id] = -1
        return None


def snapshot(ctx: ScenarioContext, city: CitySpec, t_s: float) -> dict:
    """Debug dump of one timestep: visible sets, bounds and every strategy's choice."""
    out = {"city": city.name, "t_s": t_s, "arrays": {}}
    for label in ctx.arrays:
        scene = scene_at(ctx, city, label, t_s)
        step = StepEvaluator(ctx.config, city.name, label, scene)
        out["arrays"][label] = {
            "primary_visible": [int(x) for x in scene.primary_ids],
            "secondary_visible": [int(x) for x in scene.secondary_ids],
            "serving_link": None if step.p_star is None else
            link_geometry(ctx.primary, step.p_star, scene.user_u_pos, t_s).model_dump(),
            "bounds": bounds_row(city.name, label, scene, step.p_idx),
            "selection": step.selection_rows(),
            "uncertainty": step.uncertainty_rows() if label in ctx.config.uncertainty_arrays else [],
        }
    return out


# Caches
_context_cache: Dict[str, ScenarioContext] = {}


def load_context(config: ScenarioConfig) -> ScenarioContext:
    key = config.model_dump_json()
    if key not in _context_cache:
        _context_cache[key] = build_context(config)
        logger.debug("Scenario context cache refreshed")
    return _context_cache[key]


def refresh_context_cache():
    _context_cache.clear()
