from pathlib import Path
from typing import Dict, Optional, Sequence
import json
import logging
import math
import re

import numpy as np
import pandas as pd

from app.core.aggregate import (
    coincidence_fractions, figure_curves, grid_dict, uncertainty_heatmaps, visibility_table,
)
from app.core.constellation import dump_positions
from app.core.errors import ConfigError, OutputError
from app.core.scenario import (
    BOUNDS_COLUMNS, SELECTION_COLUMNS, UNCERTAINTY_COLUMNS, ScenarioContext, ScenarioResult,
)
from app.models.scenario import ScenarioConfig
from app.utils.helper import DB_FLOOR, clamp_db

logger = logging.getLogger("emit")

SELECTION_FILE = "selection.csv"
UNCERTAINTY_FILE = "uncertainty.csv"
BOUNDS_FILE = "bounds.csv"
SUMMARY_FILE = "summary.json"
POSITIONS_FILE = "positions.csv"
PLOTDATA_DIR = "plotdata"

REQUIRED_SUMMARY_KEYS = ["fig6", "fig8a", "fig8b", "fig10", "fig12a", "fig12b"]


def _db_columns(df: pd.DataFrame):
    return [c for c in df.columns if c.endswith("_db") or c.endswith("_dbw")]


def serializable(df: pd.DataFrame) -> pd.DataFrame:
    """Copy with -inf dB values clamped to the floor; NaN (outage) stays empty."""
    out = df.copy()
    for col in _db_columns(out):
        if col == "inr_th_db":
            continue
        out[col] = clamp_db(out[col].astype(float))
    return out


def _ensure_dir(path: Path):
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {path}: {e.strerror}") from e


def write_csv(df: pd.DataFrame, path: Path, columns: Optional[Sequence[str]] = None):
    if df.empty and columns is not None and len(df.columns) == 0:
        df = pd.DataFrame(columns=list(columns))
    try:
        serializable(df).to_csv(path, index=False)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e.strerror}") from e
    logger.info(f"Wrote {len(df)} rows to {path}")


def write_tables(result: ScenarioResult, out_dir: Path):
    out_dir = Path(out_dir)
    _ensure_dir(out_dir)
    write_csv(result.selection, out_dir / SELECTION_FILE, SELECTION_COLUMNS)
    write_csv(result.uncertainty, out_dir / UNCERTAINTY_FILE, UNCERTAINTY_COLUMNS)
    write_csv(result.bounds, out_dir / BOUNDS_FILE, BOUNDS_COLUMNS)


def json_safe(x):
    if isinstance(x, dict):
        return {k: json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_safe(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return DB_FLOOR if x < 0 else None
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def summarize(config: ScenarioConfig, bounds: pd.DataFrame, selection: pd.DataFrame,
              uncertainty: pd.DataFrame) -> dict:
    """Per-figure quantile tables and heatmap grids, JSON-ready."""
    figs = figure_curves(config, bounds, selection, uncertainty)
    grids = uncertainty_heatmaps(config, uncertainty)
    summary = {
        "meta": {
            "cities": [c.name for c in config.cities],
            "summary_array": config.summary_array,
            "summary_threshold_db": config.summary_threshold_db,
            "num_steps": config.num_steps,
            "step_s": config.step_s,
        },
        "table3": visibility_table(config, bounds),
    }
    for key, curves in figs.items():
        summary[key] = {name: cdf.quantile_table() for name, cdf in curves.items()}
    summary["fig9_coincidence"] = coincidence_fractions(config, selection)
    for key, grid in grids.items():
        summary[key] = grid_dict(grid)
    return json_safe(summary)


def write_summary(summary: dict, out_dir: Path) -> Path:
    path = Path(out_dir) / SUMMARY_FILE
    _ensure_dir(path.parent)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, allow_nan=False)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e.strerror}") from e
    logger.info(f"Wrote summary to {path}")
    return path


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=@_-]+", "_", name)


def write_plotdata(config: ScenarioConfig, bounds: pd.DataFrame, selection: pd.DataFrame,
                   uncertainty: pd.DataFrame, out_dir: Path) -> Dict[str, Path]:
    """One x,y CSV per CDF curve (x = sample, y = cumulative fraction), plus long-form heatmaps."""
    plot_dir = Path(out_dir) / PLOTDATA_DIR
    _ensure_dir(plot_dir)
    written = {}
    for fig, curves in figure_curves(config, bounds, selection, uncertainty).items():
        for name, cdf in curves.items():
            x, y = cdf.series()
            path = plot_dir / f"{fig}__{_slug(name)}.csv"
            write_csv(pd.DataFrame({"x": clamp_db(x), "y": y}), path)
            written[f"{fig}__{name}"] = path
    for fig, grid in uncertainty_heatmaps(config, uncertainty).items():
        if grid.empty:
            continue
        long = grid.stack().reset_index()
        long.columns = ["x", "y", "value"]
        path = plot_dir / f"{fig}__heatmap.csv"
        write_csv(long, path)
        written[f"{fig}__heatmap"] = path
    return written


def write_positions(ctx: ScenarioContext, times: Sequence[float], out_dir: Path) -> Path:
    path = Path(out_dir) / POSITIONS_FILE
    _ensure_dir(path.parent)
    frames = []
    for system in (ctx.primary, ctx.secondary):
        df = dump_positions(system.arrays, times)
        df.insert(1, "system", system.spec.name)
        frames.append(df)
    write_csv(pd.concat(frames, ignore_index=True).sort_values(["t_s", "system", "sat_id"], kind="mergesort"), path)
    return path


def emit(result: ScenarioResult, out_dir: Path, formats: Sequence[str] = ("csv", "json", "plotdata")) -> dict:
    out_dir = Path(out_dir)
    unknown = set(formats) - {"csv", "json", "plotdata"}
    if unknown:
        raise ConfigError(f"Unknown output format(s): {', '.join(sorted(unknown))}")
    written = {}
    if "csv" in formats:
        write_tables(result, out_dir)
        written["csv"] = [out_dir / f for f in (SELECTION_FILE, UNCERTAINTY_FILE, BOUNDS_FILE)]
    if "json" in formats:
        written["json"] = write_summary(
            summarize(result.config, result.bounds, result.selection, result.uncertainty), out_dir)
    if "plotdata" in formats:
        written["plotdata"] = write_plotdata(result.config, result.bounds, result.selection,
                                             result.uncertainty, out_dir)
    return written


def read_tables(out_dir: Path):
    """Load the CSVs of a previous run for re-aggregation."""
    out_dir = Path(out_dir)
    tables = []
    for name in (BOUNDS_FILE, SELECTION_FILE, UNCERTAINTY_FILE):
        path = out_dir / name
        try:
            tables.append(pd.read_csv(path))
        except FileNotFoundError as e:
            raise OutputError(f"Missing result table {path}") from e
        except pd.errors.EmptyDataError:
            tables.append(pd.DataFrame())
    return tuple(tables)
