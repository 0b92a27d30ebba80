"""Empirical CDFs and heatmap grids over the scenario row tables.

Every "CDF over time" in the summary is an `EmpiricalCdf` of one metric column,
restricted to one curve's rows. Heatmaps are pandas pivots over (gamma, threshold).
"""
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union
import logging
import math

import numpy as np
import pandas as pd

from app.core.scenario import NO_ID, useful_column
from app.models.scenario import ScenarioConfig
from app.models.selection import Strategy

logger = logging.getLogger("aggregate")

QUANTILE_LEVELS = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0]


@dataclass(frozen=True)
class EmpiricalCdf:
    values: np.ndarray

    @classmethod
    def from_values(cls, values) -> "EmpiricalCdf":
        arr = np.asarray(values, dtype=float).ravel()
        arr = np.sort(arr[~np.isnan(arr)], kind="mergesort")
        arr.flags.writeable = False
        return cls(values=arr)

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    def quantile(self, q: float) -> Optional[float]:
        """Lower-midpoint order statistic: index ceil(q*n) - 1, clipped to the sample."""
        if not 0.0 <= q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if self.is_empty:
            return None
        idx = min(max(math.ceil(q * self.count) - 1, 0), self.count - 1)
        return float(self.values[idx])

    def cdf(self, x: float) -> float:
        if self.is_empty:
            return 0.0
        return float(np.searchsorted(self.values, x, side="right")) / self.count

    def series(self):
        """Step points (x, F(x)) for plotting."""
        n = self.count
        return self.values.copy(), np.arange(1, n + 1, dtype=float) / max(n, 1)

    def quantile_table(self, levels: Sequence[float] = QUANTILE_LEVELS) -> dict:
        return {"count": self.count, "quantiles": {f"{q:g}": self.quantile(q) for q in levels}}


def _key(k):
    return k[0] if isinstance(k, tuple) and len(k) == 1 else k


def aggregate(rows: pd.DataFrame, metric: str, group_keys: Sequence[str] = (),
              kind: str = "cdf") -> Union[Dict, EmpiricalCdf, Optional[float]]:
    """CDF, mean or (lower) median of `metric`, optionally per group.

    Without group keys a single result is returned; with keys a dict keyed by the
    group value (a tuple when several keys). NaN samples (outage rows) are ignored.
    An empty selection yields an empty CDF, or None for mean/median.
    """
    if kind not in ("cdf", "mean", "median"):
        raise ValueError(f"Unknown aggregate kind '{kind}'")

    def reduce(values):
        cdf = EmpiricalCdf.from_values(values)
        if kind == "cdf":
            return cdf
        if cdf.is_empty:
            return None
        return float(cdf.values.mean()) if kind == "mean" else cdf.quantile(0.5)

    if not group_keys:
        return reduce(rows[metric] if len(rows) else [])
    if not len(rows):
        return {}
    return {_key(k): reduce(g[metric]) for k, g in rows.groupby(list(group_keys), sort=True)}


def heatmap(rows: pd.DataFrame, metric: str, index: str, columns: str, stat: str = "mean") -> pd.DataFrame:
    """Grid of `stat` over (index, columns); cells without samples stay NaN."""
    if stat == "mean":
        func = "mean"
    elif stat == "median":
        func = lambda s: EmpiricalCdf.from_values(s).quantile(0.5)
    else:
        raise ValueError(f"Unknown heatmap statistic '{stat}'")
    data = rows.dropna(subset=[metric]) if len(rows) else rows
    if not len(data):
        return pd.DataFrame()
    return data.pivot_table(index=index, columns=columns, values=metric, aggfunc=func).sort_index().sort_index(axis=1)


# --- Figure curves ---

def _label(x: float) -> str:
    return f"{x:g}"


def _at(df: pd.DataFrame, col: str, value: float) -> pd.DataFrame:
    return df[np.isclose(df[col].astype(float), value)]


def summary_array(config: ScenarioConfig) -> str:
    return config.summary_array if config.summary_array in config.user_arrays else config.user_arrays[-1]


def uncertainty_array(config: ScenarioConfig) -> Optional[str]:
    if not config.uncertainty_arrays:
        return None
    return config.summary_array if config.summary_array in config.uncertainty_arrays else config.uncertainty_arrays[0]


def _robust_rows(config: ScenarioConfig, uncertainty: pd.DataFrame) -> pd.DataFrame:
    unc = _served(uncertainty)
    return unc[unc["array"] == uncertainty_array(config)] if len(unc) else unc


def _served(df: pd.DataFrame) -> pd.DataFrame:
    return df[df["p_star"] != NO_ID] if len(df) else df


def _one_strategy(df: pd.DataFrame) -> pd.DataFrame:
    # per-step counts do not depend on the strategy
    return df.drop_duplicates(subset=["city", "array", "t_s", "inr_th_db"])


def _greedy(df: pd.DataFrame) -> pd.DataFrame:
    greedy = df[df["strategy"].isin([Strategy.greedy_max_snr.value, Strategy.greedy_max_sinr.value])]
    return greedy.drop_duplicates(subset=["city", "array", "t_s", "strategy"])


def _curves(df: pd.DataFrame, metric: str, by: str, fmt=_label, prefix: str = "") -> Dict[str, EmpiricalCdf]:
    out = {}
    for key, cdf in aggregate(df, metric, [by]).items():
        out[f"{prefix}{fmt(key)}"] = cdf
    return out


def figure_curves(config: ScenarioConfig, bounds: pd.DataFrame, selection: pd.DataFrame,
                  uncertainty: pd.DataFrame) -> Dict[str, Dict[str, EmpiricalCdf]]:
    """CDF curves per figure key; each curve is one line of the corresponding plot."""
    arr = summary_array(config)
    th_star = config.summary_threshold_db
    figs: Dict[str, Dict[str, EmpiricalCdf]] = {}

    b = _served(bounds[bounds["array"] == arr]) if len(bounds) else bounds
    figs["fig5"] = {name: aggregate(b, col) for name, col in [
        ("inr_max_u", "inr_max_db"), ("inr_min_u", "inr_min_db"),
        ("inr_max_u_pstar", "inr_max_cond_db"), ("inr_min_u_pstar", "inr_min_cond_db")]} if len(b) else {}

    sel = _served(selection)
    sel_arr = sel[sel["array"] == arr] if len(sel) else sel
    counts = _one_strategy(sel_arr) if len(sel_arr) else sel_arr
    figs["fig6"] = _curves(counts, "n_feasible", "inr_th_db", prefix="inr_th=") if len(counts) else {}

    greedy_all = _greedy(sel) if len(sel) else sel
    figs["fig7"] = {f"{s}@{a}": cdf for (s, a), cdf in
                    aggregate(greedy_all, "inr_p_db", ["strategy", "array"]).items()} if len(greedy_all) else {}

    for key, metric in (("fig8a", "sinr_p_db"), ("fig8b", "sinr_s_db")):
        curves = {}
        if len(sel_arr):
            curves.update(aggregate(_greedy(sel_arr), metric, ["strategy"]))
            protective = sel_arr[sel_arr["strategy"].isin([s.value for s in config.strategies if s.protective])]
            for (s, th), cdf in aggregate(protective, metric, ["strategy", "inr_th_db"]).items():
                curves[f"{s}@{_label(th)}"] = cdf
        figs[key] = curves

    figs["fig9"] = {}
    pms = sel_arr[sel_arr["strategy"] == Strategy.protective_max_sinr.value] if len(sel_arr) else sel_arr
    if len(pms):
        figs["fig9"].update(_curves(pms, "sep_greedy_sinr_deg", "inr_th_db", prefix="s_vs_greedy_sinr@"))
        figs["fig9"].update(_curves(pms, "sep_deg", "inr_th_db", prefix="s_vs_pstar@"))

    figs["fig10"] = {}
    if len(counts):
        for d in config.useful_deltas_db:
            col = useful_column(d)
            if col in counts.columns:
                figs["fig10"].update(_curves(counts, col, "inr_th_db", prefix=f"delta={d:g}@"))

    unc = _robust_rows(config, uncertainty)
    unc_th = _at(unc, "inr_th_db", th_star) if len(unc) else unc
    figs["fig11a"] = _curves(unc_th, "n_feasible_robust", "gamma_deg", prefix="gamma=") if len(unc_th) else {}
    figs["fig12a"] = _curves(unc_th, "guaranteed_sinr_norm_db", "gamma_deg", prefix="gamma=") if len(unc_th) else {}
    return figs


def coincidence_fractions(config: ScenarioConfig, selection: pd.DataFrame) -> Dict[str, Optional[float]]:
    """Share of served steps where the protective max-SINR choice equals the greedy max-SINR choice."""
    sel = _served(selection)
    if not len(sel):
        return {}
    sel = sel[(sel["array"] == summary_array(config)) & (sel["n_secondary"] > 0)
              & (sel["strategy"] == Strategy.protective_max_sinr.value)]
    out = {}
    for th, g in sel.groupby("inr_th_db", sort=True):
        out[_label(th)] = float((g["s_choice"] == g["s_greedy_sinr"]).mean()) if len(g) else None
    return out


def visibility_table(config: ScenarioConfig, bounds: pd.DataFrame) -> Dict[str, dict]:
    """Mean visible primary/secondary counts per city, in config order."""
    if not len(bounds):
        return {}
    b = bounds[bounds["array"] == summary_array(config)]
    out = {}
    for city in config.cities:
        rows = b[b["city"] == city.name]
        if len(rows):
            out[city.name] = {"lat_deg": city.lat_deg,
                              "mean_primary_visible": float(rows["n_primary"].mean()),
                              "mean_secondary_visible": float(rows["n_secondary"].mean()),
                              "steps": int(len(rows))}
    return out


def uncertainty_heatmaps(config: ScenarioConfig, uncertainty: pd.DataFrame) -> Dict[str, pd.DataFrame]:
    unc = _robust_rows(config, uncertainty)
    if not len(unc):
        return {"fig11b": pd.DataFrame(), "fig12b": pd.DataFrame()}
    return {
        "fig11b": heatmap(unc, "n_feasible_robust", "gamma_deg", "inr_th_db", stat="mean"),
        "fig12b": heatmap(unc, "guaranteed_sinr_db", "gamma_deg", "inr_th_db", stat="median"),
    }


def grid_dict(grid: pd.DataFrame, index_name: str = "gamma_deg", column_name: str = "inr_th_db") -> dict:
    def cell(v):
        return None if pd.isna(v) else float(v)
    return {
        "index": index_name,
        "columns_name": column_name,
        "rows": [_label(x) for x in grid.index],
        "columns": [_label(x) for x in grid.columns],
        "values": [[cell(v) for v in row] for row in grid.to_numpy()] if len(grid) else [],
    }
