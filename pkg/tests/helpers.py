import numpy as np

from app.core.constellation import R_EARTH_M
from app.core.scene import SceneSnapshot
from app.models.scenario import CitySpec, ScenarioConfig


def make_scene(rng: np.random.Generator, n_p: int, n_s: int, tie_step: float = None,
               t_s: float = 0.0) -> SceneSnapshot:
    """Random scene with arbitrary (shuffled) ids; `tie_step` quantizes dB values to force ties."""
    user = np.array([R_EARTH_M, 0.0, 0.0])

    def positions(n):
        d = rng.normal(size=(n, 3)) + np.array([3.0, 0.0, 0.0])
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return user + d * rng.uniform(600e3, 1500e3, size=(n, 1))

    def values(low, high, shape):
        v = rng.uniform(low, high, size=shape)
        return np.round(v / tie_step) * tie_step if tie_step else v

    return SceneSnapshot(
        t_s=t_s, user_u_pos=user, user_v_pos=user.copy(),
        primary_ids=rng.choice(5000, size=n_p, replace=False),
        secondary_ids=rng.choice(5000, size=n_s, replace=False) + 10000,
        primary_pos=positions(n_p).reshape(n_p, 3), secondary_pos=positions(n_s).reshape(n_s, 3),
        snr_u=values(-5.0, 15.0, n_p), snr_v=values(-5.0, 15.0, n_s),
        inr_u=values(-40.0, 10.0, (n_p, n_s)), inr_v=values(-40.0, 10.0, (n_s, n_p)),
        noise_u_dbw=-116.78, noise_v_dbw=-116.78,
        elev_p=np.full(n_p, 60.0), elev_s=np.full(n_s, 60.0),
    )


AUSTIN = CitySpec(name="Austin", lat_deg=30.267153, lon_deg=-97.743057)


def short_scenario_config(**overrides) -> ScenarioConfig:
    """Austin only, four 30 s steps of the full constellations."""
    fields = dict(
        cities=[AUSTIN], duration_s=120, step_s=30,
        thresholds_db=[-12.2, "unconstrained"],
        user_arrays=["32x32"], uncertainty_arrays=["32x32"], gammas_deg=[0, 20],
    )
    fields.update(overrides)
    return ScenarioConfig(**fields)


def direct_sum_gain_linear(rows: int, cols: int, steer_dir, eval_dir) -> float:
    """Element-by-element array factor, the reference for the closed form."""
    steer = np.asarray(steer_dir, dtype=float)
    ev = np.asarray(eval_dir, dtype=float)
    if ev[2] < 0 or steer[2] < 0:
        return 0.0
    m = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    phase = np.pi * (m * (ev[0] - steer[0]) + n * (ev[1] - steer[1]))
    return float(np.abs(np.exp(1j * phase).sum()) ** 2 / (rows * cols))


def geocentric_latitude_deg(pos: np.ndarray) -> np.ndarray:
    pos = np.asarray(pos, dtype=float)
    return np.degrees(np.arcsin(pos[..., 2] / np.linalg.norm(pos, axis=-1)))
