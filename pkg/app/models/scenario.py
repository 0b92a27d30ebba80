from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.constellation import ConstellationSpec, SystemRole, kuiper_spec, starlink_spec
from app.models.radio import RadioConfig, parse_threshold
from app.models.selection import SELECTION_STRATEGIES, RobustConstraint, Strategy
from app.utils.helper import parse_array_label


class CitySpec(BaseModel):
    name: str
    lat_deg: float = Field(..., ge=-90, le=90)
    lon_deg: float = Field(..., ge=-180, le=180)
    alt_m: float = 0.0


DEFAULT_CITIES = [
    CitySpec(name="Vancouver", lat_deg=49.2827, lon_deg=-123.1207),
    CitySpec(name="Madrid", lat_deg=40.4168, lon_deg=-3.7038),
    CitySpec(name="Seoul", lat_deg=37.5519, lon_deg=126.9918),
    CitySpec(name="Cape Town", lat_deg=-33.9249, lon_deg=18.4241),
    CitySpec(name="Austin", lat_deg=30.267153, lon_deg=-97.743057),
    CitySpec(name="Rio de Janeiro", lat_deg=-22.9068, lon_deg=-43.1729),
    CitySpec(name="Bangalore", lat_deg=12.9716, lon_deg=77.5946),
]


class ScenarioConfig(BaseModel):
    constellations: List[ConstellationSpec] = Field(default_factory=lambda: [starlink_spec(), kuiper_spec()])
    radio: RadioConfig = Field(default_factory=RadioConfig)
    cities: List[CitySpec] = Field(default_factory=lambda: list(DEFAULT_CITIES), min_length=1)
    eps_min_deg: float = Field(35.0, ge=0, le=90)
    duration_s: float = Field(86400.0, gt=0)
    step_s: float = Field(30.0, gt=0)
    thresholds_db: List[float] = Field(default_factory=lambda: [-15.0, -12.2, -6.0, 0.0], min_length=1)
    user_arrays: List[str] = Field(default_factory=lambda: ["8x8", "16x16", "32x32"], min_length=1)
    uncertainty_arrays: List[str] = Field(default_factory=lambda: ["32x32"])
    gammas_deg: List[float] = Field(default_factory=lambda: [0.0, 10.0, 20.0, 25.0, 30.0, 40.0, 50.0])
    strategies: List[Strategy] = Field(default_factory=lambda: list(SELECTION_STRATEGIES), min_length=1)
    useful_delta_db: float = Field(3.0, ge=0)
    useful_deltas_db: List[float] = Field(default_factory=lambda: [0.5, 2.0, 3.0])
    user_separation_m: float = Field(0.0, ge=0)
    seed_phasing: Optional[int] = Field(None, ge=0, description="Overrides every constellation's phasing factor")
    robust_constraint: RobustConstraint = RobustConstraint.primary_user
    robust_solver: Literal["exhaustive", "cp_sat"] = "exhaustive"
    summary_array: str = "32x32"
    summary_threshold_db: float = -12.2

    @field_validator("thresholds_db", mode="before")
    @classmethod
    def _thresholds(cls, v):
        return [parse_threshold(x) for x in v]

    @field_validator("user_arrays", "uncertainty_arrays")
    @classmethod
    def _arrays(cls, v):
        for label in v:
            parse_array_label(label)
        return v

    @field_validator("gammas_deg")
    @classmethod
    def _gammas(cls, v):
        if any(g < 0 or g > 180 for g in v):
            raise ValueError("gammas_deg entries must lie in [0, 180]")
        return v

    @model_validator(mode="after")
    def _consistency(self):
        if self.duration_s < self.step_s:
            raise ValueError("duration_s must be at least step_s")
        roles = sorted(c.role.value for c in self.constellations)
        if roles != [SystemRole.primary.value, SystemRole.secondary.value]:
            raise ValueError("constellations must hold exactly one primary and one secondary system")
        if self.seed_phasing is not None:
            self.constellations = [c.model_copy(update={"seed_phasing": self.seed_phasing})
                                   for c in self.constellations]
        return self

    @property
    def primary(self) -> ConstellationSpec:
        return next(c for c in self.constellations if c.role == SystemRole.primary)

    @property
    def secondary(self) -> ConstellationSpec:
        return next(c for c in self.constellations if c.role == SystemRole.secondary)

    @property
    def num_steps(self) -> int:
        return int(self.duration_s // self.step_s)

    def times(self) -> List[float]:
        return [k * self.step_s for k in range(self.num_steps)]

    def city(self, name: str) -> CitySpec:
        for c in self.cities:
            if c.name.lower() == name.lower():
                return c
        raise KeyError(name)
