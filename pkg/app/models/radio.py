import math
from enum import Enum
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Boresight(str, Enum):
    nadir = "nadir"     # satellite arrays
    zenith = "zenith"   # ground-user arrays


class ArraySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    element_spacing_wavelengths: float = Field(0.5, description="Only half-wavelength spacing is modeled")
    boresight: Boresight = Boresight.zenith
    azimuth_reference: str = Field("east", description="'east' for users, 'velocity' for satellites")

    @field_validator("element_spacing_wavelengths")
    @classmethod
    def _half_wavelength(cls, v):
        if v != 0.5:
            raise ValueError("element_spacing_wavelengths must be 0.5")
        return v

    @property
    def num_elements(self) -> int:
        return self.rows * self.cols

    @property
    def label(self) -> str:
        return f"{self.rows}x{self.cols}"


def satellite_array(rows: int = 64, cols: int = 64) -> ArraySpec:
    return ArraySpec(rows=rows, cols=cols, boresight=Boresight.nadir, azimuth_reference="velocity")


def user_array(rows: int, cols: Optional[int] = None) -> ArraySpec:
    return ArraySpec(rows=rows, cols=cols or rows, boresight=Boresight.zenith, azimuth_reference="east")


class RadioConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    carrier_hz: float = Field(20e9, gt=0)
    bandwidth_hz: float = Field(400e6, gt=0)
    eirp_density_primary_dbw_hz: float = -54.3
    eirp_density_secondary_dbw_hz: float = -53.3
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 1.2
    power_control: bool = True
    power_control_limit_db: float = Field(1.0, ge=0)
    satellite_array: ArraySpec = Field(default_factory=satellite_array)


class LinkMetrics(BaseModel):
    snr_db: float
    inr_db: float
    sinr_db: float
    received_signal_dbw: float
    interference_dbw: float
    noise_dbw: float


class ProtectionThreshold(BaseModel):
    """INR ceiling at the primary user; +inf stands for an unconstrained selection."""
    model_config = ConfigDict(frozen=True)

    inr_th_db: float

    @field_validator("inr_th_db", mode="before")
    @classmethod
    def _parse(cls, v):
        if isinstance(v, str) and v.strip().lower() in ("unconstrained", "inf", "infinity"):
            return math.inf
        if v is None:
            return math.inf
        v = float(v)
        if math.isnan(v) or v == -math.inf:
            raise ValueError("inr_th_db must be finite or 'unconstrained'")
        return v

    @property
    def unconstrained(self) -> bool:
        return math.isinf(self.inr_th_db)

    @property
    def label(self) -> str:
        return "unconstrained" if self.unconstrained else f"{self.inr_th_db:g}"


def parse_threshold(value: Union[float, str, None]) -> float:
    return ProtectionThreshold(inr_th_db=value).inr_th_db
