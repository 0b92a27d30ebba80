import math
from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, computed_field


class SystemRole(str, Enum):
    primary = "primary"
    secondary = "secondary"


class ShellSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    altitude_km: float = Field(..., gt=0, description="Orbital altitude above the spherical Earth")
    inclination_deg: float = Field(..., ge=0, le=180)
    num_planes: int = Field(..., ge=1)
    sats_per_plane: int = Field(..., ge=1)

    @property
    def total(self) -> int:
        return self.num_planes * self.sats_per_plane


class ConstellationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    shells: List[ShellSpec] = Field(..., min_length=1)
    role: SystemRole
    seed_phasing: int = Field(1, ge=0, description="Walker phasing factor F")
    raan_offset_deg: float = 0.0
    epoch_offset_s: float = Field(0.0, description="Time shift applied before propagation")

    @computed_field
    @property
    def total_satellites(self) -> int:
        return sum(s.total for s in self.shells)

    @property
    def reference_altitude_km(self) -> float:
        return min(s.altitude_km for s in self.shells)


class SatelliteState(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    shell: ShellSpec
    shell_index: int
    raan_rad: float
    arg_phase_rad: float = Field(..., description="In-plane anomaly at epoch")
    semi_major_axis_m: float
    mean_motion_rad_s: float

    @property
    def inclination_rad(self) -> float:
        return math.radians(self.shell.inclination_deg)


STARLINK_SHELLS = [
    ShellSpec(altitude_km=540, inclination_deg=53.2, num_planes=72, sats_per_plane=22),
    ShellSpec(altitude_km=550, inclination_deg=53.0, num_planes=72, sats_per_plane=22),
    ShellSpec(altitude_km=560, inclination_deg=97.6, num_planes=4, sats_per_plane=43),
    ShellSpec(altitude_km=560, inclination_deg=97.6, num_planes=6, sats_per_plane=58),
    ShellSpec(altitude_km=570, inclination_deg=70.0, num_planes=36, sats_per_plane=20),
]

KUIPER_SHELLS = [
    ShellSpec(altitude_km=590, inclination_deg=33.0, num_planes=28, sats_per_plane=28),
    ShellSpec(altitude_km=610, inclination_deg=42.0, num_planes=36, sats_per_plane=36),
    ShellSpec(altitude_km=630, inclination_deg=51.9, num_planes=34, sats_per_plane=34),
]


def starlink_spec(**overrides) -> ConstellationSpec:
    return ConstellationSpec(name="starlink", shells=STARLINK_SHELLS, role=SystemRole.primary, **overrides)


def kuiper_spec(**overrides) -> ConstellationSpec:
    return ConstellationSpec(name="kuiper", shells=KUIPER_SHELLS, role=SystemRole.secondary, **overrides)
