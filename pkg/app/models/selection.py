from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class Strategy(str, Enum):
    greedy_max_snr = "greedy_max_snr"
    greedy_max_sinr = "greedy_max_sinr"
    protective_max_snr = "protective_max_snr"
    protective_max_sinr = "protective_max_sinr"
    max_guaranteed_sinr = "max_guaranteed_sinr"

    @property
    def protective(self) -> bool:
        return self in (Strategy.protective_max_snr, Strategy.protective_max_sinr, Strategy.max_guaranteed_sinr)


SELECTION_STRATEGIES = [
    Strategy.greedy_max_snr, Strategy.greedy_max_sinr,
    Strategy.protective_max_snr, Strategy.protective_max_sinr,
]


class OutageReason(str, Enum):
    none = "none"
    no_primary_visible = "no_primary_visible"
    no_secondary_visible = "no_secondary_visible"
    none_feasible = "none_feasible"


class SelectionOutcome(BaseModel):
    strategy: Strategy
    inr_th_db: float
    primary_choice: Optional[int] = None
    secondary_choice: Optional[int] = None
    outage: OutageReason = OutageReason.none
    snr_p_db: Optional[float] = None
    sinr_p_db: Optional[float] = None
    snr_s_db: Optional[float] = None
    sinr_s_db: Optional[float] = None
    inr_at_primary_db: Optional[float] = None
    constraint_met: Optional[bool] = None
    feasible_count: int = 0
    useful_count: Optional[int] = None

    @property
    def is_outage(self) -> bool:
        return self.outage != OutageReason.none


class UncertaintyModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu_direction: Tuple[float, float, float] = Field(..., description="User-centric unit estimate of the primary direction")
    gamma_deg: float = Field(..., ge=0, le=180)


class RobustConstraint(str, Enum):
    primary_user = "primary_user"       # INR(u, p; s) <= th for every candidate p
    secondary_user = "secondary_user"   # literal INR(v, p; s) reading


class RobustOutcome(BaseModel):
    gamma_deg: float
    inr_th_db: float
    s_prime: Optional[int] = None
    p_prime: Optional[int] = None
    guaranteed_sinr_db: Optional[float] = None
    candidate_set_size: int = 0
    n_feasible_robust: int = 0
    outage: OutageReason = OutageReason.none

    @property
    def is_outage(self) -> bool:
        return self.outage != OutageReason.none
