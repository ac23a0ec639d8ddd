from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Protocol(str, Enum):
    ARA = "ARA"
    QA = "QA"


class NormKind(str, Enum):
    FROBENIUS = "frobenius"
    TRACE = "trace"


class GaugeKind(str, Enum):
    NONE = "none"
    VARIATIONAL = "variational"
    EXACT = "exact"


class SpinSector(BaseModel):
    """Product of the two maximal-spin ladders of the up- and down-biased spins.

    Basis states are pairs (m_u, m_d), m descending within each ladder,
    flattened row-major with m_u outer.
    """
    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=1)
    N_up: int = Field(..., ge=0)
    N_dn: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _counts_add_up(self):
        if self.N_up + self.N_dn != self.N:
            raise ValueError(f"N_up + N_dn must equal N ({self.N_up} + {self.N_dn} != {self.N})")
        return self

    @property
    def d(self) -> int:
        return (self.N_up + 1) * (self.N_dn + 1)

    @property
    def j_up(self) -> float:
        return self.N_up / 2

    @property
    def j_dn(self) -> float:
        return self.N_dn / 2

    @property
    def c(self) -> Fraction:
        return Fraction(self.N_up, self.N)

    @property
    def hamming_distance(self) -> int:
        return self.N_dn

    @property
    def initial_magnetization(self) -> float:
        return float(2 * self.c - 1)

    def index(self, i_up: int, i_dn: int) -> int:
        """Flat index of the state with m_u = j_up - i_up, m_d = j_dn - i_dn."""
        return i_up * (self.N_dn + 1) + i_dn


class AnnealParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    protocol: Protocol = Protocol.ARA
    p: int = 3
    gamma: float = Field(1.0, gt=0)
    q: float = Field(1.0, gt=0)
    tau: float = Field(1.0, gt=0)
    E0: float = Field(1.0, gt=0)
    K: int = Field(0, ge=0, le=3)

    @field_validator("p")
    @classmethod
    def _odd_p(cls, p: int) -> int:
        if p < 3 or p % 2 == 0:
            raise ValueError(f"p must be an odd integer >= 3, got {p}")
        return p

    def with_(self, **changes) -> "AnnealParams":
        return self.model_copy(update=changes)


class ScheduleSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    s: float
    s_dot: float
    lam: float
    lam_dot: float
    q: float


class CDExpansion(BaseModel):
    """Variational nested-commutator gauge potential at one point of the path.

    `generator` is the real antisymmetric matrix sum_k alpha_k L^{2k-1}(dH);
    the Hermitian gauge potential is 1j * generator.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    K: int
    alphas: List[float]
    generator: np.ndarray
    residual_norm: float
    degenerate: bool = False
    rank: int = 0

    @property
    def gauge(self) -> np.ndarray:
        return 1j * self.generator


class NormTracePoint(BaseModel):
    theta: float
    frob_norm: float = Field(..., ge=0)
    trace_norm: float = Field(..., ge=0)


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: AnnealParams
    N: int
    c: Optional[float] = None
    gauge: GaugeKind = GaugeKind.NONE
    p_gs: float = Field(..., ge=0, le=1)
    final_state: np.ndarray
    norm_drift: float
    steps: int
    below_trust_floor: bool = False
    norm_trace: Optional[List[NormTracePoint]] = None
    elapsed_s: float = 0.0


class GapMap(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    lambda_grid: np.ndarray
    s_grid: np.ndarray
    values: np.ndarray  # rescaled 1/gap, indexed [lambda, s]
    raw_min_gap: float
    argmin: Tuple[float, float]  # (lambda*, s*)
    paths: Dict[str, List[float]] = Field(default_factory=dict)  # lambda on s_grid
    path_min_gap: Dict[str, float] = Field(default_factory=dict)
