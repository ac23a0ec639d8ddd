from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.common.config import settings
from app.common.models import AnnealParams, Protocol

CSV_SCHEMA_VERSION = "cra-sweep/1"

SWEEP_COLUMNS = [
    "schema_version", "protocol", "N", "c", "q", "gamma", "p", "tau", "K",
    "p_gs", "cost_frob", "cost_trace", "norm_peak", "theta_min_gap", "min_gap",
    "steps", "flags", "error",
]


def as_fraction(c) -> Fraction:
    """Exact rational for a user-supplied fraction (0.7 -> 7/10, "7/10" -> 7/10)."""
    if isinstance(c, Fraction):
        return c
    return Fraction(str(c))


class SweepPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    protocol: Protocol
    N: int
    c: Optional[float] = None
    q: float
    gamma: float
    p: int
    tau: float
    K: int
    E0: float = 1.0

    @property
    def key(self) -> Tuple:
        return (self.protocol.value, self.c if self.c is not None else 1.0,
                self.q, self.gamma, self.p, self.K, self.N, self.tau)

    def params(self) -> AnnealParams:
        return AnnealParams(protocol=self.protocol, p=self.p, gamma=self.gamma, q=self.q,
                            tau=self.tau, E0=self.E0, K=self.K)


class SweepRow(BaseModel):
    schema_version: str = CSV_SCHEMA_VERSION
    protocol: str
    N: int
    c: Optional[float] = None
    q: float
    gamma: float
    p: int
    tau: float
    K: int
    p_gs: Optional[float] = None
    cost_frob: Optional[float] = None
    cost_trace: Optional[float] = None
    norm_peak: Optional[float] = None
    theta_min_gap: Optional[float] = None
    min_gap: Optional[float] = None
    steps: Optional[int] = None
    flags: str = ""
    error: str = ""

    @classmethod
    def for_point(cls, point: SweepPoint, **values) -> "SweepRow":
        return cls(protocol=point.protocol.value, N=point.N, c=point.c, q=point.q,
                   gamma=point.gamma, p=point.p, tau=point.tau, K=point.K, **values)


class ExperimentSpec(BaseModel):
    """One sweep document: a grid over N x c x tau x K at fixed (protocol, p, gamma, q)."""
    model_config = ConfigDict(extra="forbid")

    name: str = "sweep"
    protocol: Protocol = Protocol.ARA
    p: int = 3
    gamma: float = Field(1.0, gt=0)
    E0: float = Field(1.0, gt=0)
    q: float = Field(1.0, gt=0)
    N: List[int] = Field(..., min_length=1)
    c: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    tau: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    K: List[int] = Field(default_factory=lambda: [0], min_length=1)
    theta_grid: int = Field(settings.COST_GRID, ge=201)
    gap_grid: int = Field(settings.GAP_GRID, ge=400)
    n_lambda: int = Field(64, ge=64)
    n_s: int = Field(64, ge=64)
    out_dir: str = settings.RESULTS_DIR
    p_d: float = Field(0.99, gt=0, lt=1)
    compute_costs: bool = True
    compute_gaps: bool = True
    threads: int = Field(settings.SWEEP_THREADS, ge=1)

    @field_validator("p")
    @classmethod
    def _odd_p(cls, p: int) -> int:
        if p < 3 or p % 2 == 0:
            raise ValueError(f"p must be an odd integer >= 3, got {p}")
        return p

    @field_validator("K")
    @classmethod
    def _orders(cls, orders: List[int]) -> List[int]:
        bad = [k for k in orders if not 0 <= k <= 3]
        if bad:
            raise ValueError(f"K must lie in 0..3, got {bad}")
        return orders

    @field_validator("tau")
    @classmethod
    def _positive_tau(cls, taus: List[float]) -> List[float]:
        if any(t <= 0 for t in taus):
            raise ValueError("every tau must be > 0")
        return taus

    @model_validator(mode="after")
    def _integral_up_counts(self):
        if self.protocol is Protocol.QA:
            return self
        for N, c in product(self.N, self.c):
            frac = as_fraction(c)
            if not 0 < frac <= 1:
                raise ValueError(f"c must lie in (0, 1], got {c}")
            if (frac * N).denominator != 1:
                raise ValueError(f"c*N must be an integer (N={N}, c={c})")
        return self

    def params(self, tau: float = None, K: int = None, protocol: Protocol = None) -> AnnealParams:
        return AnnealParams(protocol=protocol or self.protocol, p=self.p, gamma=self.gamma,
                            q=self.q, tau=self.tau[0] if tau is None else tau, E0=self.E0,
                            K=self.K[0] if K is None else K)

    def points(self) -> List[SweepPoint]:
        fractions = [None] if self.protocol is Protocol.QA else self.c
        grid = [
            SweepPoint(protocol=self.protocol, N=N, c=c, q=self.q, gamma=self.gamma,
                       p=self.p, tau=tau, K=K, E0=self.E0)
            for N, c, tau, K in product(self.N, fractions, self.tau, self.K)
        ]
        return sorted(grid, key=lambda pt: pt.key)

    def point_options(self, **changes) -> "PointOptions":
        values = dict(compute_costs=self.compute_costs, compute_gaps=self.compute_gaps,
                      theta_grid=self.theta_grid, gap_grid=self.gap_grid)
        values.update(changes)
        return PointOptions(**values)


class FitResult(BaseModel):
    kind: str  # "gamma" (P_GS ~ 2^-gamma N) or "alpha" (C ~ N^alpha)
    exponent: float
    intercept: float
    residual_rms: float
    n_points: int
    n_range: Tuple[int, int]
    excluded: List[int] = Field(default_factory=list)
    group: Dict[str, object] = Field(default_factory=dict)
    predicted: Optional[float] = None
    relative_deviation: Optional[float] = None


class PointOptions(BaseModel):
    """Per-point extras computed alongside P_GS."""
    model_config = ConfigDict(frozen=True)

    compute_costs: bool = False
    compute_gaps: bool = False
    theta_grid: int = Field(settings.COST_GRID, ge=201)
    gap_grid: int = Field(settings.GAP_GRID, ge=400)
