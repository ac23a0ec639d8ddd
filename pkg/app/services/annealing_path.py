from typing import Optional, Tuple

import numpy as np

from app.common.models import AnnealParams, Protocol, ScheduleSample, SpinSector
from app.services import sector_algebra as sa
from app.services.schedule import QUINTIC, Schedule, sample


class AnnealingPath:
    """
    H(theta) = a_v V_TF + a_0 H0 + a_p H_P along one protocol, with the
    component matrices built once.

    ARA: a_v = (1-s) lam, a_0 = (1-s)(1-lam), a_p = s.
    QA:  a_v = 1-s,       a_0 = 0,            a_p = s.
    """

    def __init__(self, v_tf: np.ndarray, h_p: np.ndarray, h0: Optional[np.ndarray],
                 psi0: np.ndarray, target: np.ndarray, *, protocol: Protocol, q: float,
                 schedule: Schedule = QUINTIC):
        self.v_tf = v_tf
        self.h_p = h_p
        self.h0 = h0 if h0 is not None else np.zeros_like(h_p)
        self.psi0 = psi0
        self.target = target
        self.protocol = protocol
        self.q = q
        self.schedule = schedule

    @classmethod
    def for_sector(cls, sector: SpinSector, params: AnnealParams,
                   schedule: Schedule = QUINTIC) -> "AnnealingPath":
        if params.protocol is Protocol.QA:
            return cls.for_ladder(sector.N, params, schedule)
        return cls(
            v_tf=sa.build_vtf(sector, params.gamma),
            h_p=sa.build_hp(sector, params.p, params.E0),
            h0=sa.build_h0(sector, params.E0),
            psi0=sa.initial_state(sector),
            target=sa.target_state(sector),
            protocol=Protocol.ARA, q=params.q, schedule=schedule,
        )

    @classmethod
    def for_ladder(cls, N: int, params: AnnealParams,
                   schedule: Schedule = QUINTIC) -> "AnnealingPath":
        sector = sa.ladder(N)
        return cls(
            v_tf=sa.build_vtf(sector, params.gamma),
            h_p=sa.build_hp(sector, params.p, params.E0),
            h0=None,
            psi0=sa.qa_initial_state(N),
            target=sa.target_state(sector),
            protocol=Protocol.QA, q=params.q, schedule=schedule,
        )

    @property
    def dim(self) -> int:
        return self.h_p.shape[0]

    def sample(self, theta: float) -> ScheduleSample:
        return sample(theta, self.q, self.schedule)

    def coefficients(self, lam: float, s: float) -> Tuple[float, float, float]:
        if self.protocol is Protocol.QA:
            return 1 - s, 0.0, s
        return (1 - s) * lam, (1 - s) * (1 - lam), s

    def _combine(self, a_v: float, a_0: float, a_p: float) -> np.ndarray:
        return a_v * self.v_tf + a_0 * self.h0 + a_p * self.h_p

    def hamiltonian_at(self, lam: float, s: float) -> np.ndarray:
        return self._combine(*self.coefficients(lam, s))

    def hamiltonian(self, theta: float) -> np.ndarray:
        pt = self.sample(theta)
        return self.hamiltonian_at(pt.lam, pt.s)

    def derivative(self, theta: float) -> np.ndarray:
        """Total derivative dH/dtheta along the path."""
        pt = self.sample(theta)
        if self.protocol is Protocol.QA:
            return pt.s_dot * (self.h_p - self.v_tf)
        da_v = pt.lam_dot * (1 - pt.s) - pt.s_dot * pt.lam
        da_0 = -pt.lam_dot * (1 - pt.s) - pt.s_dot * (1 - pt.lam)
        return self._combine(da_v, da_0, pt.s_dot)
