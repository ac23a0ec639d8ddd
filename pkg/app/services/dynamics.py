"""
Time-dependent Schrodinger propagation for ARA / QA with optional CD driving.

In normalized time the state obeys i d psi/d theta = (tau H + A) psi, with A the
gauge potential built from dH/dtheta. Since A = 1j * generator with a real
generator, d psi / d theta = (-1j tau H + generator) psi.
"""
import math
import time
from typing import Callable, Optional, Tuple

import numpy as np

from app.common.config import settings
from app.common.exceptions import NonConvergedError
from app.common.models import AnnealParams, GaugeKind, Protocol, RunResult, SpinSector
from app.services import sector_algebra as sa
from app.services.annealing_path import AnnealingPath
from app.services.cd_driving import exact_gauge_generator, norms_on_path, variational_coefficients
from ..utils.logger import get_logger

logger = get_logger(__name__)


def resolve_gauge(params: AnnealParams, gauge: Optional[GaugeKind] = None) -> GaugeKind:
    if gauge is not None:
        return GaugeKind(gauge)
    return GaugeKind.VARIATIONAL if params.K > 0 else GaugeKind.NONE


def make_generator(path: AnnealingPath, tau: float, K: int,
                   gauge: GaugeKind) -> Callable[[float], np.ndarray]:
    """theta -> M(theta) with d psi / d theta = M psi."""

    def generator(theta: float) -> np.ndarray:
        H = path.hamiltonian(theta)
        M = -1j * tau * H
        if gauge is GaugeKind.VARIATIONAL and K > 0:
            M += variational_coefficients(H, path.derivative(theta), K).generator
        elif gauge is GaugeKind.EXACT:
            M += exact_gauge_generator(H, path.derivative(theta), strict=False)
        return M

    return generator


def rk4(generator: Callable[[float], np.ndarray], psi0: np.ndarray, steps: int) -> Tuple[np.ndarray, float]:
    """Fixed-step classical RK4 on [0, 1]; returns the final state and the largest norm drift."""
    h = 1.0 / steps
    psi = psi0.astype(complex)
    M_start = generator(0.0)
    drift = 0.0
    for n in range(steps):
        M_mid = generator((n + 0.5) * h)
        M_end = generator((n + 1) / steps)
        k1 = M_start @ psi
        k2 = M_mid @ (psi + 0.5 * h * k1)
        k3 = M_mid @ (psi + 0.5 * h * k2)
        k4 = M_end @ (psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = max(drift, abs(np.linalg.norm(psi) - 1.0))
        M_start = M_end
    return psi, drift


def initial_steps(path: AnnealingPath, tau: float) -> int:
    """Step count for the first pass, from tau * ||H||_inf over the path."""
    scale = tau * max(float(np.abs(path.hamiltonian(t)).sum(axis=1).max())
                      for t in (0.0, 0.25, 0.5, 0.75, 1.0))
    # RK4 loses about z^6 / 72 of norm per step at phase z = scale / steps.
    z_drift = (72.0 * settings.NORM_DRIFT_TOL / max(scale, 1e-12)) ** 0.2
    z = min(settings.PHASE_PER_STEP, z_drift)
    return max(settings.MIN_STEPS, math.ceil(scale / z))


def fidelity(target: np.ndarray, psi: np.ndarray) -> float:
    return float(min(abs(np.vdot(target, psi)) ** 2, 1.0))


def propagate(path: AnnealingPath, tau: float, K: int, gauge: GaugeKind,
              steps: Optional[int] = None) -> Tuple[np.ndarray, float, float, int]:
    """
    Integrate with step halving until P_GS is stable.

    Accepts when successive passes differ by less than PGS_ATOL and by less than
    PGS_RTOL relative to max(P_GS, PGS_RTOL_FLOOR), and the norm drift is below
    NORM_DRIFT_TOL.
    Returns (final_state, p_gs, norm_drift, steps).
    """
    generator = make_generator(path, tau, K, gauge)
    n = steps or initial_steps(path, tau)
    previous = None
    for attempt in range(settings.MAX_HALVINGS + 1):
        psi, drift = rk4(generator, path.psi0, n)
        p_gs = fidelity(path.target, psi)
        logger.debug(f"pass {attempt}: steps={n} P_GS={p_gs:.6e} drift={drift:.2e}")
        if previous is not None:
            change = abs(p_gs - previous)
            reference = max(p_gs, settings.PGS_RTOL_FLOOR)
            if (change < settings.PGS_ATOL and change <= settings.PGS_RTOL * reference
                    and drift < settings.NORM_DRIFT_TOL):
                return psi, p_gs, drift, n
        previous = p_gs
        n *= 2
    raise NonConvergedError(
        f"P_GS not stable after {settings.MAX_HALVINGS} halvings (last {previous:.6e}, steps {n // 2})"
    )


def evolve(sector: SpinSector, params: AnnealParams, steps: Optional[int] = None,
           gauge: Optional[GaugeKind] = None, record_norms: bool = False,
           norm_grid: int = None) -> RunResult:
    """Run one anneal and measure the final ground-state fidelity."""
    started = time.perf_counter()
    gauge = resolve_gauge(params, gauge)
    path = AnnealingPath.for_sector(sector, params)
    psi, p_gs, drift, used = propagate(path, params.tau, params.K, gauge, steps)

    below_floor = p_gs < settings.TRUST_FLOOR
    if below_floor:
        logger.warning(f"P_GS={p_gs:.3e} below the double-precision trust floor "
                       f"(N={sector.N}, c={float(sector.c)}, K={params.K}, tau={params.tau})")
    trace = None
    if record_norms and params.K > 0:
        trace = norms_on_path(path, params.K, params.tau, norm_grid or settings.COST_GRID)

    c = None if params.protocol is Protocol.QA else float(sector.c)
    elapsed = time.perf_counter() - started
    logger.info(f"{params.protocol.value} N={sector.N} c={c} K={params.K} tau={params.tau} "
                f"gauge={gauge.value}: P_GS={p_gs:.4e} steps={used} ({elapsed:.1f}s)")
    return RunResult(params=params, N=sector.N, c=c, gauge=gauge, p_gs=p_gs, final_state=psi,
                     norm_drift=drift, steps=used, below_trust_floor=below_floor,
                     norm_trace=trace, elapsed_s=elapsed)


def evolve_qa(N: int, params: AnnealParams, steps: Optional[int] = None,
              gauge: Optional[GaugeKind] = None) -> RunResult:
    """Forward annealing in the j = N/2 ladder from the transverse-field ground state."""
    return evolve(sa.ladder(N), params.with_(protocol=Protocol.QA), steps=steps, gauge=gauge)


def adiabatic_check(sector: SpinSector, params: AnnealParams,
                    gauge: GaugeKind = GaugeKind.NONE) -> RunResult:
    """Long-time (or exact-gauge) run expected to reach P_GS -> 1."""
    result = evolve(sector, params.with_(K=0), gauge=gauge)
    if result.p_gs < 0.99:
        logger.warning(f"adiabatic check reached only P_GS={result.p_gs:.4f} "
                       f"(N={sector.N}, tau={params.tau}, gauge={gauge.value})")
    return result
