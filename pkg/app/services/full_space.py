"""
Brute-force 2^N oracle for the two-ladder reduction.

Operators are built from explicit Pauli products, with |0> = spin up and qubit 0
the most significant factor; the first N_up qubits form the up-biased set.
"""
import time
from functools import reduce
from math import comb
from typing import Optional

import numpy as np

from app.common.exceptions import DimensionTooLargeError
from app.common.models import AnnealParams, GaugeKind, Protocol, RunResult, SpinSector
from app.services.annealing_path import AnnealingPath
from app.services.dynamics import propagate, resolve_gauge
from app.services.sector_algebra import build_sector
from ..utils.logger import get_logger

logger = get_logger(__name__)

MAX_FULL_SPINS = 8

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def _check_size(N: int):
    if N > MAX_FULL_SPINS:
        raise DimensionTooLargeError(f"full-space oracle supports N <= {MAX_FULL_SPINS}, got {N}")


def site_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    factors = [op if i == site else np.eye(2) for i in range(N)]
    return reduce(np.kron, factors)


def full_vtf(N: int, gamma: float) -> np.ndarray:
    return -gamma * sum(site_operator(SIGMA_X, i, N) for i in range(N))


def full_hp(N: int, p: int, E0: float = 1.0) -> np.ndarray:
    mz = sum(site_operator(SIGMA_Z, i, N) for i in range(N)) / N
    return -N * E0 * np.linalg.matrix_power(mz, p)


def full_h0(N: int, n_up: int, E0: float = 1.0) -> np.ndarray:
    eps = [1.0 if i < n_up else -1.0 for i in range(N)]
    return -E0 * sum(e * site_operator(SIGMA_Z, i, N) for i, e in enumerate(eps))


def dicke_state(n: int, k: int) -> np.ndarray:
    """Symmetric state of n qubits with k spins down."""
    if n == 0:
        return np.ones(1)
    downs = np.array([bin(b).count("1") for b in range(2 ** n)])
    return np.where(downs == k, 1.0 / np.sqrt(comb(n, k)), 0.0)


def embed_sector_basis(sector: SpinSector) -> np.ndarray:
    """2^N x d isometry whose columns are the sector basis states, in sector order."""
    _check_size(sector.N)
    columns = [np.kron(dicke_state(sector.N_up, i), dicke_state(sector.N_dn, k))
               for i in range(sector.N_up + 1) for k in range(sector.N_dn + 1)]
    return np.column_stack(columns)


def full_space_path(N: int, c, params: AnnealParams) -> AnnealingPath:
    _check_size(N)
    dim = 2 ** N
    target = np.zeros(dim, dtype=complex)
    target[0] = 1.0
    v_tf = full_vtf(N, params.gamma)
    h_p = full_hp(N, params.p, params.E0)
    if params.protocol is Protocol.QA:
        psi0 = np.full(dim, 2.0 ** (-N / 2), dtype=complex)
        return AnnealingPath(v_tf, h_p, None, psi0, target, protocol=Protocol.QA, q=params.q)
    sector = build_sector(N, c)
    psi0 = np.zeros(dim, dtype=complex)
    psi0[2 ** sector.N_dn - 1] = 1.0  # up-set |0...0>, down-set |1...1>
    return AnnealingPath(v_tf, h_p, full_h0(N, sector.N_up, params.E0), psi0, target,
                         protocol=Protocol.ARA, q=params.q)


def evolve_full_space(N: int, c, params: AnnealParams, steps: Optional[int] = None,
                      gauge: Optional[GaugeKind] = None) -> RunResult:
    """
    Same propagation as `dynamics.evolve`, in the full 2^N space.

    Matches the sector run for K = 0 and for the exact gauge. Variational alphas
    here are fitted over the whole space, so K >= 1 runs are not expected to agree.
    """
    started = time.perf_counter()
    gauge = resolve_gauge(params, gauge)
    path = full_space_path(N, c, params)
    psi, p_gs, drift, used = propagate(path, params.tau, params.K, gauge, steps)
    elapsed = time.perf_counter() - started
    logger.info(f"full-space N={N} c={c} K={params.K}: P_GS={p_gs:.6e} steps={used}")
    return RunResult(params=params, N=N, c=None if params.protocol is Protocol.QA else float(c),
                     gauge=gauge, p_gs=p_gs, final_state=psi, norm_drift=drift, steps=used,
                     elapsed_s=elapsed)
