"""
Collective-spin operators and Hamiltonians in the two-ladder sector.

The up-biased and down-biased spin sets each keep maximal total spin, so every
operator here lives on the product of a (N_up + 1)- and a (N_dn + 1)-dimensional
ladder. Energies are in units of E0.
"""
from typing import Dict, Tuple

import numpy as np
from scipy.special import gammaln

from app.common.exceptions import NonIntegerFractionError
from app.common.models import SpinSector
from app.common.schemas import as_fraction
from ..utils.logger import get_logger

logger = get_logger(__name__)


def build_sector(N: int, c) -> SpinSector:
    """Sector with N_up = cN up-biased spins; c*N must be an exact integer."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    frac = as_fraction(c)
    if not 0 < frac <= 1:
        raise ValueError(f"c must lie in (0, 1], got {c}")
    n_up = frac * N
    if n_up.denominator != 1:
        raise NonIntegerFractionError(N, c)
    return SpinSector(N=N, N_up=int(n_up), N_dn=N - int(n_up))


def ladder(N: int) -> SpinSector:
    """Single maximal-spin ladder j = N/2 used by forward annealing."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return SpinSector(N=N, N_up=N, N_dn=0)


def spin_ladder(n_spins: int) -> Tuple[np.ndarray, np.ndarray]:
    """(S_z, S_x) for spin j = n_spins/2 with m descending from +j to -j."""
    j = n_spins / 2
    m = j - np.arange(n_spins + 1)
    sz = np.diag(m)
    m_lower = m[1:]
    off = 0.5 * np.sqrt(j * (j + 1) - m_lower * (m_lower + 1))
    sx = np.diag(off, 1) + np.diag(off, -1)
    return sz, sx


def magnetizations(sector: SpinSector) -> Tuple[np.ndarray, np.ndarray]:
    """Flattened (m_u, m_d) of every basis state."""
    m_up = sector.j_up - np.arange(sector.N_up + 1)
    m_dn = sector.j_dn - np.arange(sector.N_dn + 1)
    mu, md = np.meshgrid(m_up, m_dn, indexing="ij")
    return mu.ravel(), md.ravel()


def collective_ops(sector: SpinSector) -> Dict[str, np.ndarray]:
    sz_u, sx_u = spin_ladder(sector.N_up)
    sz_d, sx_d = spin_ladder(sector.N_dn)
    eye_u = np.eye(sector.N_up + 1)
    eye_d = np.eye(sector.N_dn + 1)
    return {
        "Szu": np.kron(sz_u, eye_d),
        "Szd": np.kron(eye_u, sz_d),
        "Sxu": np.kron(sx_u, eye_d),
        "Sxd": np.kron(eye_u, sx_d),
    }


def build_hp(sector: SpinSector, p: int, E0: float = 1.0) -> np.ndarray:
    """p-spin problem Hamiltonian -N E0 (2(m_u + m_d)/N)^p, diagonal."""
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p must be an odd integer >= 3, got {p}")
    mu, md = magnetizations(sector)
    return np.diag(-sector.N * E0 * (2 * (mu + md) / sector.N) ** p)


def build_h0(sector: SpinSector, E0: float = 1.0) -> np.ndarray:
    """Bias Hamiltonian -sum_{up} sigma_z + sum_{down} sigma_z = -2 S_z^u + 2 S_z^d."""
    mu, md = magnetizations(sector)
    return np.diag(E0 * (-2 * mu + 2 * md))


def build_vtf(sector: SpinSector, gamma: float) -> np.ndarray:
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    ops = collective_ops(sector)
    return -gamma * (2 * ops["Sxu"] + 2 * ops["Sxd"])


def ara_hamiltonian(sector: SpinSector, lam: float, s: float, p: int, gamma: float,
                    E0: float = 1.0) -> np.ndarray:
    """(1-s) lam V_TF + (1-s)(1-lam) H0 + s H_P."""
    if not (0 <= lam <= 1 and 0 <= s <= 1):
        raise ValueError(f"lambda and s must lie in [0, 1], got ({lam}, {s})")
    return ((1 - s) * lam * build_vtf(sector, gamma)
            + (1 - s) * (1 - lam) * build_h0(sector, E0)
            + s * build_hp(sector, p, E0))


def qa_hamiltonian(N: int, s: float, p: int, gamma: float, E0: float = 1.0) -> np.ndarray:
    """Forward annealing (1-s) V_TF + s H_P in the j = N/2 ladder."""
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    sector = ladder(N)
    return (1 - s) * build_vtf(sector, gamma) + s * build_hp(sector, p, E0)


def _basis_vector(sector: SpinSector, i_up: int, i_dn: int) -> np.ndarray:
    psi = np.zeros(sector.d, dtype=complex)
    psi[sector.index(i_up, i_dn)] = 1.0
    return psi


def initial_state(sector: SpinSector) -> np.ndarray:
    """Classical ground state of H0: m_u = j_u, m_d = -j_d."""
    return _basis_vector(sector, 0, sector.N_dn)


def target_state(sector: SpinSector) -> np.ndarray:
    """Ferromagnetic ground state of H_P: m_u = j_u, m_d = j_d."""
    return _basis_vector(sector, 0, 0)


def qa_initial_state(N: int) -> np.ndarray:
    """Ground state of V_TF in the ladder: amplitude sqrt(binom(N, k)) / 2^(N/2) at m = j - k."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    k = np.arange(N + 1)
    log_amp = 0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)) - 0.5 * N * np.log(2)
    return np.exp(log_amp).astype(complex)
