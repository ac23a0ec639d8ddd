"""
Spectral gaps of the sector Hamiltonians: along annealing paths and over the
whole (lambda, s) control plane.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar

from app.common.config import settings
from app.common.models import AnnealParams, GapMap, SpinSector
from app.services.annealing_path import AnnealingPath
from ..utils.logger import get_logger

logger = get_logger(__name__)

# Annotated paths lambda = s^q on every gap map.
MAP_PATHS = {"q=1": 1.0, "q=1/2": 0.5}


def eig_symmetric(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of a real symmetric matrix."""
    return linalg.eigh(M)


def path_gap(path: AnnealingPath, lam: float, s: float) -> float:
    E = linalg.eigvalsh(path.hamiltonian_at(lam, s), subset_by_index=[0, 1])
    return max(float(E[1] - E[0]), 0.0)


def gap(sector: SpinSector, lam: float, s: float, params: AnnealParams) -> float:
    """E1 - E0 of the sector Hamiltonian at the control point (lam, s)."""
    return path_gap(AnnealingPath.for_sector(sector, params), lam, s)


def gap_along_theta(path: AnnealingPath, theta: float) -> float:
    pt = path.sample(theta)
    return path_gap(path, pt.lam, pt.s)


def min_gap_along_path(sector: SpinSector, q: float, params: AnnealParams,
                       grid: int = None) -> Tuple[float, float]:
    """
    Location and value of the smallest gap along lambda = s(theta)^q.

    Scans a uniform theta grid, then refines with a bounded scalar minimization
    between the neighbours of the best grid node.
    """
    n = settings.GAP_GRID if grid is None else grid
    if n < 400:
        raise ValueError(f"gap grid needs >= 400 points, got {n}")
    path = AnnealingPath.for_sector(sector, params.with_(q=q))
    thetas = np.linspace(0.0, 1.0, n)
    gaps = np.array([gap_along_theta(path, t) for t in thetas])
    i = int(np.argmin(gaps))
    lo, hi = thetas[max(i - 1, 0)], thetas[min(i + 1, n - 1)]
    best_theta, best_gap = float(thetas[i]), float(gaps[i])
    refined = minimize_scalar(lambda t: gap_along_theta(path, t), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-10})
    if refined.success and refined.fun < best_gap:
        best_theta, best_gap = float(refined.x), float(refined.fun)
    logger.debug(f"min gap N={sector.N} q={q}: {best_gap:.6e} at theta={best_theta:.5f}")
    return best_theta, best_gap


def _gap_row(path: AnnealingPath, lam: float, s_grid: np.ndarray) -> np.ndarray:
    return np.array([path_gap(path, lam, s) for s in s_grid])


def gap_map(sector: SpinSector, params: AnnealParams, n_lambda: int = 64, n_s: int = 64,
            threads: int = 1) -> GapMap:
    """
    Inverse gap 1/Delta(lambda, s) on a uniform grid, rescaled so its maximum is 1.

    Rows are filled in parallel. Gaps are floored at GAP_FLOOR before inversion.
    """
    if n_lambda < 64 or n_s < 64:
        raise ValueError(f"gap map needs at least 64 x 64 nodes, got {n_lambda} x {n_s}")
    path = AnnealingPath.for_sector(sector, params)
    lambda_grid = np.linspace(0.0, 1.0, n_lambda)
    s_grid = np.linspace(0.0, 1.0, n_s)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        rows = list(pool.map(lambda lam: _gap_row(path, lam, s_grid), lambda_grid))
    gaps = np.vstack(rows)

    inverse = 1.0 / np.maximum(gaps, settings.GAP_FLOOR)
    values = inverse / inverse.max()
    i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)

    paths, path_min = {}, {}
    for name, q in MAP_PATHS.items():
        lam_path = s_grid ** q
        paths[name] = lam_path.tolist()
        path_min[name] = float(min(path_gap(path, lam, s) for lam, s in zip(lam_path, s_grid)))

    logger.info(f"gap map N={sector.N} c={float(sector.c)}: raw min gap {gaps[i, j]:.4e} "
                f"at lambda={lambda_grid[i]:.3f}, s={s_grid[j]:.3f}")
    return GapMap(lambda_grid=lambda_grid, s_grid=s_grid, values=values,
                  raw_min_gap=float(gaps[i, j]),
                  argmin=(float(lambda_grid[i]), float(s_grid[j])),
                  paths=paths, path_min_gap=path_min)
