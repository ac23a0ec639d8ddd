"""
Approximate adiabatic gauge potential from a nested-commutator expansion.

With L(Y) = [H, Y], the ansatz A* = i sum_k alpha_k L^{2k-1}(dH) leaves the
residual G = dH + sum_k alpha_k L^{2k}(dH). The alphas minimize ||G||_F through
the K x K normal equations M alpha = -b. Every L^{odd}(dH) is real antisymmetric
for real symmetric H and dH, so the gauge potential is carried as its real
generator (A* = 1j * generator).
"""
from typing import List, Sequence, Union

import numpy as np
from scipy import linalg, sparse
from scipy.integrate import simpson

from app.common.config import settings
from app.common.exceptions import DegenerateSpectrumError
from app.common.models import AnnealParams, CDExpansion, NormKind, NormTracePoint, SpinSector
from app.services.annealing_path import AnnealingPath
from ..utils.logger import get_logger

logger = get_logger(__name__)

MAX_ORDER = 3


def frobenius_inner(X: np.ndarray, Y: np.ndarray) -> float:
    """Tr(X^dagger Y), real part; no 1/d normalization."""
    return float(np.vdot(X, Y).real)


def nested_commutator(H, X: np.ndarray, m: int) -> np.ndarray:
    """L^m(X) with L(Y) = [H, Y]."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return _commutator_powers(H, X, m)[-1]


def _commutator_powers(H, X: np.ndarray, n: int) -> List[np.ndarray]:
    """[L^1(X), ..., L^n(X)]; H is applied as a sparse operator."""
    H_op = sparse.csr_array(H)
    H_t = H_op.T.tocsr()
    powers = []
    Y = X
    for _ in range(n):
        Y = H_op @ Y - (H_t @ Y.T).T
        powers.append(Y)
    return powers


def _zero_expansion(dim: int, K: int, residual: float) -> CDExpansion:
    return CDExpansion(K=K, alphas=[0.0] * K, generator=np.zeros((dim, dim)),
                       residual_norm=residual, degenerate=True, rank=0)


def variational_coefficients(H: np.ndarray, dH: np.ndarray, K: int) -> CDExpansion:
    """Optimal alpha_1..alpha_K and the resulting gauge generator."""
    if not 1 <= K <= MAX_ORDER:
        raise ValueError(f"K must lie in 1..{MAX_ORDER}, got {K}")
    dim = H.shape[0]
    dh_norm = float(np.linalg.norm(dH))
    h_scale = float(np.abs(H).sum(axis=1).max())
    if dh_norm == 0.0 or h_scale == 0.0:
        return _zero_expansion(dim, K, dh_norm)

    # Work with H / ||H||_inf and dH / ||dH||_F; alpha_k picks up h_scale^(-2k).
    X = dH / dh_norm
    powers = _commutator_powers(H / h_scale, X, 2 * K)
    even = [powers[2 * k - 1] for k in range(1, K + 1)]
    gram = np.array([[frobenius_inner(a, b) for b in even] for a in even])
    rhs = np.array([frobenius_inner(a, X) for a in even])

    w, U = linalg.eigh(gram)
    if w[-1] <= 1e-24:
        logger.debug("dH commutes with H, no counterdiabatic correction needed")
        return _zero_expansion(dim, K, dh_norm)
    keep = w > settings.GRAM_RCOND * w[-1]
    rank = int(keep.sum())
    if rank < K:
        logger.debug(f"Gram matrix truncated to rank {rank} of {K} (eigenvalues {w})")
    alpha_scaled = -U[:, keep] @ ((U[:, keep].T @ rhs) / w[keep])

    residual = X + sum(a * e for a, e in zip(alpha_scaled, even))
    generator = sum(a * powers[2 * k] for k, a in enumerate(alpha_scaled)) * (dh_norm / h_scale)
    alphas = [float(a) / h_scale ** (2 * (k + 1)) for k, a in enumerate(alpha_scaled)]
    return CDExpansion(K=K, alphas=alphas, generator=np.asarray(generator),
                       residual_norm=dh_norm * float(np.linalg.norm(residual)),
                       degenerate=False, rank=rank)


def gauge_residual(H: np.ndarray, dH: np.ndarray, A: np.ndarray) -> float:
    """||dH + i[A, H]||_F."""
    return float(np.linalg.norm(dH + 1j * (A @ H - H @ A)))


def exact_gauge_generator(H: np.ndarray, dH: np.ndarray, strict: bool = True,
                          spacing_tol: float = None) -> np.ndarray:
    """Real antisymmetric X with A = 1j * X, X_mn = <m|dH|n> / (E_n - E_m) in the eigenbasis.

    With strict=False, pairs closer than spacing_tol are dropped instead of raising.
    """
    tol = settings.SPACING_TOL if spacing_tol is None else spacing_tol
    dim = H.shape[0]
    if not np.any(dH):
        return np.zeros((dim, dim))
    E, V = linalg.eigh(H)
    spacing = np.subtract.outer(E, E).T  # [m, n] -> E_n - E_m
    close = (np.abs(spacing) < tol) & ~np.eye(dim, dtype=bool)
    if np.any(close):
        if strict:
            raise DegenerateSpectrumError(f"minimum level spacing {np.min(np.diff(E)):.3e} below {tol:.1e}")
        logger.debug(f"dropping {int(close.sum()) // 2} near-degenerate pairs from the exact gauge")
    dh_eig = V.T @ dH @ V
    with np.errstate(divide="ignore", invalid="ignore"):
        X = np.where(close | np.eye(dim, dtype=bool), 0.0, dh_eig / spacing)
    return V @ X @ V.T


def exact_gauge_potential(H: np.ndarray, dH: np.ndarray) -> np.ndarray:
    """Spectral solution of [dH + i[A, H], H] = 0 with zero diagonal in the eigenbasis."""
    return 1j * exact_gauge_generator(H, dH, strict=True)


def dh_dtheta(sector: SpinSector, theta: float, params: AnnealParams) -> np.ndarray:
    return AnnealingPath.for_sector(sector, params).derivative(theta)


def cd_expansion(path: AnnealingPath, theta: float, K: int) -> CDExpansion:
    return variational_coefficients(path.hamiltonian(theta), path.derivative(theta), K)


def cd_term(sector: SpinSector, theta: float, params: AnnealParams, K: int = None,
            tau: float = None) -> np.ndarray:
    """(1/tau) A*_theta, the counterdiabatic term v_dot . A in physical time."""
    K = params.K if K is None else K
    tau = params.tau if tau is None else tau
    if K < 1:
        raise ValueError(f"K must be >= 1 for a counterdiabatic term, got {K}")
    path = AnnealingPath.for_sector(sector, params)
    return cd_expansion(path, theta, K).gauge / tau


def _theta_grid(grid: Union[int, Sequence[float]]) -> np.ndarray:
    if np.ndim(grid) == 0:
        return np.linspace(0.0, 1.0, int(grid))
    return np.asarray(grid, dtype=float)


def norms_on_path(path: AnnealingPath, K: int, tau: float,
                  grid: Union[int, Sequence[float]]) -> List[NormTracePoint]:
    points = []
    for theta in _theta_grid(grid):
        generator = cd_expansion(path, theta, K).generator / tau
        if np.any(generator):
            frob = float(np.linalg.norm(generator))
            trace = float(linalg.svdvals(generator).sum())
        else:
            frob = trace = 0.0
        points.append(NormTracePoint(theta=float(theta), frob_norm=frob, trace_norm=trace))
    return points


def norm_trace(sector: SpinSector, params: AnnealParams, K: int, tau: float,
               grid: Union[int, Sequence[float]]) -> List[NormTracePoint]:
    """Frobenius and trace norms of the CD term on a theta grid."""
    return norms_on_path(AnnealingPath.for_sector(sector, params), K, tau, grid)


def cost_from_trace(trace: List[NormTracePoint], norm_kind: NormKind = NormKind.FROBENIUS) -> float:
    thetas = np.array([pt.theta for pt in trace])
    attr = "frob_norm" if NormKind(norm_kind) is NormKind.FROBENIUS else "trace_norm"
    values = np.array([getattr(pt, attr) for pt in trace])
    return float(simpson(values, x=thetas))


def cd_cost(sector: SpinSector, params: AnnealParams, K: int, tau: float,
            norm_kind: NormKind = NormKind.FROBENIUS, grid: int = None) -> float:
    """Time-averaged norm of the CD term, int_0^1 ||(1/tau) A_theta|| d theta."""
    if K == 0:
        return 0.0
    n = settings.COST_GRID if grid is None else grid
    if n < 201:
        raise ValueError(f"cost grid needs >= 201 points, got {n}")
    return cost_from_trace(norm_trace(sector, params, K, tau, n), norm_kind)
