"""
Derived quantities: time to solution, scaling-exponent fits and the
perturbative consistency check of K = 0 sweeps.
"""
import math
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np
from scipy.stats import linregress

from app.common.config import settings
from app.common.exceptions import InsufficientPointsError
from app.common.schemas import FitResult
from app.services.schedule import effective_gamma, predicted_exponent
from ..utils.logger import get_logger

logger = get_logger(__name__)

MIN_FIT_POINTS = 3
# a single run already succeeds; ln(1 - P_GS) is not resolvable above this
CERTAIN_SUCCESS = 1 - 1e-15

Points = Union[Mapping[int, float], Iterable[Tuple[int, float]]]


def tts(p_gs: float, tau: float, p_d: float = 0.99) -> float:
    """Expected total anneal time to reach success probability p_d with repeated runs of length tau."""
    if not 0.0 <= p_gs <= 1.0:
        raise ValueError(f"P_GS must lie in [0, 1], got {p_gs}")
    if not 0.0 < p_d < 1.0:
        raise ValueError(f"p_d must lie in (0, 1), got {p_d}")
    if p_gs >= CERTAIN_SUCCESS:
        return float(tau)
    if p_gs == 0.0:
        return math.inf
    return float(tau * math.log1p(-p_d) / math.log1p(-p_gs))


def _as_pairs(points: Points) -> List[Tuple[int, float]]:
    items = points.items() if isinstance(points, Mapping) else points
    return sorted((int(n), float(v)) for n, v in items)


def _fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    reg = linregress(x, y)
    residual = y - (reg.intercept + reg.slope * x)
    return float(reg.slope), float(reg.intercept), float(np.sqrt(np.mean(residual ** 2)))


def fit_scaling_exponent(points: Points, floor: float = None, group: Dict = None) -> FitResult:
    """gamma from P_GS ~ 2^(-gamma N): least squares on log2 P_GS against N."""
    floor = settings.PRECISION_FLOOR if floor is None else floor
    pairs = _as_pairs(points)
    kept = [(n, p) for n, p in pairs if p > floor]
    excluded = [n for n, p in pairs if p <= floor]
    if excluded:
        logger.warning(f"excluding N={excluded} from the gamma fit (P_GS <= {floor:.0e})")
    if len(kept) < MIN_FIT_POINTS:
        raise InsufficientPointsError(
            f"gamma fit needs >= {MIN_FIT_POINTS} points above {floor:.0e}, got {len(kept)}"
        )
    N = np.array([n for n, _ in kept], dtype=float)
    slope, intercept, rms = _fit(N, np.log2([p for _, p in kept]))
    return FitResult(kind="gamma", exponent=-slope, intercept=intercept, residual_rms=rms,
                     n_points=len(kept), n_range=(int(N.min()), int(N.max())),
                     excluded=excluded, group=group or {})


def fit_power_law(points: Points, group: Dict = None) -> FitResult:
    """alpha from C ~ N^alpha: least squares on ln C against ln N."""
    pairs = _as_pairs(points)
    if any(v <= 0 for _, v in pairs):
        raise ValueError("power-law fit needs strictly positive values")
    if len(pairs) < MIN_FIT_POINTS:
        raise InsufficientPointsError(f"alpha fit needs >= {MIN_FIT_POINTS} points, got {len(pairs)}")
    N = np.array([n for n, _ in pairs], dtype=float)
    slope, intercept, rms = _fit(np.log(N), np.log([v for _, v in pairs]))
    return FitResult(kind="alpha", exponent=slope, intercept=intercept, residual_rms=rms,
                     n_points=len(pairs), n_range=(int(N.min()), int(N.max())), group=group or {})


def with_perturbative_prediction(fit: FitResult, c: float, tau: float, gamma: float,
                                 q: float) -> FitResult:
    """Attach gamma_pred = 2(1-c)|log2 Gamma_eff| and the relative deviation of the fit from it."""
    predicted = predicted_exponent(c, effective_gamma(tau, gamma, q))
    deviation = abs(fit.exponent - predicted) / abs(fit.exponent) if fit.exponent else math.inf
    if deviation > 0.10:
        logger.warning(f"gamma fit {fit.exponent:.3f} deviates {deviation:.1%} from the "
                       f"perturbative prediction {predicted:.3f} (c={c}, tau={tau}, q={q})")
    return fit.model_copy(update={"predicted": predicted, "relative_deviation": deviation})
