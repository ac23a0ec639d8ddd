from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import List, Optional, Sequence

from celery import group

from app.celery_config import celery_app
from app.common.config import settings
from app.common.models import NormKind, Protocol
from app.common.schemas import PointOptions, SweepPoint, SweepRow
from app.services.cd_driving import cost_from_trace, norm_trace
from app.services.dynamics import evolve
from app.services.sector_algebra import build_sector, ladder
from app.services.spectra import min_gap_along_path
from app.utils.logger import get_logger

logger = get_logger(__name__)


def evaluate_point(point: SweepPoint, options: PointOptions) -> SweepRow:
    """
    Run one grid point. Failures are logged and returned in the row's error
    column so the rest of the sweep keeps going.
    """
    try:
        sector = ladder(point.N) if point.protocol is Protocol.QA else build_sector(point.N, point.c)
        params = point.params()
        result = evolve(sector, params)
        values = {"p_gs": result.p_gs, "steps": result.steps}

        flags = []
        if result.below_trust_floor:
            flags.append("below_trust_floor")
        if result.p_gs <= settings.PRECISION_FLOOR:
            flags.append("below_precision_floor")

        if options.compute_costs:
            if point.K > 0:
                trace = norm_trace(sector, params, point.K, point.tau, options.theta_grid)
                values.update(cost_frob=cost_from_trace(trace, NormKind.FROBENIUS),
                              cost_trace=cost_from_trace(trace, NormKind.TRACE),
                              norm_peak=max(pt.frob_norm for pt in trace))
            else:
                values.update(cost_frob=0.0, cost_trace=0.0, norm_peak=0.0)

        if options.compute_gaps:
            theta_star, min_gap = min_gap_along_path(sector, point.q, params, options.gap_grid)
            values.update(theta_min_gap=theta_star, min_gap=min_gap)

        return SweepRow.for_point(point, flags=";".join(flags), **values)
    except Exception as e:
        logger.error(f"Sweep point {point.key} failed: {e}", exc_info=True)
        return _error_row(point, e)


def _error_row(point: SweepPoint, error: BaseException) -> SweepRow:
    return SweepRow.for_point(point, error=f"{type(error).__name__}: {error}")


@celery_app.task(name='app.tasks.sweep_processor.run_sweep_point')
def run_sweep_point(point: dict, options: dict) -> dict:
    """Celery task: JSON in, JSON out."""
    row = evaluate_point(SweepPoint(**point), PointOptions(**options))
    return row.model_dump()


def _evaluate_worker(args) -> SweepRow:
    point, options = args
    return evaluate_point(point, options)


def _run_local(points: Sequence[SweepPoint], options: PointOptions, threads: int) -> List[SweepRow]:
    if threads <= 1 or len(points) <= 1:
        return [evaluate_point(pt, options) for pt in points]
    rows: List[Optional[SweepRow]] = [None] * len(points)
    try:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            futures = {executor.submit(_evaluate_worker, (pt, options)): i for i, pt in enumerate(points)}
            for future in as_completed(futures):
                i = futures[future]
                try:
                    rows[i] = future.result()
                except Exception as e:
                    logger.error(f"Worker for point {points[i].key} failed: {e}", exc_info=True)
                    rows[i] = _error_row(points[i], e)
                    continue
                logger.info(f"Finished point {i + 1}/{len(points)}: N={points[i].N} "
                            f"c={points[i].c} tau={points[i].tau} K={points[i].K}")
    except (PermissionError, OSError) as e:
        logger.warning(f"Parallel execution unavailable ({e}); falling back to a single process")
        return [evaluate_point(pt, options) for pt in points]
    return rows


def _run_celery(points: Sequence[SweepPoint], options: PointOptions) -> List[SweepRow]:
    job = group(run_sweep_point.s(pt.model_dump(mode='json'), options.model_dump(mode='json'))
                for pt in points)
    logger.info(f"Submitting {len(points)} sweep points to Celery ({settings.REDIS_URL})")
    results = job.apply_async().get(timeout=settings.SWEEP_TASK_TIMEOUT * len(points), propagate=False)
    rows = []
    for pt, payload in zip(points, results):
        if isinstance(payload, dict):
            rows.append(SweepRow(**payload))
        else:
            logger.error(f"Celery task for point {pt.key} failed: {payload}")
            rows.append(SweepRow.for_point(pt, error=f"TaskError: {payload}"))
    return rows


def execute_points(points: Sequence[SweepPoint], options: PointOptions, threads: int = 1,
                   backend: str = None) -> List[SweepRow]:
    """Evaluate every point on the configured work pool; rows come back sorted by grid key."""
    backend = backend or settings.SWEEP_BACKEND
    ordered = sorted(points, key=lambda pt: pt.key)
    if backend == 'celery':
        rows = _run_celery(ordered, options)
    else:
        rows = _run_local(ordered, options, threads)
    failed = sum(1 for r in rows if r.error)
    logger.info(f"Sweep finished: {len(rows)} points, {failed} failed")
    return rows
