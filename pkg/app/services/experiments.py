"""
Experiment runners behind the CLI subcommands.

Each runner takes a validated ExperimentSpec, evaluates its grid on the sweep
work pool, writes CSV/JSON files into the output directory and returns a
ScanOutcome. Rows are always ordered by grid key.
"""
import math
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from app.common.exceptions import InsufficientPointsError
from app.common.models import Protocol
from app.common.schemas import CSV_SCHEMA_VERSION, ExperimentSpec, SweepPoint
from app.services import metrics
from app.services.cd_driving import norm_trace
from app.services.results_writer import read_sweep_csv, rows_to_frame, write_csv, write_json
from app.services.sector_algebra import build_sector
from app.services.spectra import gap_map, min_gap_along_path
from app.tasks.sweep_processor import execute_points
from ..utils.logger import get_logger

logger = get_logger(__name__)

FIT_GROUP = ["protocol", "c", "q", "gamma", "p", "K", "tau"]


class ScanOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    frame: pd.DataFrame
    summary: Dict = Field(default_factory=dict)
    failed: int = 0
    files: List[str] = Field(default_factory=list)


def _threads(spec: ExperimentSpec, threads: Optional[int]) -> int:
    return spec.threads if threads is None else threads


def _out_dir(spec: ExperimentSpec, out_dir: Optional[str]) -> Path:
    return Path(out_dir or spec.out_dir)


def _clean(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, np.generic):
        return value.item()
    return value


def _groups(frame: pd.DataFrame, keys: List[str]):
    for values, group in frame.groupby(keys, dropna=False, sort=True):
        yield {k: _clean(v) for k, v in zip(keys, values)}, group


def fit_frame(frame: pd.DataFrame) -> Dict:
    """gamma fits over N for every (protocol, c, q, gamma, p, K, tau) group, alpha fits where costs exist."""
    ok = frame[frame["error"].fillna("") == ""] if "error" in frame.columns else frame
    fits, skipped = [], []
    for group, rows in _groups(ok, FIT_GROUP):
        points = dict(zip(rows["N"].astype(int), rows["p_gs"].astype(float)))
        try:
            fit = metrics.fit_scaling_exponent(points, group=group)
            if group["K"] == 0 and group["protocol"] == Protocol.ARA.value:
                fit = metrics.with_perturbative_prediction(fit, group["c"], group["tau"],
                                                           group["gamma"], group["q"])
            fits.append(fit)
        except InsufficientPointsError as e:
            skipped.append({"group": group, "reason": str(e)})

        if group["K"] > 0 and "cost_frob" in rows.columns and rows["cost_frob"].notna().all():
            for column in ("cost_frob", "cost_trace"):
                costs = dict(zip(rows["N"].astype(int), rows[column].astype(float)))
                try:
                    fits.append(metrics.fit_power_law(costs, group={**group, "norm": column}))
                except (InsufficientPointsError, ValueError) as e:
                    skipped.append({"group": {**group, "norm": column}, "reason": str(e)})
    for fit in fits:
        logger.info(f"{fit.kind} fit {fit.group}: {fit.exponent:.4f} over N={fit.n_range}")
    return {"fits": fits, "skipped": skipped}


def _base_summary(spec_name: str, frame: pd.DataFrame) -> Dict:
    failed = int((frame["error"].fillna("") != "").sum()) if "error" in frame.columns else 0
    return {"name": spec_name, "schema_version": CSV_SCHEMA_VERSION,
            "points": int(len(frame)), "failed": failed}


def run_sweep(spec: ExperimentSpec, out_dir: str = None, threads: int = None,
              csv_name: str = "sweep.csv", **option_changes) -> ScanOutcome:
    """Evaluate the whole grid; write one CSV row per point and a JSON summary with fits."""
    points = spec.points()
    logger.info(f"Starting sweep '{spec.name}': {len(points)} points")
    rows = execute_points(points, spec.point_options(**option_changes), _threads(spec, threads))
    frame = rows_to_frame(rows)
    summary = {**_base_summary(spec.name, frame), **fit_frame(frame)}
    out = _out_dir(spec, out_dir)
    files = [write_csv(frame, out, csv_name), write_json(summary, out, "summary.json")]
    return ScanOutcome(frame=frame, summary=summary, failed=summary["failed"],
                       files=[str(f) for f in files])


def fit_csv(csv_path: str, out_dir: str = None) -> ScanOutcome:
    """Refit an existing sweep CSV."""
    frame = read_sweep_csv(csv_path)
    summary = {**_base_summary(Path(csv_path).stem, frame), **fit_frame(frame)}
    out = Path(out_dir) if out_dir else Path(csv_path).parent
    path = write_json(summary, out, "fits.json")
    return ScanOutcome(frame=frame, summary=summary, failed=summary["failed"], files=[str(path)])


def tts_scan(spec: ExperimentSpec, out_dir: str = None, threads: int = None) -> ScanOutcome:
    """P_GS over the tau grid with the TTS column and the best tau per (protocol, c, K, N)."""
    rows = execute_points(spec.points(), spec.point_options(compute_costs=False, compute_gaps=False),
                          _threads(spec, threads))
    frame = rows_to_frame(rows)
    frame["tts"] = [
        metrics.tts(float(p), float(t), spec.p_d) if pd.notna(p) else math.nan
        for p, t in zip(frame["p_gs"], frame["tau"])
    ]
    best = []
    ok = frame[frame["error"] == ""]
    for group, curve in _groups(ok, ["protocol", "c", "K", "N"]):
        i = curve["tts"].astype(float).idxmin()
        best.append({**group, "tau_opt": float(curve.loc[i, "tau"]), "tts_min": float(curve.loc[i, "tts"])})
    summary = {**_base_summary(spec.name, frame), "p_d": spec.p_d, "min_over_tau": best}
    out = _out_dir(spec, out_dir)
    files = [write_csv(frame, out, "tts.csv"), write_json(summary, out, "summary.json")]
    return ScanOutcome(frame=frame, summary=summary, failed=summary["failed"],
                       files=[str(f) for f in files])


def cost_scan(spec: ExperimentSpec, out_dir: str = None, threads: int = None) -> ScanOutcome:
    """CD cost per N for every K >= 1 with power-law fits in both norms."""
    return run_sweep(spec, out_dir, threads, csv_name="cost.csv",
                     compute_costs=True, compute_gaps=False)


def norm_trace_scan(spec: ExperimentSpec, out_dir: str = None) -> ScanOutcome:
    """||(1/tau) A|| along theta for each (N, c, K >= 1, tau), with peak and min-gap locations."""
    records, curves, failed = [], [], 0
    for N, c, tau, K in product(spec.N, spec.c, spec.tau, [k for k in spec.K if k > 0]):
        params = spec.params(tau=tau, K=K)
        try:
            sector = build_sector(N, c)
            trace = norm_trace(sector, params, K, tau, spec.theta_grid)
            theta_gap, min_gap = min_gap_along_path(sector, spec.q, params, spec.gap_grid)
        except Exception as e:
            logger.error(f"Norm trace N={N} c={c} K={K} failed: {e}", exc_info=True)
            failed += 1
            continue
        peak = max(trace, key=lambda pt: pt.frob_norm)
        curves.append({"N": N, "c": c, "K": K, "tau": tau, "peak_frob": peak.frob_norm,
                       "theta_peak": peak.theta, "theta_min_gap": theta_gap, "min_gap": min_gap})
        records.extend({"N": N, "c": c, "K": K, "tau": tau, "theta": pt.theta,
                        "frob_norm": pt.frob_norm, "trace_norm": pt.trace_norm} for pt in trace)
    frame = pd.DataFrame(records, columns=["N", "c", "K", "tau", "theta", "frob_norm", "trace_norm"])
    summary = {"name": spec.name, "curves": curves, "failed": failed}
    out = _out_dir(spec, out_dir)
    files = [write_csv(frame, out, "norm_trace.csv"), write_json(summary, out, "summary.json")]
    return ScanOutcome(frame=frame, summary=summary, failed=failed, files=[str(f) for f in files])


def gap_map_scan(spec: ExperimentSpec, out_dir: str = None, threads: int = None) -> ScanOutcome:
    """Rescaled inverse-gap maps for every (N, c) with a JSON sidecar of minima and path gaps."""
    frames, maps, failed = [], [], 0
    for N, c in product(spec.N, spec.c):
        try:
            gm = gap_map(build_sector(N, c), spec.params(), spec.n_lambda, spec.n_s,
                         threads=_threads(spec, threads))
        except Exception as e:
            logger.error(f"Gap map N={N} c={c} failed: {e}", exc_info=True)
            failed += 1
            continue
        lam, s = np.meshgrid(gm.lambda_grid, gm.s_grid, indexing="ij")
        frames.append(pd.DataFrame({"N": N, "c": c, "lambda": lam.ravel(), "s": s.ravel(),
                                    "rescaled_inv_gap": gm.values.ravel()}))
        maps.append({"N": N, "c": c, "raw_min_gap": gm.raw_min_gap,
                     "argmin": {"lambda": gm.argmin[0], "s": gm.argmin[1]},
                     "path_min_gap": gm.path_min_gap})
    columns = ["N", "c", "lambda", "s", "rescaled_inv_gap"]
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=columns)
    summary = {"name": spec.name, "maps": maps, "failed": failed}
    out = _out_dir(spec, out_dir)
    files = [write_csv(frame, out, "gap_map.csv"), write_json(summary, out, "gap_map.json")]
    return ScanOutcome(frame=frame, summary=summary, failed=failed, files=[str(f) for f in files])


def compare_ara_qa(spec: ExperimentSpec, out_dir: str = None, threads: int = None) -> ScanOutcome:
    """Per-N P_GS of ARA, CRA1 (at each c) and QA, QA1 (c-independent) at the first tau of the spec."""
    tau = spec.tau[0]
    common = dict(q=spec.q, gamma=spec.gamma, p=spec.p, tau=tau, E0=spec.E0)
    points = [SweepPoint(protocol=Protocol.ARA, N=N, c=c, K=K, **common)
              for N, c, K in product(spec.N, spec.c, (0, 1))]
    points += [SweepPoint(protocol=Protocol.QA, N=N, c=None, K=K, **common)
               for N, K in product(spec.N, (0, 1))]
    rows = execute_points(points, spec.point_options(compute_costs=False, compute_gaps=False),
                          _threads(spec, threads))
    by_key = {(r.protocol, r.N, r.c, r.K): r.p_gs for r in rows}
    records = []
    for N, c in product(sorted(spec.N), sorted(spec.c)):
        records.append({
            "N": N, "c": c, "tau": tau,
            "ARA": by_key.get((Protocol.ARA.value, N, c, 0)),
            "CRA1": by_key.get((Protocol.ARA.value, N, c, 1)),
            "QA": by_key.get((Protocol.QA.value, N, None, 0)),
            "QA1": by_key.get((Protocol.QA.value, N, None, 1)),
        })
    frame = pd.DataFrame(records, columns=["N", "c", "tau", "ARA", "CRA1", "QA", "QA1"])
    failed = sum(1 for r in rows if r.error)
    path = write_csv(frame, _out_dir(spec, out_dir), "compare_qa.csv")
    return ScanOutcome(frame=frame, summary={"name": spec.name, "failed": failed}, failed=failed,
                       files=[str(path)])


def _local_minima(taus: np.ndarray, values: np.ndarray) -> List[float]:
    return [float(taus[i]) for i in range(1, len(values) - 1)
            if values[i] < values[i - 1] and values[i] < values[i + 1]]


def pgs_heatmap(spec: ExperimentSpec, out_dir: str = None, threads: int = None) -> ScanOutcome:
    """
    ln P_GS over N x tau for each K at the first c of the spec, linearly
    interpolated onto every integer N between the computed sizes.
    """
    c = spec.c[0]
    points = [pt for pt in spec.points() if pt.c == c]
    rows = execute_points(points, spec.point_options(compute_costs=False, compute_gaps=False),
                          _threads(spec, threads))
    computed = pd.DataFrame([{"N": r.N, "tau": r.tau, "K": r.K, "p_gs": r.p_gs} for r in rows
                             if not r.error and r.p_gs is not None and r.p_gs > 0],
                            columns=["N", "tau", "K", "p_gs"])
    records = []
    for (K, tau), curve in computed.groupby(["K", "tau"], sort=True):
        curve = curve.sort_values("N")
        N_grid = curve["N"].to_numpy()
        ln_p = np.log(curve["p_gs"].to_numpy(dtype=float))
        fine = np.arange(N_grid.min(), N_grid.max() + 1)
        for N, value in zip(fine, np.interp(fine, N_grid, ln_p)):
            records.append({"c": c, "K": int(K), "tau": float(tau), "N": int(N),
                            "ln_pgs": float(value), "interpolated": bool(N not in N_grid)})
    frame = pd.DataFrame(records, columns=["c", "K", "tau", "N", "ln_pgs", "interpolated"])

    summary: Dict = {"name": spec.name, "c": c, "failed": sum(1 for r in rows if r.error)}
    grid = frame[~frame["interpolated"]] if len(frame) else frame
    orders = sorted(grid["K"].unique()) if len(grid) else []
    if 0 in orders and len(orders) > 1:
        top = max(orders)
        merged = grid[grid["K"] == 0].merge(grid[grid["K"] == top], on=["N", "tau"], suffixes=("_ara", "_cra"))
        summary["cd_order"] = int(top)
        summary["cra_ge_ara_everywhere"] = bool((merged["ln_pgs_cra"] >= merged["ln_pgs_ara"] - 1e-9).all())
        summary["tau_local_minima"] = {
            int(N): _local_minima(curve["tau"].to_numpy(), curve["ln_pgs"].to_numpy())
            for N, curve in grid[grid["K"] == top].sort_values("tau").groupby("N")
        }
    out = _out_dir(spec, out_dir)
    files = [write_csv(frame, out, "heatmap.csv"), write_json(summary, out, "heatmap.json")]
    return ScanOutcome(frame=frame, summary=summary, failed=summary["failed"],
                       files=[str(f) for f in files])
