"""CSV and JSON outputs of the experiment runners."""
import json
import math
from pathlib import Path
from typing import Any, List, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.common.schemas import SWEEP_COLUMNS, SweepRow
from ..utils.logger import get_logger

logger = get_logger(__name__)


def ensure_dir(out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def rows_to_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in rows], columns=SWEEP_COLUMNS)


def write_csv(frame: pd.DataFrame, out_dir: Union[str, Path], filename: str) -> Path:
    path = ensure_dir(out_dir) / filename
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.12g")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _jsonable(value.model_dump(mode="json"))
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def write_json(payload: Any, out_dir: Union[str, Path], filename: str) -> Path:
    path = ensure_dir(out_dir) / filename
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info(f"Wrote {path}")
    return path


def read_sweep_csv(path: Union[str, Path]) -> pd.DataFrame:
    frame = pd.read_csv(path, keep_default_na=True)
    missing: List[str] = [c for c in ("protocol", "N", "p_gs") if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} is not a sweep CSV (missing columns {missing})")
    for column in ("flags", "error"):
        if column in frame.columns:
            frame[column] = frame[column].fillna("")
    return frame
