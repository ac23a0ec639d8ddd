from pathlib import Path
from typing import Union

import yaml
from pydantic import ValidationError

from app.common.exceptions import ConfigError
from app.common.schemas import ExperimentSpec
from ..utils.logger import get_logger

logger = get_logger(__name__)


def load_spec(path: Union[str, Path], **overrides) -> ExperimentSpec:
    """
    Read one YAML experiment document into an ExperimentSpec.

    Overrides with a value of None are ignored, so CLI flags can be passed straight through.
    """
    path = Path(path)
    try:
        with open(path) as fh:
            document = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}")
    if not isinstance(document, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")

    document.update({k: v for k, v in overrides.items() if v is not None})
    try:
        spec = ExperimentSpec(**document)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment document {path}: {e}")
    logger.info(f"Loaded experiment '{spec.name}' from {path} ({len(spec.points())} grid points)")
    return spec
