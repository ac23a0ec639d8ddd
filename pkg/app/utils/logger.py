import logging
import sys

from app.common.config import settings

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format=settings.LOG_FORMAT,
    stream=sys.stdout
)


def get_logger(name: str = None):
    return logging.getLogger(name)
