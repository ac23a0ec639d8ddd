"""
Celery worker entry point for the optional distributed sweep backend.

COMMANDS:

1. Start a sweep worker:
   celery -A worker.celery_app worker --loglevel=info

2. Run a sweep against the workers:
   SWEEP_BACKEND=celery python -m app.main fidelity-scan --config configs/fidelity_gamma1.yaml

IMPORTANT:
- Workers and the CLI must share REDIS_URL
- One sweep point runs per worker process; size the pool with --concurrency
"""

from app.celery_config import celery_app

# Import tasks to register them
from app.tasks import sweep_processor

# This allows running: celery -A worker.celery_app worker
if __name__ == '__main__':
    celery_app.start()
