from celery import Celery

from app.common.config import settings

# Initialize Celery app
celery_app = Celery(
    'cra_sweeps',
    broker=settings.REDIS_URL,
    backend=settings.REDIS_URL,
    include=['app.tasks.sweep_processor']
)

# Celery configuration
celery_app.conf.update(
    task_serializer='json',
    accept_content=['json'],
    result_serializer='json',
    timezone='UTC',
    enable_utc=True,
    task_time_limit=settings.SWEEP_TASK_TIMEOUT,
    # one sweep point per worker process at a time
    worker_prefetch_multiplier=1,
    task_acks_late=True,
)
