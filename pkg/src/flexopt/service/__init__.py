"""HTTP service wrapping the optimization engine."""

from .app import app, create_app
from .handlers import ServiceError

__all__ = ["ServiceError", "app", "create_app"]
