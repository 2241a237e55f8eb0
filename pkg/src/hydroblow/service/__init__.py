"""HTTP service wrapping the core solvers."""

from .app import create_app

__all__ = ["create_app"]
