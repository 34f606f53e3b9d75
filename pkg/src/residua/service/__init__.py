"""HTTP service exposing the command layer."""

from .app import create_app

__all__ = ["create_app"]
