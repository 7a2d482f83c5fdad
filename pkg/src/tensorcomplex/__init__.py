"""Discrete tensor complexes on structured grids: operators, compatibility checks and potentials."""

from __future__ import annotations

__version__ = "0.1.0"
