"""Exact character computations for finite general linear groups.

Linear and twisted-linear periods of cuspidal representations of GL_n over
finite fields, checked by exact cyclotomic arithmetic and a brute-force
character-table oracle.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .fields import FieldTower, build_tower  # noqa: E402,F401
