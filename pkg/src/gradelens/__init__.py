"""Gradebook and student-outcomes analytics: rubric evaluations mapped onto
program outcomes, attainment banding, distributions and program rollups,
served over a token-authenticated JSON API backed by a journaled store.
"""

from .analytics import (
    BandScheme,
    DEFAULT_ATTAINMENT_BANDS,
    DEFAULT_THETA,
    LIKERT5_BANDS,
    Scope,
    band_of,
    normalize_level,
    weighted_mean,
)
from .gradebook import DEFAULT_GRADE_SCALE, GradeScale, transmute_grade
from .service import Service
from .settings import Settings
from .store import Store, open_store

__version__ = "0.1.0"

__all__ = [
    "BandScheme",
    "DEFAULT_ATTAINMENT_BANDS",
    "DEFAULT_GRADE_SCALE",
    "DEFAULT_THETA",
    "LIKERT5_BANDS",
    "GradeScale",
    "Scope",
    "Service",
    "Settings",
    "Store",
    "band_of",
    "normalize_level",
    "open_store",
    "transmute_grade",
    "weighted_mean",
    "__version__",
]
