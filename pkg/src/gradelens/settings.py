"""The settings document: attainment threshold, band schemes, grade scale,
token TTL and listen address. Values are validated by their owning modules on
every load, so a store can never come up with settings its consumers reject.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from . import errors
from .analytics import DEFAULT_ATTAINMENT_BANDS, DEFAULT_THETA, LIKERT5_BANDS, BandScheme
from .gradebook import DEFAULT_GRADE_SCALE, GradeScale

DEFAULT_TOKEN_TTL_MINUTES = 480
DEFAULT_LISTEN_ADDRESS = "127.0.0.1:8571"

SETTINGS_KEYS = (
    "attainment_threshold",
    "band_scheme",
    "likert_scheme",
    "grade_scale",
    "token_ttl_minutes",
    "listen_address",
    "data_dir",
)


@dataclass(frozen=True)
class Settings:
    attainment_threshold: float = DEFAULT_THETA
    band_scheme: BandScheme = DEFAULT_ATTAINMENT_BANDS
    likert_scheme: BandScheme = LIKERT5_BANDS
    grade_scale: GradeScale = DEFAULT_GRADE_SCALE
    token_ttl_minutes: int = DEFAULT_TOKEN_TTL_MINUTES
    listen_address: str = DEFAULT_LISTEN_ADDRESS
    data_dir: str = "./data"

    def validate(self) -> None:
        if not 0 < self.attainment_threshold <= 1:
            raise errors.BadSettings(
                f"attainment_threshold {self.attainment_threshold} outside (0, 1]")
        try:
            self.band_scheme.validate()
            self.likert_scheme.validate()
        except errors.InvalidBandScheme as exc:
            raise errors.BadSettings(f"band scheme invalid: {exc.message}")
        if (self.band_scheme.lo, self.band_scheme.hi) != (0.0, 1.0):
            raise errors.BadSettings("band_scheme domain must be [0, 1]")
        try:
            self.grade_scale.validate()
        except errors.InvalidScale as exc:
            raise errors.BadSettings(f"grade scale invalid: {exc.message}")
        if self.token_ttl_minutes <= 0:
            raise errors.BadSettings("token_ttl_minutes must be positive")
        if not self.listen_address:
            raise errors.BadSettings("listen_address must be non-empty")

    def to_doc(self) -> dict:
        return {
            "attainment_threshold": float(self.attainment_threshold),
            "band_scheme": self.band_scheme.to_doc(),
            "likert_scheme": self.likert_scheme.to_doc(),
            "grade_scale": self.grade_scale.to_doc(),
            "token_ttl_minutes": int(self.token_ttl_minutes),
            "listen_address": self.listen_address,
            "data_dir": self.data_dir,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Settings":
        unknown = set(doc) - set(SETTINGS_KEYS)
        if unknown:
            raise errors.BadSettings(
                f"unknown settings keys: {', '.join(sorted(unknown))}")
        defaults = cls()
        try:
            settings = cls(
                attainment_threshold=float(
                    doc.get("attainment_threshold", defaults.attainment_threshold)),
                band_scheme=BandScheme.from_doc(doc["band_scheme"])
                if "band_scheme" in doc else defaults.band_scheme,
                likert_scheme=BandScheme.from_doc(doc["likert_scheme"])
                if "likert_scheme" in doc else defaults.likert_scheme,
                grade_scale=GradeScale.from_doc(doc["grade_scale"])
                if "grade_scale" in doc else defaults.grade_scale,
                token_ttl_minutes=int(
                    doc.get("token_ttl_minutes", defaults.token_ttl_minutes)),
                listen_address=str(
                    doc.get("listen_address", defaults.listen_address)),
                data_dir=str(doc.get("data_dir", defaults.data_dir)),
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise errors.BadSettings(f"malformed settings document: {exc}")
        settings.validate()
        return settings

    def merged(self, overrides: dict) -> "Settings":
        merged_doc = self.to_doc()
        merged_doc.update(overrides)
        return Settings.from_doc(merged_doc)

    def with_data_dir(self, data_dir: str) -> "Settings":
        return replace(self, data_dir=data_dir)


def load_settings_file(path: str | Path) -> Settings:
    """Read a JSON settings document from disk; missing keys take defaults."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise errors.IoFailure(f"cannot read settings file {path}: {exc}")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise errors.BadSettings(f"settings file {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise errors.BadSettings(f"settings file {path} must hold a JSON object")
    return Settings.from_doc(doc)
