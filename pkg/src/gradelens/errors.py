"""Domain error hierarchy.

Every error carries a stable machine code and the HTTP status it maps to at
the API boundary (401 unauthenticated, 403 forbidden, 404 missing, 409
conflict/duplicate, 422 validation). Handlers key off the code, never the
message text.
"""

from __future__ import annotations


class GradelensError(Exception):
    code = "error"
    http_status = 500

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details

    def to_doc(self) -> dict:
        doc = {"code": self.code, "message": self.message}
        if self.details:
            doc["details"] = _jsonable(self.details)
        return doc


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in sorted(value) if not isinstance(v, dict)] \
            if isinstance(value, (set, frozenset)) else [_jsonable(v) for v in value]
    return value


# --- authentication / authorization ---------------------------------------

class BadCredentials(GradelensError):
    """Uniform for unknown account and wrong password (no enumeration)."""
    code = "bad_credentials"
    http_status = 401


class AccountInactive(GradelensError):
    code = "account_inactive"
    http_status = 403


class InvalidToken(GradelensError):
    code = "invalid_token"
    http_status = 401


class Forbidden(GradelensError):
    code = "forbidden"
    http_status = 403


# --- validation (422) -------------------------------------------------------

class ValidationError(GradelensError):
    code = "validation_error"
    http_status = 422


class WeakPassword(ValidationError):
    code = "weak_password"


class EmptyAttribute(ValidationError):
    code = "empty_attribute"


class NotAnInstructor(ValidationError):
    code = "not_an_instructor"


class NotAStudent(ValidationError):
    code = "not_a_student"


class NotEnrolled(ValidationError):
    code = "not_enrolled"


class OutOfRange(ValidationError):
    code = "out_of_range"


class EmptyCriteria(ValidationError):
    code = "empty_criteria"


class BadLevelRange(ValidationError):
    code = "bad_level_range"


class UnmappedCriterion(ValidationError):
    code = "unmapped_criterion"


class IncompleteEvaluation(ValidationError):
    code = "incomplete_evaluation"


class WeightsNotNormalized(ValidationError):
    code = "weights_not_normalized"


class NoScores(ValidationError):
    code = "no_scores"


class IncompleteComponents(ValidationError):
    code = "incomplete_components"

    def __init__(self, missing, **details):
        missing = sorted(missing)
        super().__init__(f"components without scores: {', '.join(missing)}",
                         missing=missing, **details)
        self.missing = missing


class InvalidScale(ValidationError):
    code = "invalid_scale"


class InvalidBandScheme(ValidationError):
    code = "invalid_band_scheme"


class DegenerateRange(ValidationError):
    code = "degenerate_range"


class EmptyInput(ValidationError):
    code = "empty_input"


class NonPositiveWeight(ValidationError):
    code = "non_positive_weight"


class LengthMismatch(ValidationError):
    code = "length_mismatch"


class OutOfDomain(ValidationError):
    code = "out_of_domain"


class BadHeader(ValidationError):
    code = "bad_header"


class EmptyFile(ValidationError):
    code = "empty_file"


class BadSettings(ValidationError):
    code = "bad_settings"


class BadScope(ValidationError):
    code = "bad_scope"


# --- missing references (404) ----------------------------------------------

class NotFound(GradelensError):
    code = "not_found"
    http_status = 404


class UnknownCourse(NotFound):
    code = "unknown_course"


class UnknownOutcome(NotFound):
    code = "unknown_outcome"


class UnknownClass(NotFound):
    code = "unknown_class"


class UnknownRubric(NotFound):
    code = "unknown_rubric"


class UnknownSkill(NotFound):
    code = "unknown_skill"


class UnknownUser(NotFound):
    code = "unknown_user"


class UnknownItem(NotFound):
    code = "unknown_item"


class UnknownComponent(NotFound):
    code = "unknown_component"


class NoEvidence(NotFound):
    """No (evaluation, criterion) pair contributes; distinct from score 0."""
    code = "no_evidence"


class NoEvaluatedStudents(NotFound):
    code = "no_evaluated_students"


class EmptyScope(NotFound):
    code = "empty_scope"


# --- conflicts (409) ---------------------------------------------------------

class Conflict(GradelensError):
    code = "conflict"
    http_status = 409


class DuplicateCode(Conflict):
    code = "duplicate_code"


class DuplicateSkill(Conflict):
    code = "duplicate_skill"


class AlreadyEnrolled(Conflict):
    code = "already_enrolled"


class ConflictDetected(Conflict):
    """Concurrent commit touched the same entities; safe to retry."""
    code = "conflict_detected"


# --- persistence -------------------------------------------------------------

class ValidationFailed(ValidationError):
    """A change set failed commit-time validation; no state changed."""
    code = "validation_failed"


class CorruptJournal(GradelensError):
    code = "corrupt_journal"


class IncompatibleSchemaVersion(GradelensError):
    code = "incompatible_schema_version"


class IoFailure(GradelensError):
    code = "io_failure"
