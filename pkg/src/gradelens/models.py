"""Entity types for accounts, curriculum outcomes, classes, rubrics, skills,
gradebook structure and evaluations.

All entities are frozen dataclasses with explicit to_doc/from_doc so the
journal and snapshot formats stay stable independently of field order, and a
validate() that enforces the entity-local invariants (reference resolution is
the store's job at commit time).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from . import errors

# collection names used by the store, the journal format and change sets
USERS = "users"
OUTCOMES = "outcomes"
COURSES = "courses"
SECTIONS = "sections"
RUBRICS = "rubrics"
SKILLS = "skills"
RATINGS = "ratings"
COMPONENTS = "components"
ITEMS = "items"
SCORES = "scores"
EVALUATIONS = "evaluations"
SETTINGS = "settings"
COUNTERS = "counters"


class Role(str, Enum):
    DEPARTMENT_HEAD = "department_head"
    INSTRUCTOR = "instructor"
    STUDENT = "student"


def role_from_text(text: str) -> Role:
    try:
        return Role(text)
    except ValueError:
        raise errors.ValidationError(f"unknown role: {text!r}")


def iso_utc(epoch_seconds: float) -> str:
    dt = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Credential:
    """Salted iterated password hash; opaque outside the auth module."""
    algorithm: str
    salt: str
    iterations: int
    digest: str

    def to_doc(self) -> dict:
        return {"algorithm": self.algorithm, "salt": self.salt,
                "iterations": self.iterations, "digest": self.digest}

    @classmethod
    def from_doc(cls, doc: dict) -> "Credential":
        return cls(algorithm=doc["algorithm"], salt=doc["salt"],
                   iterations=int(doc["iterations"]), digest=doc["digest"])


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    display_name: str
    role: Role
    credential: Credential | None
    active: bool = True

    def validate(self) -> None:
        if not self.user_id:
            raise errors.ValidationError("user_id must be non-empty")
        if not isinstance(self.role, Role):
            raise errors.ValidationError(f"invalid role: {self.role!r}")

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "role": self.role.value,
            "credential": self.credential.to_doc() if self.credential else None,
            "active": self.active,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "UserAccount":
        cred = doc.get("credential")
        return cls(
            user_id=doc["user_id"],
            display_name=doc["display_name"],
            role=Role(doc["role"]),
            credential=Credential.from_doc(cred) if cred else None,
            active=bool(doc["active"]),
        )

    def public_doc(self) -> dict:
        """API-safe projection: never includes the credential."""
        return {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "role": self.role.value,
            "active": self.active,
        }


@dataclass(frozen=True)
class ProgramOutcome:
    outcome_code: str
    graduate_attribute: str
    curriculum_version: str
    active: bool = True

    @property
    def key(self) -> str:
        return outcome_key(self.outcome_code, self.curriculum_version)

    def validate(self) -> None:
        if not self.outcome_code:
            raise errors.ValidationError("outcome_code must be non-empty")
        if not self.graduate_attribute.strip():
            raise errors.EmptyAttribute("graduate_attribute must be non-empty")

    def to_doc(self) -> dict:
        return {
            "outcome_code": self.outcome_code,
            "graduate_attribute": self.graduate_attribute,
            "curriculum_version": self.curriculum_version,
            "active": self.active,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ProgramOutcome":
        return cls(
            outcome_code=doc["outcome_code"],
            graduate_attribute=doc["graduate_attribute"],
            curriculum_version=doc["curriculum_version"],
            active=bool(doc["active"]),
        )


def outcome_key(code: str, curriculum_version: str) -> str:
    return f"{code}@{curriculum_version}"


@dataclass(frozen=True)
class Course:
    course_code: str
    title: str
    units: float
    active: bool = True

    def validate(self) -> None:
        if not self.course_code:
            raise errors.ValidationError("course_code must be non-empty")
        if not self.title.strip():
            raise errors.ValidationError("title must be non-empty")
        if self.units < 0:
            raise errors.ValidationError("units must be non-negative")

    def to_doc(self) -> dict:
        return {"course_code": self.course_code, "title": self.title,
                "units": float(self.units), "active": self.active}

    @classmethod
    def from_doc(cls, doc: dict) -> "Course":
        return cls(course_code=doc["course_code"], title=doc["title"],
                   units=float(doc["units"]), active=bool(doc["active"]))


@dataclass(frozen=True)
class ClassSection:
    class_id: str
    course_code: str
    term: str
    instructor_id: str
    roster: tuple[str, ...] = ()

    def validate(self) -> None:
        if not self.term:
            raise errors.ValidationError("term must be non-empty")
        if len(set(self.roster)) != len(self.roster):
            raise errors.ValidationError("roster contains duplicates")

    def with_student(self, student_id: str) -> "ClassSection":
        return replace(self, roster=tuple(sorted({*self.roster, student_id})))

    def to_doc(self) -> dict:
        return {
            "class_id": self.class_id,
            "course_code": self.course_code,
            "term": self.term,
            "instructor_id": self.instructor_id,
            "roster": sorted(self.roster),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ClassSection":
        return cls(
            class_id=doc["class_id"],
            course_code=doc["course_code"],
            term=doc["term"],
            instructor_id=doc["instructor_id"],
            roster=tuple(doc["roster"]),
        )


@dataclass(frozen=True)
class OutcomeMapping:
    outcome_code: str
    map_weight: float

    def validate(self) -> None:
        if not self.outcome_code:
            raise errors.ValidationError("mapping outcome_code must be non-empty")
        if self.map_weight <= 0:
            raise errors.NonPositiveWeight("map_weight must be > 0")

    def to_doc(self) -> dict:
        return {"outcome_code": self.outcome_code,
                "map_weight": float(self.map_weight)}

    @classmethod
    def from_doc(cls, doc: dict) -> "OutcomeMapping":
        return cls(outcome_code=doc["outcome_code"],
                   map_weight=float(doc["map_weight"]))


@dataclass(frozen=True)
class Criterion:
    criterion_id: str
    description: str
    weight: float
    mappings: tuple[OutcomeMapping, ...]
    min_level: int = 1
    max_level: int = 4
    level_descriptors: tuple[str, ...] = ()

    def validate(self) -> None:
        if not self.criterion_id:
            raise errors.ValidationError("criterion_id must be non-empty")
        if self.max_level < self.min_level + 1:
            raise errors.BadLevelRange(
                f"criterion {self.criterion_id}: max_level must exceed min_level")
        if self.weight <= 0:
            raise errors.NonPositiveWeight(
                f"criterion {self.criterion_id}: weight must be > 0")
        if not self.mappings:
            raise errors.UnmappedCriterion(
                f"criterion {self.criterion_id} maps to no outcome")
        seen = set()
        for m in self.mappings:
            m.validate()
            if m.outcome_code in seen:
                raise errors.ValidationError(
                    f"criterion {self.criterion_id}: duplicate mapping to {m.outcome_code}")
            seen.add(m.outcome_code)
        if self.level_descriptors and \
                len(self.level_descriptors) != self.max_level - self.min_level + 1:
            raise errors.ValidationError(
                f"criterion {self.criterion_id}: one descriptor per level expected")

    def to_doc(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "description": self.description,
            "weight": float(self.weight),
            "mappings": [m.to_doc() for m in self.mappings],
            "min_level": int(self.min_level),
            "max_level": int(self.max_level),
            "level_descriptors": list(self.level_descriptors),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Criterion":
        return cls(
            criterion_id=doc["criterion_id"],
            description=doc["description"],
            weight=float(doc["weight"]),
            mappings=tuple(OutcomeMapping.from_doc(m) for m in doc["mappings"]),
            min_level=int(doc["min_level"]),
            max_level=int(doc["max_level"]),
            level_descriptors=tuple(doc.get("level_descriptors") or ()),
        )


@dataclass(frozen=True)
class Rubric:
    rubric_id: str
    title: str
    criteria: tuple[Criterion, ...]

    def validate(self) -> None:
        if not self.title.strip():
            raise errors.ValidationError("rubric title must be non-empty")
        if not self.criteria:
            raise errors.EmptyCriteria("rubric needs at least one criterion")
        ids = [c.criterion_id for c in self.criteria]
        if len(set(ids)) != len(ids):
            raise errors.ValidationError("criterion ids must be unique within a rubric")
        for c in self.criteria:
            c.validate()

    def criterion(self, criterion_id: str) -> Criterion:
        for c in self.criteria:
            if c.criterion_id == criterion_id:
                return c
        raise errors.ValidationError(f"no criterion {criterion_id} in rubric {self.rubric_id}")

    def to_doc(self) -> dict:
        return {
            "rubric_id": self.rubric_id,
            "title": self.title,
            "criteria": [c.to_doc() for c in self.criteria],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Rubric":
        return cls(
            rubric_id=doc["rubric_id"],
            title=doc["title"],
            criteria=tuple(Criterion.from_doc(c) for c in doc["criteria"]),
        )


@dataclass(frozen=True)
class Skill:
    skill_id: str
    name: str
    course_code: str

    def validate(self) -> None:
        if not self.name.strip():
            raise errors.ValidationError("skill name must be non-empty")

    def to_doc(self) -> dict:
        return {"skill_id": self.skill_id, "name": self.name,
                "course_code": self.course_code}

    @classmethod
    def from_doc(cls, doc: dict) -> "Skill":
        return cls(skill_id=doc["skill_id"], name=doc["name"],
                   course_code=doc["course_code"])


@dataclass(frozen=True)
class SkillRating:
    rating_id: str
    student_id: str
    skill_id: str
    class_id: str
    score: float
    recorded_at: str

    def validate(self) -> None:
        if not 0 <= self.score <= 100:
            raise errors.OutOfRange(f"skill score {self.score} outside [0, 100]")

    def to_doc(self) -> dict:
        return {
            "rating_id": self.rating_id,
            "student_id": self.student_id,
            "skill_id": self.skill_id,
            "class_id": self.class_id,
            "score": float(self.score),
            "recorded_at": self.recorded_at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SkillRating":
        return cls(
            rating_id=doc["rating_id"],
            student_id=doc["student_id"],
            skill_id=doc["skill_id"],
            class_id=doc["class_id"],
            score=float(doc["score"]),
            recorded_at=doc["recorded_at"],
        )


@dataclass(frozen=True)
class GradeComponent:
    component_id: str
    class_id: str
    name: str
    weight: float
    active: bool = True

    def validate(self) -> None:
        if not self.name.strip():
            raise errors.ValidationError("component name must be non-empty")
        if not 0 < self.weight <= 1:
            raise errors.ValidationError(
                f"component weight {self.weight} outside (0, 1]")

    def to_doc(self) -> dict:
        return {"component_id": self.component_id, "class_id": self.class_id,
                "name": self.name, "weight": float(self.weight), "active": self.active}

    @classmethod
    def from_doc(cls, doc: dict) -> "GradeComponent":
        return cls(component_id=doc["component_id"], class_id=doc["class_id"],
                   name=doc["name"], weight=float(doc["weight"]),
                   active=bool(doc["active"]))


@dataclass(frozen=True)
class GradeItem:
    item_id: str
    component_id: str
    title: str
    max_points: float

    def validate(self) -> None:
        if self.max_points <= 0:
            raise errors.ValidationError("max_points must be > 0")

    def to_doc(self) -> dict:
        return {"item_id": self.item_id, "component_id": self.component_id,
                "title": self.title, "max_points": float(self.max_points)}

    @classmethod
    def from_doc(cls, doc: dict) -> "GradeItem":
        return cls(item_id=doc["item_id"], component_id=doc["component_id"],
                   title=doc["title"], max_points=float(doc["max_points"]))


@dataclass(frozen=True)
class ScoreEntry:
    score_id: str
    student_id: str
    item_id: str
    raw_score: float
    recorded_at: str

    def validate(self) -> None:
        if self.raw_score < 0:
            raise errors.OutOfRange("raw_score must be non-negative")

    def to_doc(self) -> dict:
        return {
            "score_id": self.score_id,
            "student_id": self.student_id,
            "item_id": self.item_id,
            "raw_score": float(self.raw_score),
            "recorded_at": self.recorded_at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ScoreEntry":
        return cls(
            score_id=doc["score_id"],
            student_id=doc["student_id"],
            item_id=doc["item_id"],
            raw_score=float(doc["raw_score"]),
            recorded_at=doc["recorded_at"],
        )


@dataclass(frozen=True)
class EvaluationRecord:
    evaluation_id: str
    class_id: str
    rubric_id: str
    student_id: str
    levels: dict[str, int] = field(default_factory=dict)
    evaluator_id: str = ""
    recorded_at: str = ""

    def validate_against(self, rubric: Rubric) -> None:
        expected = {c.criterion_id for c in rubric.criteria}
        got = set(self.levels)
        if missing := expected - got:
            raise errors.IncompleteEvaluation(
                f"missing level for criteria: {', '.join(sorted(missing))}")
        if extra := got - expected:
            raise errors.ValidationError(
                f"levels for unknown criteria: {', '.join(sorted(extra))}")
        for c in rubric.criteria:
            level = self.levels[c.criterion_id]
            if not isinstance(level, int) or isinstance(level, bool):
                raise errors.ValidationError(
                    f"criterion {c.criterion_id}: level must be an integer")
            if not c.min_level <= level <= c.max_level:
                raise errors.OutOfRange(
                    f"criterion {c.criterion_id}: level {level} outside "
                    f"[{c.min_level}, {c.max_level}]")

    def to_doc(self) -> dict:
        return {
            "evaluation_id": self.evaluation_id,
            "class_id": self.class_id,
            "rubric_id": self.rubric_id,
            "student_id": self.student_id,
            "levels": {k: int(self.levels[k]) for k in sorted(self.levels)},
            "evaluator_id": self.evaluator_id,
            "recorded_at": self.recorded_at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "EvaluationRecord":
        return cls(
            evaluation_id=doc["evaluation_id"],
            class_id=doc["class_id"],
            rubric_id=doc["rubric_id"],
            student_id=doc["student_id"],
            levels={k: int(v) for k, v in doc["levels"].items()},
            evaluator_id=doc["evaluator_id"],
            recorded_at=doc["recorded_at"],
        )
