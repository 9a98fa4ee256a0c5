"""Immutable store state and change sets.

A State is a point-in-time snapshot: plain dicts of frozen entities keyed by
id. Commits never mutate a State; the store builds a fresh one, so any
handler holding a snapshot keeps reading consistent data. Domain operations
validate against a snapshot and hand the store a ChangeSet of puts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from . import errors, models
from .models import (
    ClassSection,
    Course,
    EvaluationRecord,
    GradeComponent,
    GradeItem,
    ProgramOutcome,
    Rubric,
    ScoreEntry,
    Skill,
    SkillRating,
    UserAccount,
)

if TYPE_CHECKING:
    from .settings import Settings


@dataclass(frozen=True)
class Put:
    collection: str
    key: str
    entity: object


@dataclass
class ChangeSet:
    """Writes produced by one domain operation against one snapshot."""
    based_on: int
    puts: list[Put] = field(default_factory=list)

    def put(self, collection: str, key: str, entity: object) -> None:
        self.puts.append(Put(collection, key, entity))

    def touched_keys(self) -> set[tuple[str, str]]:
        return {(p.collection, p.key) for p in self.puts}


@dataclass(frozen=True)
class State:
    seq: int
    users: dict[str, UserAccount] = field(default_factory=dict)
    outcomes: dict[str, ProgramOutcome] = field(default_factory=dict)
    courses: dict[str, Course] = field(default_factory=dict)
    sections: dict[str, ClassSection] = field(default_factory=dict)
    rubrics: dict[str, Rubric] = field(default_factory=dict)
    skills: dict[str, Skill] = field(default_factory=dict)
    ratings: dict[str, SkillRating] = field(default_factory=dict)
    components: dict[str, GradeComponent] = field(default_factory=dict)
    items: dict[str, GradeItem] = field(default_factory=dict)
    scores: dict[str, ScoreEntry] = field(default_factory=dict)
    evaluations: dict[str, EvaluationRecord] = field(default_factory=dict)
    settings: "Settings | None" = None
    counters: dict[str, int] = field(default_factory=dict)

    # --- checked lookups ----------------------------------------------------

    def user(self, user_id: str) -> UserAccount:
        try:
            return self.users[user_id]
        except KeyError:
            raise errors.UnknownUser(f"no account {user_id}")

    def course(self, course_code: str) -> Course:
        try:
            return self.courses[course_code]
        except KeyError:
            raise errors.UnknownCourse(f"no course {course_code}")

    def section(self, class_id: str) -> ClassSection:
        try:
            return self.sections[class_id]
        except KeyError:
            raise errors.UnknownClass(f"no class {class_id}")

    def rubric(self, rubric_id: str) -> Rubric:
        try:
            return self.rubrics[rubric_id]
        except KeyError:
            raise errors.UnknownRubric(f"no rubric {rubric_id}")

    def skill(self, skill_id: str) -> Skill:
        try:
            return self.skills[skill_id]
        except KeyError:
            raise errors.UnknownSkill(f"no skill {skill_id}")

    def item(self, item_id: str) -> GradeItem:
        try:
            return self.items[item_id]
        except KeyError:
            raise errors.UnknownItem(f"no grade item {item_id}")

    def component(self, component_id: str) -> GradeComponent:
        try:
            return self.components[component_id]
        except KeyError:
            raise errors.UnknownComponent(f"no grade component {component_id}")

    def outcome_versions(self, outcome_code: str) -> list[ProgramOutcome]:
        return [o for o in self.outcomes.values() if o.outcome_code == outcome_code]

    def class_components(self, class_id: str) -> list[GradeComponent]:
        return sorted(
            (c for c in self.components.values()
             if c.class_id == class_id and c.active),
            key=lambda c: c.component_id)

    def component_items(self, component_id: str) -> list[GradeItem]:
        return sorted((i for i in self.items.values()
                       if i.component_id == component_id),
                      key=lambda i: i.item_id)

    def classes_taught_by(self, instructor_id: str) -> list[ClassSection]:
        return sorted((s for s in self.sections.values()
                       if s.instructor_id == instructor_id),
                      key=lambda s: s.class_id)

    def instructs_student(self, instructor_id: str, student_id: str) -> bool:
        return any(student_id in s.roster
                   for s in self.classes_taught_by(instructor_id))

def effective_skill_ratings(state: State, *, class_id: str | None = None,
                            student_id: str | None = None,
                            course_code: str | None = None) -> list[SkillRating]:
    """Latest rating per (student, skill, class), optionally filtered."""
    latest: dict[tuple[str, str, str], SkillRating] = {}
    for rating in state.ratings.values():
        if class_id is not None and rating.class_id != class_id:
            continue
        if student_id is not None and rating.student_id != student_id:
            continue
        if course_code is not None:
            skill = state.skills.get(rating.skill_id)
            if skill is None or skill.course_code != course_code:
                continue
        key = (rating.student_id, rating.skill_id, rating.class_id)
        held = latest.get(key)
        if held is None or rating.rating_id > held.rating_id:
            latest[key] = rating
    return sorted(latest.values(), key=lambda r: r.rating_id)


def effective_scores(state: State, *, student_id: str | None = None,
                     item_ids: set[str] | None = None) -> list[ScoreEntry]:
    """Latest score per (student, item); re-recording overwrites."""
    latest: dict[tuple[str, str], ScoreEntry] = {}
    for entry in state.scores.values():
        if student_id is not None and entry.student_id != student_id:
            continue
        if item_ids is not None and entry.item_id not in item_ids:
            continue
        key = (entry.student_id, entry.item_id)
        held = latest.get(key)
        if held is None or entry.score_id > held.score_id:
            latest[key] = entry
    return sorted(latest.values(), key=lambda s: s.score_id)


ENTITY_TYPES = {
    models.USERS: UserAccount,
    models.OUTCOMES: ProgramOutcome,
    models.COURSES: Course,
    models.SECTIONS: ClassSection,
    models.RUBRICS: Rubric,
    models.SKILLS: Skill,
    models.RATINGS: SkillRating,
    models.COMPONENTS: GradeComponent,
    models.ITEMS: GradeItem,
    models.SCORES: ScoreEntry,
    models.EVALUATIONS: EvaluationRecord,
}

COLLECTION_ATTRS = {
    models.USERS: "users",
    models.OUTCOMES: "outcomes",
    models.COURSES: "courses",
    models.SECTIONS: "sections",
    models.RUBRICS: "rubrics",
    models.SKILLS: "skills",
    models.RATINGS: "ratings",
    models.COMPONENTS: "components",
    models.ITEMS: "items",
    models.SCORES: "scores",
    models.EVALUATIONS: "evaluations",
}


def apply_changes(state: State, changes: ChangeSet, new_seq: int) -> State:
    """Copy-on-write application; the input State is left untouched."""
    updates: dict[str, dict] = {}
    settings = state.settings
    counters = state.counters
    for put in changes.puts:
        if put.collection == models.SETTINGS:
            settings = put.entity
            continue
        if put.collection == models.COUNTERS:
            if counters is state.counters:
                counters = dict(counters)
            counters[put.key] = put.entity
            continue
        attr = COLLECTION_ATTRS[put.collection]
        if attr not in updates:
            updates[attr] = dict(getattr(state, attr))
        updates[attr][put.key] = put.entity
    return replace(state, seq=new_seq, settings=settings,
                   counters=counters, **updates)
