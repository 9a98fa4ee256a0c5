"""Core domain operations: account management, curriculum outcomes, courses,
class sections, rubrics, skills, gradebook entries and rubric evaluations.

Every operation is a pure validation over a store snapshot that returns the
created/updated entity plus the ChangeSet to commit; nothing here mutates
shared state. Role checks live in rbac/service; this module owns the data
rules (reference resolution, ranges, uniqueness).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import auth, errors
from .models import (
    COMPONENTS,
    COUNTERS,
    COURSES,
    EVALUATIONS,
    ITEMS,
    OUTCOMES,
    RATINGS,
    RUBRICS,
    SCORES,
    SECTIONS,
    SETTINGS,
    SKILLS,
    USERS,
    ClassSection,
    Course,
    Criterion,
    EvaluationRecord,
    GradeComponent,
    GradeItem,
    ProgramOutcome,
    Role,
    Rubric,
    ScoreEntry,
    Skill,
    SkillRating,
    UserAccount,
    iso_utc,
    outcome_key,
)
from .settings import Settings
from .state import ChangeSet, State, effective_skill_ratings


def _changes(state: State) -> ChangeSet:
    return ChangeSet(based_on=state.seq)


def _fresh_id(state: State, changes: ChangeSet, kind: str, prefix: str,
              width: int = 4) -> str:
    base = state.counters.get(kind, 0)
    for put in changes.puts:  # ids already allocated in this change set
        if put.collection == COUNTERS and put.key == kind:
            base = max(base, int(put.entity))
    counter = base + 1
    changes.put(COUNTERS, kind, counter)
    return f"{prefix}-{counter:0{width}d}"


# --- accounts -----------------------------------------------------------------

def create_user(state: State, name: str, role: Role, password: str,
                *, salt: bytes | None = None) -> tuple[UserAccount, ChangeSet]:
    if not name.strip():
        raise errors.ValidationError("display name must be non-empty")
    credential = auth.hash_password(password, salt=salt)
    changes = _changes(state)
    user_id = _fresh_id(state, changes, "user", "u")
    account = UserAccount(user_id=user_id, display_name=name, role=role,
                          credential=credential, active=True)
    account.validate()
    changes.put(USERS, user_id, account)
    return account, changes


def create_student_shell(state: State, user_id: str,
                         display_name: str) -> tuple[UserAccount, ChangeSet]:
    """Roster-import path: account with no credential until a department head
    sets one."""
    if user_id in state.users:
        raise errors.DuplicateCode(f"account {user_id} already exists")
    account = UserAccount(user_id=user_id, display_name=display_name,
                          role=Role.STUDENT, credential=None, active=True)
    account.validate()
    changes = _changes(state)
    changes.put(USERS, user_id, account)
    return account, changes


def set_password(state: State, user_id: str, password: str,
                 *, salt: bytes | None = None) -> tuple[UserAccount, ChangeSet]:
    account = state.user(user_id)
    updated = replace(account, credential=auth.hash_password(password, salt=salt))
    changes = _changes(state)
    changes.put(USERS, user_id, updated)
    return updated, changes


def find_account(state: State, name_or_id: str) -> list[UserAccount]:
    """Accounts matching a login name: id match first, then display name."""
    if name_or_id in state.users:
        return [state.users[name_or_id]]
    return sorted((u for u in state.users.values()
                   if u.display_name == name_or_id),
                  key=lambda u: u.user_id)


# --- curriculum ------------------------------------------------------------------

def upsert_program_outcome(state: State, code: str, attribute: str,
                           curriculum_version: str, *, active: bool = True
                           ) -> tuple[ProgramOutcome, ChangeSet]:
    if not code.strip():
        raise errors.ValidationError("outcome code must be non-empty")
    if not attribute.strip():
        raise errors.EmptyAttribute("graduate attribute must be non-empty")
    outcome = ProgramOutcome(outcome_code=code, graduate_attribute=attribute,
                             curriculum_version=curriculum_version, active=active)
    outcome.validate()
    changes = _changes(state)
    changes.put(OUTCOMES, outcome_key(code, curriculum_version), outcome)
    return outcome, changes


def create_course(state: State, code: str, title: str,
                  units: float) -> tuple[Course, ChangeSet]:
    if code in state.courses:
        raise errors.DuplicateCode(f"course {code} already exists")
    course = Course(course_code=code, title=title, units=units)
    course.validate()
    changes = _changes(state)
    changes.put(COURSES, code, course)
    return course, changes


def create_class_section(state: State, course_code: str, term: str,
                         instructor_id: str) -> tuple[ClassSection, ChangeSet]:
    state.course(course_code)
    instructor = state.user(instructor_id)
    if instructor.role != Role.INSTRUCTOR:
        raise errors.NotAnInstructor(f"{instructor_id} is not an instructor")
    changes = _changes(state)
    class_id = _fresh_id(state, changes, "class", "cls")
    section = ClassSection(class_id=class_id, course_code=course_code,
                           term=term, instructor_id=instructor_id, roster=())
    section.validate()
    changes.put(SECTIONS, class_id, section)
    return section, changes


def enroll_student(state: State, class_id: str,
                   student_id: str) -> tuple[ClassSection, ChangeSet]:
    section = state.section(class_id)
    student = state.user(student_id)
    if student.role != Role.STUDENT:
        raise errors.NotAStudent(f"{student_id} is not a student")
    if student_id in section.roster:
        raise errors.AlreadyEnrolled(f"{student_id} already in {class_id}")
    updated = section.with_student(student_id)
    changes = _changes(state)
    changes.put(SECTIONS, class_id, updated)
    return updated, changes


# --- rubrics -----------------------------------------------------------------------

def define_rubric(state: State, title: str,
                  criteria: tuple[Criterion, ...]) -> tuple[Rubric, ChangeSet]:
    changes = _changes(state)
    rubric_id = _fresh_id(state, changes, "rubric", "rub")
    rubric = Rubric(rubric_id=rubric_id, title=title, criteria=tuple(criteria))
    rubric.validate()
    for criterion in rubric.criteria:
        for mapping in criterion.mappings:
            if not state.outcome_versions(mapping.outcome_code):
                raise errors.UnknownOutcome(
                    f"criterion {criterion.criterion_id} maps to unknown "
                    f"outcome {mapping.outcome_code}")
    changes.put(RUBRICS, rubric_id, rubric)
    return rubric, changes


def criterion_from_doc(doc: dict, fallback_id: str) -> Criterion:
    """Build a criterion from an API/CLI payload; ids default by position."""
    from .models import OutcomeMapping
    try:
        mappings = tuple(
            OutcomeMapping(outcome_code=str(m["outcome_code"]),
                           map_weight=float(m["map_weight"]))
            for m in doc.get("mappings", ()))
        return Criterion(
            criterion_id=str(doc.get("criterion_id") or fallback_id),
            description=str(doc.get("description", "")),
            weight=float(doc["weight"]),
            mappings=mappings,
            min_level=int(doc.get("min_level", 1)),
            max_level=int(doc.get("max_level", 4)),
            level_descriptors=tuple(doc.get("level_descriptors") or ()),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise errors.ValidationError(f"malformed criterion: {exc}")


# --- skills ----------------------------------------------------------------------

def define_skill(state: State, name: str,
                 course_code: str) -> tuple[Skill, ChangeSet]:
    state.course(course_code)
    if not name.strip():
        raise errors.ValidationError("skill name must be non-empty")
    for skill in state.skills.values():
        if skill.name == name and skill.course_code == course_code:
            raise errors.DuplicateSkill(
                f"skill {name!r} already exists for {course_code}")
    changes = _changes(state)
    skill_id = _fresh_id(state, changes, "skill", "skl")
    skill = Skill(skill_id=skill_id, name=name, course_code=course_code)
    changes.put(SKILLS, skill_id, skill)
    return skill, changes


def record_skill_rating(state: State, student_id: str, skill_id: str,
                        class_id: str, score: float,
                        recorded_at_epoch: float) -> tuple[SkillRating, ChangeSet]:
    skill = state.skill(skill_id)
    section = state.section(class_id)
    state.user(student_id)
    if not 0 <= score <= 100:
        raise errors.OutOfRange(f"score {score} outside [0, 100]")
    if student_id not in section.roster:
        raise errors.NotEnrolled(f"{student_id} not enrolled in {class_id}")
    if skill.course_code != section.course_code:
        raise errors.ValidationError(
            f"skill {skill_id} belongs to course {skill.course_code}, "
            f"class {class_id} teaches {section.course_code}")
    changes = _changes(state)
    rating_id = _fresh_id(state, changes, "rating", "rt", width=6)
    rating = SkillRating(rating_id=rating_id, student_id=student_id,
                         skill_id=skill_id, class_id=class_id, score=score,
                         recorded_at=iso_utc(recorded_at_epoch))
    changes.put(RATINGS, rating_id, rating)
    return rating, changes


@dataclass(frozen=True)
class SkillView:
    skill_id: str
    name: str
    course_code: str
    class_id: str
    score: float
    recorded_at: str


def query_student_skills(state: State, student_id: str, *,
                         course_code: str | None = None,
                         class_id: str | None = None) -> list[SkillView]:
    """Effective (latest) ratings for one student, sorted by skill name."""
    state.user(student_id)
    views = []
    for rating in effective_skill_ratings(state, student_id=student_id,
                                          class_id=class_id,
                                          course_code=course_code):
        skill = state.skill(rating.skill_id)
        views.append(SkillView(
            skill_id=skill.skill_id, name=skill.name,
            course_code=skill.course_code, class_id=rating.class_id,
            score=rating.score, recorded_at=rating.recorded_at))
    return sorted(views, key=lambda v: (v.name, v.skill_id, v.class_id))


# --- gradebook entry ---------------------------------------------------------------

def define_grade_components(state: State, class_id: str,
                            pairs: list[tuple[str, float]]
                            ) -> tuple[list[GradeComponent], ChangeSet]:
    state.section(class_id)
    if not pairs:
        raise errors.ValidationError("at least one component required")
    names = [name for name, _ in pairs]
    if len(set(names)) != len(names):
        raise errors.ValidationError("component names must be unique per class")
    changes = _changes(state)
    for old in state.class_components(class_id):
        changes.put(COMPONENTS, old.component_id, replace(old, active=False))
    created = []
    for name, weight in pairs:
        component_id = _fresh_id(state, changes, "component", "cmp")
        component = GradeComponent(component_id=component_id, class_id=class_id,
                                   name=name, weight=float(weight))
        component.validate()
        changes.put(COMPONENTS, component_id, component)
        created.append(component)
    return created, changes


def define_grade_item(state: State, component_id: str, title: str,
                      max_points: float) -> tuple[GradeItem, ChangeSet]:
    state.component(component_id)
    changes = _changes(state)
    item_id = _fresh_id(state, changes, "item", "itm")
    item = GradeItem(item_id=item_id, component_id=component_id,
                     title=title, max_points=float(max_points))
    item.validate()
    changes.put(ITEMS, item_id, item)
    return item, changes


def record_score(state: State, student_id: str, item_id: str, raw_score: float,
                 recorded_at_epoch: float) -> tuple[ScoreEntry, ChangeSet]:
    item = state.item(item_id)
    component = state.component(item.component_id)
    section = state.section(component.class_id)
    state.user(student_id)
    if student_id not in section.roster:
        raise errors.NotEnrolled(
            f"{student_id} not enrolled in {component.class_id}")
    if not 0 <= raw_score <= item.max_points:
        raise errors.OutOfRange(
            f"raw_score {raw_score} outside [0, {item.max_points}]")
    changes = _changes(state)
    score_id = _fresh_id(state, changes, "score", "sc", width=6)
    entry = ScoreEntry(score_id=score_id, student_id=student_id,
                       item_id=item_id, raw_score=float(raw_score),
                       recorded_at=iso_utc(recorded_at_epoch))
    changes.put(SCORES, score_id, entry)
    return entry, changes


# --- evaluations --------------------------------------------------------------------

def record_evaluation(state: State, class_id: str, rubric_id: str,
                      student_id: str, levels: dict[str, int],
                      evaluator_id: str, recorded_at_epoch: float
                      ) -> tuple[EvaluationRecord, ChangeSet]:
    section = state.section(class_id)
    rubric = state.rubric(rubric_id)
    state.user(student_id)
    if student_id not in section.roster:
        raise errors.NotEnrolled(f"{student_id} not enrolled in {class_id}")
    changes = _changes(state)
    evaluation_id = _fresh_id(state, changes, "evaluation", "ev", width=6)
    record = EvaluationRecord(
        evaluation_id=evaluation_id, class_id=class_id, rubric_id=rubric_id,
        student_id=student_id, levels=dict(levels), evaluator_id=evaluator_id,
        recorded_at=iso_utc(recorded_at_epoch))
    record.validate_against(rubric)
    changes.put(EVALUATIONS, evaluation_id, record)
    return record, changes


# --- settings ------------------------------------------------------------------------

def update_settings(state: State, overrides: dict) -> tuple[Settings, ChangeSet]:
    current = state.settings or Settings()
    updated = current.merged(overrides)
    changes = _changes(state)
    changes.put(SETTINGS, "settings", updated)
    return updated, changes
