"""Role-based access control: one matrix, total over every exposed action.

Students are read-only and see only their own records; instructors mutate
only their own classes; department heads are unrestricted (no impersonation:
they still authenticate as themselves). Ownership qualifiers are resolved
against a store snapshot at decision time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import errors
from .models import Role, UserAccount
from .state import State


class Qualifier(Enum):
    ANY = "any"
    OWN_CLASS = "own_class"            # actor instructs ctx.class_id
    SELF_STUDENT = "self_student"      # ctx.student_id is the actor
    SELF_INSTRUCTOR = "self_instructor"  # ctx.instructor_id is the actor
    OWN_STUDENT = "own_student"        # ctx.student_id sits in one of actor's rosters
    ENROLLED = "enrolled"              # actor is on ctx.class_id's roster


@dataclass(frozen=True)
class ResourceContext:
    class_id: str | None = None
    student_id: str | None = None
    instructor_id: str | None = None


_DH = Role.DEPARTMENT_HEAD
_IN = Role.INSTRUCTOR
_ST = Role.STUDENT

# action -> role -> qualifier; roles absent from a row are denied outright
PERMISSION_MATRIX: dict[str, dict[Role, Qualifier]] = {
    "outcomes.read": {_DH: Qualifier.ANY, _IN: Qualifier.ANY, _ST: Qualifier.ANY},
    "outcomes.write": {_DH: Qualifier.ANY},
    "courses.read": {_DH: Qualifier.ANY, _IN: Qualifier.ANY, _ST: Qualifier.ANY},
    "courses.write": {_DH: Qualifier.ANY},
    "classes.read": {_DH: Qualifier.ANY, _IN: Qualifier.ANY, _ST: Qualifier.ANY},
    "classes.create": {_DH: Qualifier.ANY, _IN: Qualifier.SELF_INSTRUCTOR},
    "classes.enroll": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "classes.roster_import": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "gradebook.write": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "gradebook.read": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS,
                       _ST: Qualifier.ENROLLED},
    "skills_summary.read": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "rubrics.read": {_DH: Qualifier.ANY, _IN: Qualifier.ANY, _ST: Qualifier.ANY},
    "rubrics.write": {_DH: Qualifier.ANY, _IN: Qualifier.ANY},
    "evaluations.write": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "skills.read": {_DH: Qualifier.ANY, _IN: Qualifier.ANY, _ST: Qualifier.ANY},
    "skills.write": {_DH: Qualifier.ANY, _IN: Qualifier.ANY},
    "skill_ratings.write": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "student_skills.read": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_STUDENT,
                            _ST: Qualifier.SELF_STUDENT},
    "student_attainment.read": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_STUDENT,
                                _ST: Qualifier.SELF_STUDENT},
    "analytics.attainment.read": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "analytics.distribution.read": {_DH: Qualifier.ANY, _IN: Qualifier.OWN_CLASS},
    "analytics.rollup.read": {_DH: Qualifier.ANY},
    "analytics.trend.read": {_DH: Qualifier.ANY},
    "reports.export": {_DH: Qualifier.ANY},
    "settings.read": {_DH: Qualifier.ANY},
    "settings.write": {_DH: Qualifier.ANY},
    "users.manage": {_DH: Qualifier.ANY},  # library/CLI surface only
}


def _qualifier_holds(state: State, actor: UserAccount, qualifier: Qualifier,
                     ctx: ResourceContext) -> bool:
    if qualifier is Qualifier.ANY:
        return True
    if qualifier is Qualifier.OWN_CLASS:
        if ctx.class_id is None:
            return False
        section = state.sections.get(ctx.class_id)
        return section is not None and section.instructor_id == actor.user_id
    if qualifier is Qualifier.SELF_STUDENT:
        return ctx.student_id == actor.user_id
    if qualifier is Qualifier.SELF_INSTRUCTOR:
        return ctx.instructor_id == actor.user_id
    if qualifier is Qualifier.OWN_STUDENT:
        return (ctx.student_id is not None
                and state.instructs_student(actor.user_id, ctx.student_id))
    if qualifier is Qualifier.ENROLLED:
        if ctx.class_id is None:
            return False
        section = state.sections.get(ctx.class_id)
        return section is not None and actor.user_id in section.roster
    return False


def is_allowed(state: State, actor: UserAccount, action: str,
               ctx: ResourceContext = ResourceContext()) -> bool:
    row = PERMISSION_MATRIX.get(action)
    if row is None:
        return False
    qualifier = row.get(actor.role)
    if qualifier is None:
        return False
    return _qualifier_holds(state, actor, qualifier, ctx)


def authorize(state: State, actor: UserAccount | None, action: str,
              ctx: ResourceContext = ResourceContext()) -> None:
    """Raise Forbidden unless the matrix allows (role, action) in context.

    actor=None marks trusted operator calls (CLI, seeding); those bypass the
    matrix by design and never originate from the HTTP surface.
    """
    if actor is None:
        return
    if action not in PERMISSION_MATRIX:
        raise errors.Forbidden(f"unknown action {action!r}")
    if not is_allowed(state, actor, action, ctx):
        raise errors.Forbidden(
            f"role {actor.role.value} may not perform {action} here")
