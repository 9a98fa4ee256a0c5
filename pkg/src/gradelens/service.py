"""Service facade: RBAC enforcement, token sessions and commit plumbing.

The HTTP layer and the CLI both talk to this class, so access rules are
enforced once, here, regardless of transport. Write methods re-run their
domain operation on a fresh snapshot when an optimistic commit conflict is
detected.
"""

from __future__ import annotations

import time
from typing import Callable

from . import analytics, csvio, domain, errors, rbac, reports
from .analytics import Scope
from .auth import Session, TokenStore, verify_password
from .models import Criterion, Role, UserAccount
from .rbac import ResourceContext
from .settings import Settings
from .state import ChangeSet, State
from .store import Store

COMMIT_RETRIES = 3

Actor = UserAccount | None


class Service:
    def __init__(self, store: Store, *, clock: Callable[[], float] = time.time):
        self.store = store
        self.clock = clock
        self.tokens = TokenStore(clock)

    # --- snapshots and sessions ------------------------------------------------

    def snapshot(self) -> State:
        return self.store.snapshot()

    def settings(self) -> Settings:
        return self.snapshot().settings or Settings()

    def authenticate(self, name_or_id: str, password: str) -> Session:
        state = self.snapshot()
        for account in domain.find_account(state, name_or_id):
            if verify_password(password, account.credential):
                if not account.active:
                    raise errors.AccountInactive(f"account {account.user_id} is inactive")
                return self.tokens.issue(account.user_id, account.role,
                                         self.settings().token_ttl_minutes)
        raise errors.BadCredentials("unknown account or wrong password")

    def resolve_token(self, token: str) -> UserAccount:
        session = self.tokens.resolve(token)
        state = self.snapshot()
        account = state.users.get(session.user_id)
        if account is None or not account.active:
            raise errors.InvalidToken("session account no longer usable")
        return account

    # --- commit plumbing ----------------------------------------------------------

    def _commit(self, op: Callable[[State], tuple[object, ChangeSet]]):
        last_conflict: errors.ConflictDetected | None = None
        for _ in range(COMMIT_RETRIES):
            state = self.snapshot()
            result, changes = op(state)
            try:
                self.store.commit(changes)
            except errors.ConflictDetected as exc:
                last_conflict = exc
                continue
            return result
        raise last_conflict  # type: ignore[misc]

    def _authorize(self, actor: Actor, action: str,
                   ctx: ResourceContext = ResourceContext()) -> None:
        rbac.authorize(self.snapshot(), actor, action, ctx)

    # --- accounts ---------------------------------------------------------------------

    def create_user(self, actor: Actor, name: str, role: Role, password: str,
                    *, salt: bytes | None = None) -> UserAccount:
        self._authorize(actor, "users.manage")
        return self._commit(
            lambda state: domain.create_user(state, name, role, password, salt=salt))

    def set_password(self, actor: Actor, user_id: str, password: str,
                     *, salt: bytes | None = None) -> UserAccount:
        self._authorize(actor, "users.manage")
        return self._commit(
            lambda state: domain.set_password(state, user_id, password, salt=salt))

    # --- curriculum and courses ---------------------------------------------------------

    def upsert_program_outcome(self, actor: Actor, code: str, attribute: str,
                               curriculum_version: str, *, active: bool = True):
        self._authorize(actor, "outcomes.write")
        return self._commit(lambda state: domain.upsert_program_outcome(
            state, code, attribute, curriculum_version, active=active))

    def create_course(self, actor: Actor, code: str, title: str, units: float):
        self._authorize(actor, "courses.write")
        return self._commit(
            lambda state: domain.create_course(state, code, title, units))

    def create_class_section(self, actor: Actor, course_code: str, term: str,
                             instructor_id: str):
        self._authorize(actor, "classes.create",
                        ResourceContext(instructor_id=instructor_id))
        return self._commit(lambda state: domain.create_class_section(
            state, course_code, term, instructor_id))

    def enroll_student(self, actor: Actor, class_id: str, student_id: str):
        self._authorize(actor, "classes.enroll", ResourceContext(class_id=class_id))
        return self._commit(
            lambda state: domain.enroll_student(state, class_id, student_id))

    def import_roster_csv(self, actor: Actor, class_id: str,
                          text: str) -> csvio.ImportResult:
        self._authorize(actor, "classes.roster_import",
                        ResourceContext(class_id=class_id))

        def op(state: State):
            result = csvio.import_roster_csv(state, class_id, text)
            return result, result.changes

        return self._commit(op)

    def import_scores_csv(self, actor: Actor, class_id: str,
                          text: str) -> csvio.ImportResult:
        self._authorize(actor, "gradebook.write", ResourceContext(class_id=class_id))

        def op(state: State):
            result = csvio.import_scores_csv(state, class_id, text, self.clock())
            return result, result.changes

        return self._commit(op)

    # --- rubrics and evaluations ----------------------------------------------------------

    def define_rubric(self, actor: Actor, title: str,
                      criteria: tuple[Criterion, ...]):
        self._authorize(actor, "rubrics.write")
        return self._commit(lambda state: domain.define_rubric(state, title, criteria))

    def record_evaluation(self, actor: Actor, class_id: str, rubric_id: str,
                          student_id: str, levels: dict[str, int]):
        self._authorize(actor, "evaluations.write", ResourceContext(class_id=class_id))
        evaluator = actor.user_id if actor else self.snapshot().section(class_id).instructor_id
        return self._commit(lambda state: domain.record_evaluation(
            state, class_id, rubric_id, student_id, levels, evaluator, self.clock()))

    # --- skills ------------------------------------------------------------------------------

    def define_skill(self, actor: Actor, name: str, course_code: str):
        self._authorize(actor, "skills.write")
        return self._commit(lambda state: domain.define_skill(state, name, course_code))

    def record_skill_rating(self, actor: Actor, student_id: str, skill_id: str,
                            class_id: str, score: float):
        self._authorize(actor, "skill_ratings.write",
                        ResourceContext(class_id=class_id))
        return self._commit(lambda state: domain.record_skill_rating(
            state, student_id, skill_id, class_id, score, self.clock()))

    def query_student_skills(self, actor: Actor, student_id: str, *,
                             course_code: str | None = None,
                             class_id: str | None = None):
        self._authorize(actor, "student_skills.read",
                        ResourceContext(student_id=student_id))
        return domain.query_student_skills(self.snapshot(), student_id,
                                           course_code=course_code,
                                           class_id=class_id)

    # --- gradebook ------------------------------------------------------------------------------

    def define_grade_components(self, actor: Actor, class_id: str,
                                pairs: list[tuple[str, float]]):
        self._authorize(actor, "gradebook.write", ResourceContext(class_id=class_id))
        return self._commit(
            lambda state: domain.define_grade_components(state, class_id, pairs))

    def define_grade_item(self, actor: Actor, class_id: str, component_id: str,
                          title: str, max_points: float):
        self._authorize(actor, "gradebook.write", ResourceContext(class_id=class_id))
        component = self.snapshot().component(component_id)
        if component.class_id != class_id:
            raise errors.UnknownComponent(
                f"component {component_id} not in class {class_id}")
        return self._commit(lambda state: domain.define_grade_item(
            state, component_id, title, max_points))

    def record_score(self, actor: Actor, class_id: str, student_id: str,
                     item_id: str, raw_score: float):
        self._authorize(actor, "gradebook.write", ResourceContext(class_id=class_id))
        state = self.snapshot()
        item = state.item(item_id)
        component = state.component(item.component_id)
        if component.class_id != class_id:
            raise errors.UnknownItem(f"item {item_id} not in class {class_id}")
        return self._commit(lambda state: domain.record_score(
            state, student_id, item_id, raw_score, self.clock()))

    def gradebook_report(self, actor: Actor, class_id: str) -> dict:
        state = self.snapshot()
        state.section(class_id)
        if actor is not None and actor.role == Role.STUDENT:
            self._authorize(actor, "gradebook.read", ResourceContext(class_id=class_id))
            return reports.gradebook_report(state, class_id,
                                            student_filter=actor.user_id)
        self._authorize(actor, "gradebook.read", ResourceContext(class_id=class_id))
        return reports.gradebook_report(state, class_id)

    # --- analytics ---------------------------------------------------------------------------------

    def _analytics_ctx(self, scope: Scope) -> ResourceContext:
        return ResourceContext(class_id=scope.class_id)

    def attainment_report(self, actor: Actor, scope: Scope,
                          outcome_code: str | None = None,
                          student_id: str | None = None,
                          theta: float | None = None) -> dict:
        self._authorize(actor, "analytics.attainment.read",
                        self._analytics_ctx(scope))
        return reports.attainment_report(self.snapshot(), scope, outcome_code,
                                         student_id, theta)

    def distribution_report(self, actor: Actor, scope: Scope, outcome_code: str,
                            theta: float | None = None) -> dict:
        self._authorize(actor, "analytics.distribution.read",
                        self._analytics_ctx(scope))
        return reports.distribution_report(self.snapshot(), scope, outcome_code,
                                           theta)

    def rollup_report(self, actor: Actor, curriculum_version: str,
                      terms: tuple[str, ...] = (),
                      theta: float | None = None) -> dict:
        self._authorize(actor, "analytics.rollup.read")
        return reports.rollup_report(self.snapshot(), curriculum_version,
                                     terms, theta)

    def trend_report(self, actor: Actor, outcome_code: str,
                     curriculum_version: str, ordered_terms: tuple[str, ...],
                     theta: float | None = None) -> dict:
        self._authorize(actor, "analytics.trend.read")
        return reports.trend_report(self.snapshot(), outcome_code,
                                    curriculum_version, ordered_terms, theta)

    def student_attainment_report(self, actor: Actor, student_id: str) -> dict:
        self._authorize(actor, "student_attainment.read",
                        ResourceContext(student_id=student_id))
        return reports.student_attainment_report(self.snapshot(), student_id)

    def skills_summary_report(self, actor: Actor, class_id: str) -> dict:
        self._authorize(actor, "skills_summary.read",
                        ResourceContext(class_id=class_id))
        return reports.skills_summary_report(self.snapshot(), class_id)

    def analytics_export(self, actor: Actor, scope: Scope,
                         outcome_code: str | None = None,
                         theta: float | None = None) -> reports.Report:
        self._authorize(actor, "reports.export")
        return reports.analytics_export(self.snapshot(), scope, outcome_code, theta)

    # --- settings -------------------------------------------------------------------------------------

    def get_settings(self, actor: Actor) -> Settings:
        self._authorize(actor, "settings.read")
        return self.settings()

    def update_settings(self, actor: Actor, overrides: dict) -> Settings:
        self._authorize(actor, "settings.write")
        return self._commit(lambda state: domain.update_settings(state, overrides))
