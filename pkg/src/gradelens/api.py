"""Versioned HTTP/JSON API under /api/v1.

Every response body is canonical JSON built by the reports/domain layer, so
an HTTP read is byte-identical to the same computation done in-process.
Every mutating request performs exactly one store commit; every read works
off one snapshot. Domain errors map 1:1 to stable machine codes.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import domain, errors, rbac
from .analytics import Scope
from .canon import canonical_bytes
from .models import Role
from .service import Service

API_PREFIX = "/api/v1"

# (method, path template, permission-matrix action or None when public);
# the RBAC acceptance suite enumerates this table against every role.
ENDPOINT_ACTIONS: list[tuple[str, str, str | None]] = [
    ("POST", "/auth/token", None),
    ("GET", "/health", None),
    ("GET", "/outcomes", "outcomes.read"),
    ("POST", "/outcomes", "outcomes.write"),
    ("PUT", "/outcomes/{code}", "outcomes.write"),
    ("GET", "/courses", "courses.read"),
    ("POST", "/courses", "courses.write"),
    ("GET", "/classes", "classes.read"),
    ("POST", "/classes", "classes.create"),
    ("POST", "/classes/{class_id}/enroll", "classes.enroll"),
    ("POST", "/classes/{class_id}/roster-import", "classes.roster_import"),
    ("POST", "/classes/{class_id}/grade-components", "gradebook.write"),
    ("POST", "/classes/{class_id}/items", "gradebook.write"),
    ("POST", "/classes/{class_id}/scores", "gradebook.write"),
    ("GET", "/classes/{class_id}/gradebook", "gradebook.read"),
    ("GET", "/classes/{class_id}/skills-summary", "skills_summary.read"),
    ("GET", "/rubrics", "rubrics.read"),
    ("POST", "/rubrics", "rubrics.write"),
    ("POST", "/classes/{class_id}/evaluations", "evaluations.write"),
    ("GET", "/skills", "skills.read"),
    ("POST", "/skills", "skills.write"),
    ("POST", "/skill-ratings", "skill_ratings.write"),
    ("GET", "/students/{student_id}/skills", "student_skills.read"),
    ("GET", "/students/{student_id}/attainment", "student_attainment.read"),
    ("GET", "/analytics/attainment", "analytics.attainment.read"),
    ("GET", "/analytics/distribution", "analytics.distribution.read"),
    ("GET", "/analytics/rollup", "analytics.rollup.read"),
    ("GET", "/analytics/trend", "analytics.trend.read"),
    ("GET", "/reports/export", "reports.export"),
    ("GET", "/settings", "settings.read"),
    ("PUT", "/settings", "settings.write"),
]


def _json_response(doc, status_code: int = 200) -> Response:
    return Response(content=canonical_bytes(doc),
                    media_type="application/json", status_code=status_code)


def _error_response(exc: errors.GradelensError) -> Response:
    return _json_response(exc.to_doc(), status_code=exc.http_status)


def _iso(epoch: float) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")


async def _body(request: Request) -> dict:
    raw = await request.body()
    try:
        doc = json.loads(raw.decode("utf-8") if raw else "")
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise _BadBody("request body is not valid JSON")
    if not isinstance(doc, dict):
        raise _BadBody("request body must be a JSON object")
    return doc


class _BadBody(errors.ValidationError):
    code = "bad_body"


def _require(doc: dict, *keys: str) -> list:
    missing = [k for k in keys if k not in doc]
    if missing:
        raise errors.ValidationError(
            f"missing required fields: {', '.join(missing)}")
    return [doc[k] for k in keys]


def _param(request: Request, key: str, required: bool = False) -> str | None:
    value = request.query_params.get(key)
    if required and (value is None or value == ""):
        raise errors.ValidationError(f"missing required query param {key!r}")
    return value


def _theta(request: Request) -> float | None:
    raw = _param(request, "theta")
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise errors.ValidationError(f"theta {raw!r} is not a number")


def _number(value, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise errors.ValidationError(f"{label} must be a number")
    return float(value)


def _scope_from(request: Request) -> Scope:
    expr = _param(request, "scope")
    if expr:
        return Scope.parse(expr)
    terms_raw = _param(request, "terms")
    return Scope(
        class_id=_param(request, "class"),
        term=_param(request, "term"),
        terms=tuple(t for t in terms_raw.split(",") if t) if terms_raw else None,
        curriculum_version=_param(request, "curriculum"),
    )


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="gradelens", docs_url=None, redoc_url=None,
                  openapi_url=None)

    @app.exception_handler(errors.GradelensError)
    async def _domain_error(request: Request, exc: errors.GradelensError):
        return _error_response(exc)

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error")
        return _json_response({"code": code, "message": str(exc.detail)},
                              status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def _request_error(request: Request, exc: RequestValidationError):
        return _json_response({"code": "bad_body", "message": "malformed request"},
                              status_code=422)

    def actor_from(request: Request):
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise errors.InvalidToken("missing bearer token")
        return service.resolve_token(header[len("Bearer "):].strip())

    # --- auth / health -------------------------------------------------------

    @app.post(f"{API_PREFIX}/auth/token")
    async def issue_token(request: Request):
        doc = await _body(request)
        name_or_id, password = _require(doc, "name_or_id", "password")
        session = service.authenticate(str(name_or_id), str(password))
        return _json_response({
            "token": session.token,
            "expires_at": _iso(session.expires_at),
            "user_id": session.user_id,
            "role": session.role.value,
        })

    @app.get(f"{API_PREFIX}/health")
    async def health():
        return _json_response({"status": "ok"})

    # --- outcomes --------------------------------------------------------------

    @app.get(f"{API_PREFIX}/outcomes")
    async def list_outcomes(request: Request):
        actor = actor_from(request)
        state = service.snapshot()
        rbac.authorize(state, actor, "outcomes.read")
        curriculum = _param(request, "curriculum")
        outcomes = sorted(
            (o for o in state.outcomes.values()
             if curriculum is None or o.curriculum_version == curriculum),
            key=lambda o: (o.outcome_code, o.curriculum_version))
        return _json_response({"outcomes": [o.to_doc() for o in outcomes]})

    @app.post(f"{API_PREFIX}/outcomes")
    async def create_outcome(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        code, attribute, version = _require(
            doc, "outcome_code", "graduate_attribute", "curriculum_version")
        outcome = service.upsert_program_outcome(
            actor, str(code), str(attribute), str(version),
            active=bool(doc.get("active", True)))
        return _json_response(outcome.to_doc())

    @app.put(f"{API_PREFIX}/outcomes/{{code}}")
    async def update_outcome(request: Request, code: str):
        actor = actor_from(request)
        doc = await _body(request)
        attribute, version = _require(doc, "graduate_attribute", "curriculum_version")
        outcome = service.upsert_program_outcome(
            actor, code, str(attribute), str(version),
            active=bool(doc.get("active", True)))
        return _json_response(outcome.to_doc())

    # --- courses -----------------------------------------------------------------

    @app.get(f"{API_PREFIX}/courses")
    async def list_courses(request: Request):
        actor = actor_from(request)
        state = service.snapshot()
        rbac.authorize(state, actor, "courses.read")
        courses = sorted(state.courses.values(), key=lambda c: c.course_code)
        return _json_response({"courses": [c.to_doc() for c in courses]})

    @app.post(f"{API_PREFIX}/courses")
    async def create_course(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        code, title, units = _require(doc, "course_code", "title", "units")
        course = service.create_course(actor, str(code), str(title), _number(units, "units"))
        return _json_response(course.to_doc())

    # --- classes ------------------------------------------------------------------

    @app.get(f"{API_PREFIX}/classes")
    async def list_classes(request: Request):
        actor = actor_from(request)
        state = service.snapshot()
        rbac.authorize(state, actor, "classes.read")
        sections = sorted(state.sections.values(), key=lambda s: s.class_id)
        if actor.role == Role.INSTRUCTOR:
            sections = [s for s in sections if s.instructor_id == actor.user_id]
        elif actor.role == Role.STUDENT:
            sections = [s for s in sections if actor.user_id in s.roster]
        return _json_response({"classes": [s.to_doc() for s in sections]})

    @app.post(f"{API_PREFIX}/classes")
    async def create_class(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        course_code, term, instructor_id = _require(
            doc, "course_code", "term", "instructor_id")
        section = service.create_class_section(
            actor, str(course_code), str(term), str(instructor_id))
        return _json_response(section.to_doc())

    @app.post(f"{API_PREFIX}/classes/{{class_id}}/enroll")
    async def enroll(request: Request, class_id: str):
        actor = actor_from(request)
        doc = await _body(request)
        (student_id,) = _require(doc, "student_id")
        section = service.enroll_student(actor, class_id, str(student_id))
        return _json_response({"class_id": class_id,
                               "roster_size": len(section.roster)})

    @app.post(f"{API_PREFIX}/classes/{{class_id}}/roster-import")
    async def roster_import(request: Request, class_id: str):
        actor = actor_from(request)
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise _BadBody("roster file must be UTF-8")
        result = service.import_roster_csv(actor, class_id, text)
        return _json_response({
            "class_id": class_id,
            "enrolled": result.applied,
            "rejected": [r.to_doc() for r in result.rejected],
        })

    # --- gradebook -------------------------------------------------------------------

    @app.post(f"{API_PREFIX}/classes/{{class_id}}/grade-components")
    async def set_components(request: Request, class_id: str):
        actor = actor_from(request)
        doc = await _body(request)
        (raw_components,) = _require(doc, "components")
        if not isinstance(raw_components, list):
            raise errors.ValidationError("components must be a list")
        pairs = []
        for c in raw_components:
            if not isinstance(c, dict) or "name" not in c or "weight" not in c:
                raise errors.ValidationError(
                    "each component needs a name and a weight")
            pairs.append((str(c["name"]), _number(c["weight"], "weight")))
        created = service.define_grade_components(actor, class_id, pairs)
        return _json_response({"components": [c.to_doc() for c in created]})

    @app.post(f"{API_PREFIX}/classes/{{class_id}}/items")
    async def add_item(request: Request, class_id: str):
        actor = actor_from(request)
        doc = await _body(request)
        component_id, title, max_points = _require(
            doc, "component_id", "title", "max_points")
        item = service.define_grade_item(actor, class_id, str(component_id),
                                         str(title),
                                         _number(max_points, "max_points"))
        return _json_response(item.to_doc())

    @app.post(f"{API_PREFIX}/classes/{{class_id}}/scores")
    async def post_score(request: Request, class_id: str):
        actor = actor_from(request)
        doc = await _body(request)
        student_id, item_id, raw_score = _require(
            doc, "student_id", "item_id", "raw_score")
        entry = service.record_score(actor, class_id, str(student_id),
                                     str(item_id), _number(raw_score, "raw_score"))
        return _json_response(entry.to_doc())

    @app.get(f"{API_PREFIX}/classes/{{class_id}}/gradebook")
    async def gradebook_view(request: Request, class_id: str):
        actor = actor_from(request)
        return _json_response(service.gradebook_report(actor, class_id))

    @app.get(f"{API_PREFIX}/classes/{{class_id}}/skills-summary")
    async def class_skills_summary(request: Request, class_id: str):
        actor = actor_from(request)
        return _json_response(service.skills_summary_report(actor, class_id))

    # --- rubrics and evaluations --------------------------------------------------------

    @app.get(f"{API_PREFIX}/rubrics")
    async def list_rubrics(request: Request):
        actor = actor_from(request)
        state = service.snapshot()
        rbac.authorize(state, actor, "rubrics.read")
        rubrics = sorted(state.rubrics.values(), key=lambda r: r.rubric_id)
        return _json_response({"rubrics": [r.to_doc() for r in rubrics]})

    @app.post(f"{API_PREFIX}/rubrics")
    async def create_rubric(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        title, raw_criteria = _require(doc, "title", "criteria")
        if not isinstance(raw_criteria, list):
            raise errors.ValidationError("criteria must be a list")
        criteria = tuple(
            domain.criterion_from_doc(c, fallback_id=f"c{i + 1}")
            for i, c in enumerate(raw_criteria))
        rubric = service.define_rubric(actor, str(title), criteria)
        return _json_response(rubric.to_doc())

    @app.post(f"{API_PREFIX}/classes/{{class_id}}/evaluations")
    async def post_evaluation(request: Request, class_id: str):
        actor = actor_from(request)
        doc = await _body(request)
        rubric_id, student_id, levels = _require(
            doc, "rubric_id", "student_id", "levels")
        if not isinstance(levels, dict):
            raise errors.ValidationError("levels must be an object")
        parsed = {}
        for cid, level in levels.items():
            if not isinstance(level, int) or isinstance(level, bool):
                raise errors.ValidationError(
                    f"level for {cid} must be an integer")
            parsed[str(cid)] = level
        record = service.record_evaluation(actor, class_id, str(rubric_id),
                                           str(student_id), parsed)
        return _json_response(record.to_doc())

    # --- skills ----------------------------------------------------------------------------

    @app.get(f"{API_PREFIX}/skills")
    async def list_skills(request: Request):
        actor = actor_from(request)
        state = service.snapshot()
        rbac.authorize(state, actor, "skills.read")
        course = _param(request, "course")
        skills = sorted(
            (s for s in state.skills.values()
             if course is None or s.course_code == course),
            key=lambda s: (s.course_code, s.name))
        return _json_response({"skills": [s.to_doc() for s in skills]})

    @app.post(f"{API_PREFIX}/skills")
    async def create_skill(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        name, course_code = _require(doc, "name", "course_code")
        skill = service.define_skill(actor, str(name), str(course_code))
        return _json_response(skill.to_doc())

    @app.post(f"{API_PREFIX}/skill-ratings")
    async def post_skill_rating(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        student_id, skill_id, class_id, score = _require(
            doc, "student_id", "skill_id", "class_id", "score")
        rating = service.record_skill_rating(
            actor, str(student_id), str(skill_id), str(class_id),
            _number(score, "score"))
        return _json_response(rating.to_doc())

    @app.get(f"{API_PREFIX}/students/{{student_id}}/skills")
    async def student_skills(request: Request, student_id: str):
        actor = actor_from(request)
        views = service.query_student_skills(
            actor, student_id,
            course_code=_param(request, "course"),
            class_id=_param(request, "class"))
        return _json_response({
            "student_id": student_id,
            "skills": [{
                "skill_id": v.skill_id,
                "name": v.name,
                "course_code": v.course_code,
                "class_id": v.class_id,
                "score": v.score,
                "recorded_at": v.recorded_at,
            } for v in views],
        })

    @app.get(f"{API_PREFIX}/students/{{student_id}}/attainment")
    async def student_attainment(request: Request, student_id: str):
        actor = actor_from(request)
        return _json_response(service.student_attainment_report(actor, student_id))

    # --- analytics --------------------------------------------------------------------------

    @app.get(f"{API_PREFIX}/analytics/attainment")
    async def analytics_attainment(request: Request):
        actor = actor_from(request)
        return _json_response(service.attainment_report(
            actor, _scope_from(request),
            outcome_code=_param(request, "outcome"),
            student_id=_param(request, "student"),
            theta=_theta(request)))

    @app.get(f"{API_PREFIX}/analytics/distribution")
    async def analytics_distribution(request: Request):
        actor = actor_from(request)
        outcome = _param(request, "outcome", required=True)
        return _json_response(service.distribution_report(
            actor, _scope_from(request), outcome, theta=_theta(request)))

    @app.get(f"{API_PREFIX}/analytics/rollup")
    async def analytics_rollup(request: Request):
        actor = actor_from(request)
        curriculum = _param(request, "curriculum", required=True)
        terms_raw = _param(request, "terms")
        terms = tuple(t for t in terms_raw.split(",") if t) if terms_raw else ()
        return _json_response(service.rollup_report(
            actor, curriculum, terms, theta=_theta(request)))

    @app.get(f"{API_PREFIX}/analytics/trend")
    async def analytics_trend(request: Request):
        actor = actor_from(request)
        outcome = _param(request, "outcome", required=True)
        curriculum = _param(request, "curriculum", required=True)
        terms_raw = _param(request, "terms", required=True)
        terms = tuple(t for t in terms_raw.split(",") if t)
        return _json_response(service.trend_report(
            actor, outcome, curriculum, terms, theta=_theta(request)))

    # --- reports and settings ----------------------------------------------------------------

    @app.get(f"{API_PREFIX}/reports/export")
    async def reports_export(request: Request):
        actor = actor_from(request)
        fmt = _param(request, "format", required=True)
        if fmt not in ("csv", "json"):
            raise errors.ValidationError(f"format must be csv or json, got {fmt!r}")
        report = service.analytics_export(
            actor, _scope_from(request),
            outcome_code=_param(request, "outcome"), theta=_theta(request))
        if fmt == "csv":
            return Response(content=report.csv_text.encode("utf-8"),
                            media_type="text/csv")
        return _json_response(report.json_doc)

    @app.get(f"{API_PREFIX}/settings")
    async def get_settings(request: Request):
        actor = actor_from(request)
        return _json_response(service.get_settings(actor).to_doc())

    @app.put(f"{API_PREFIX}/settings")
    async def put_settings(request: Request):
        actor = actor_from(request)
        doc = await _body(request)
        updated = service.update_settings(actor, doc)
        return _json_response(updated.to_doc())

    return app
