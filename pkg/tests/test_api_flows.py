"""End-to-end HTTP flows: full create->enroll->evaluate->analytics pipeline,
byte equivalence with in-process computation, token expiry, error mapping."""

import pytest
from fastapi.testclient import TestClient

from gradelens import reports
from gradelens.analytics import Scope
from gradelens.api import API_PREFIX, create_app
from gradelens.canon import canonical_bytes
from gradelens.models import Role
from gradelens.seed import DEMO_PASSWORDS, seed_demo
from gradelens.service import Service
from gradelens.store import open_store


class TickingClock:
    def __init__(self, start=1_725_264_000.0):
        self.now = start

    def __call__(self):
        return self.now


@pytest.fixture()
def api(tmp_path):
    store = open_store(tmp_path / "data")
    clock = TickingClock()
    service = Service(store, clock=clock)
    client = TestClient(create_app(service))
    yield service, client, clock
    store.close()


def _login(client, name_or_id, password):
    response = client.post(f"{API_PREFIX}/auth/token",
                           json={"name_or_id": name_or_id, "password": password})
    assert response.status_code == 200, response.text
    return {"Authorization": f"Bearer {response.json()['token']}"}


def test_health(api):
    _, client, _ = api
    response = client.get(f"{API_PREFIX}/health")
    assert response.status_code == 200
    assert response.content == b'{"status":"ok"}'


def test_full_flow_equals_library_bytes(api):
    service, client, _ = api
    head = service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    instructor = service.create_user(None, "Reyes", Role.INSTRUCTOR,
                                     "teach-pass-1")
    students = [service.create_user(None, f"S{i}", Role.STUDENT, "study-pass-1")
                for i in range(4)]
    dh = _login(client, head.user_id, "head-pass-1")
    tea = _login(client, instructor.user_id, "teach-pass-1")

    # course, outcomes, class, enrollment over HTTP
    assert client.post(f"{API_PREFIX}/courses", headers=dh, json={
        "course_code": "CS101", "title": "Programming 1", "units": 3.0,
    }).status_code == 200
    for code in ("PO-A", "PO-B"):
        assert client.post(f"{API_PREFIX}/outcomes", headers=dh, json={
            "outcome_code": code, "graduate_attribute": f"attr {code}",
            "curriculum_version": "2023"}).status_code == 200
    response = client.post(f"{API_PREFIX}/classes", headers=dh, json={
        "course_code": "CS101", "term": "2024-1",
        "instructor_id": instructor.user_id})
    class_id = response.json()["class_id"]
    for s in students:
        assert client.post(f"{API_PREFIX}/classes/{class_id}/enroll",
                           headers=dh,
                           json={"student_id": s.user_id}).status_code == 200

    # rubric and evaluations
    response = client.post(f"{API_PREFIX}/rubrics", headers=tea, json={
        "title": "Project",
        "criteria": [
            {"criterion_id": "c1", "description": "quality", "weight": 2.0,
             "min_level": 1, "max_level": 11,
             "mappings": [{"outcome_code": "PO-A", "map_weight": 1.0}]},
            {"criterion_id": "c2", "description": "rigor", "weight": 1.0,
             "min_level": 1, "max_level": 11,
             "mappings": [{"outcome_code": "PO-A", "map_weight": 1.0},
                          {"outcome_code": "PO-B", "map_weight": 2.0}]},
        ]})
    assert response.status_code == 200, response.text
    rubric_id = response.json()["rubric_id"]
    levels = [(11, 9), (8, 8), (9, 6), (4, 4)]
    for s, (c1, c2) in zip(students, levels):
        response = client.post(f"{API_PREFIX}/classes/{class_id}/evaluations",
                               headers=tea, json={
                                   "rubric_id": rubric_id,
                                   "student_id": s.user_id,
                                   "levels": {"c1": c1, "c2": c2}})
        assert response.status_code == 200, response.text

    # every analytics read must be byte-identical to the library computation
    state = service.snapshot()
    checks = [
        (f"/analytics/distribution?outcome=PO-A&class={class_id}",
         reports.distribution_report(state, Scope(class_id=class_id), "PO-A")),
        (f"/analytics/attainment?outcome=PO-A&class={class_id}",
         reports.attainment_report(state, Scope(class_id=class_id), "PO-A")),
        ("/analytics/rollup?curriculum=2023",
         reports.rollup_report(state, "2023")),
        ("/analytics/trend?outcome=PO-B&curriculum=2023&terms=2024-1",
         reports.trend_report(state, "PO-B", "2023", ("2024-1",))),
        (f"/students/{students[0].user_id}/attainment",
         reports.student_attainment_report(state, students[0].user_id)),
    ]
    for url, expected_doc in checks:
        response = client.get(f"{API_PREFIX}{url}", headers=dh)
        assert response.status_code == 200, (url, response.text)
        assert response.content == canonical_bytes(expected_doc), url

    # export: canonical json over HTTP equals library export bytes
    response = client.get(
        f"{API_PREFIX}/reports/export",
        headers=dh, params={"format": "json", "scope": f"class={class_id}"})
    library_report = reports.analytics_export(state, Scope(class_id=class_id))
    assert response.content == canonical_bytes(library_report.json_doc)
    response = client.get(
        f"{API_PREFIX}/reports/export",
        headers=dh, params={"format": "csv", "scope": f"class={class_id}"})
    assert response.text == library_report.csv_text


def test_token_expires_past_ttl(api):
    service, client, clock = api
    head = service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    headers = _login(client, head.user_id, "head-pass-1")
    assert client.get(f"{API_PREFIX}/settings", headers=headers).status_code == 200
    clock.now += 480 * 60 + 1  # default TTL is 480 minutes
    response = client.get(f"{API_PREFIX}/settings", headers=headers)
    assert response.status_code == 401
    assert response.json()["code"] == "invalid_token"


def test_login_failure_names_no_account_detail(api):
    service, client, _ = api
    service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    wrong_pw = client.post(f"{API_PREFIX}/auth/token",
                           json={"name_or_id": "Head", "password": "bad-pass-1"})
    no_user = client.post(f"{API_PREFIX}/auth/token",
                          json={"name_or_id": "Ghost", "password": "bad-pass-1"})
    assert wrong_pw.status_code == no_user.status_code == 401
    assert wrong_pw.json() == no_user.json()  # uniform body


def test_error_code_mapping(api):
    service, client, _ = api
    head = service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    dh = _login(client, head.user_id, "head-pass-1")

    response = client.post(f"{API_PREFIX}/courses", headers=dh,
                           content=b"{bad json")
    assert (response.status_code, response.json()["code"]) == (422, "bad_body")

    client.post(f"{API_PREFIX}/courses", headers=dh, json={
        "course_code": "CS101", "title": "P1", "units": 3.0})
    response = client.post(f"{API_PREFIX}/courses", headers=dh, json={
        "course_code": "CS101", "title": "P1", "units": 3.0})
    assert (response.status_code, response.json()["code"]) == (409, "duplicate_code")

    response = client.post(f"{API_PREFIX}/classes", headers=dh, json={
        "course_code": "NOPE", "term": "2024-1", "instructor_id": head.user_id})
    assert (response.status_code, response.json()["code"]) == (404, "unknown_course")

    response = client.post(f"{API_PREFIX}/courses", headers=dh, json={
        "course_code": "CS102", "title": "P2", "units": -1})
    assert response.status_code == 422

    response = client.get(f"{API_PREFIX}/no-such-route", headers=dh)
    assert (response.status_code, response.json()["code"]) == (404, "not_found")


def test_roster_import_over_http(api):
    service, client, _ = api
    head = service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    instructor = service.create_user(None, "Reyes", Role.INSTRUCTOR, "teach-pass-1")
    service.create_course(None, "CS101", "P1", 3.0)
    section = service.create_class_section(None, "CS101", "2024-1",
                                           instructor.user_id)
    dh = _login(client, head.user_id, "head-pass-1")
    csv_text = ("student_id,last_name,first_name,email\n"
                "s001,Reyes,Ana,ana@school.edu\n"
                "s001,Reyes,Ana,ana@school.edu\n"
                "s002,Cruz,Ben,ben@school.edu\n")
    response = client.post(f"{API_PREFIX}/classes/{section.class_id}/roster-import",
                           headers={**dh, "content-type": "text/csv"},
                           content=csv_text.encode())
    assert response.status_code == 200
    doc = response.json()
    assert doc["enrolled"] == 2
    assert doc["rejected"] == [{"line": 3, "reason":
                                "duplicate student_id s001 in file"}]


def test_settings_roundtrip_over_http(api):
    service, client, _ = api
    head = service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    dh = _login(client, head.user_id, "head-pass-1")
    response = client.get(f"{API_PREFIX}/settings", headers=dh)
    assert response.json()["attainment_threshold"] == 0.7
    response = client.put(f"{API_PREFIX}/settings", headers=dh,
                          json={"attainment_threshold": 0.75})
    assert response.status_code == 200
    assert response.json()["attainment_threshold"] == 0.75
    response = client.put(f"{API_PREFIX}/settings", headers=dh,
                          json={"attainment_threshold": 2})
    assert (response.status_code, response.json()["code"]) == (422, "bad_settings")


def test_student_self_views(api):
    service, client, _ = api
    store_ids = seed_demo(service.store)
    sid = store_ids["students"][0]
    student = _login(client, sid, DEMO_PASSWORDS["student"])
    response = client.get(f"{API_PREFIX}/students/{sid}/attainment",
                          headers=student)
    assert response.status_code == 200
    assert response.json()["records"]
    response = client.get(f"{API_PREFIX}/students/{sid}/skills", headers=student)
    assert response.status_code == 200
    response = client.get(f"{API_PREFIX}/classes", headers=student)
    classes = response.json()["classes"]
    assert all(sid in c["roster"] for c in classes)


def test_no_api_response_carries_credentials(api):
    service, client, _ = api
    ids = seed_demo(service.store)
    dh = _login(client, ids["head"], DEMO_PASSWORDS["head"])
    urls = [
        "/outcomes", "/courses", "/classes", "/rubrics", "/skills",
        f"/classes/{ids['classes'][0]}/gradebook",
        f"/students/{ids['students'][0]}/attainment",
        f"/students/{ids['students'][0]}/skills",
        "/analytics/rollup?curriculum=2023",
        "/settings",
    ]
    for url in urls:
        response = client.get(f"{API_PREFIX}{url}", headers=dh)
        assert response.status_code == 200, url
        assert b"credential" not in response.content, url
        assert b"digest" not in response.content, url
