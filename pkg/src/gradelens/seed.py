"""Deterministic demo dataset: 30 students, 2 classes across 2 terms,
5 program outcomes, 2 rubrics, gradebook entries, skills and evaluations.

Everything (ids, timestamps, levels, scores, even credential salts) derives
from one fixed RNG seed, so seeding twice produces byte-identical stores.
"""

from __future__ import annotations

import random

from .models import Role
from .service import Service

DEMO_SEED = 20240901
DEMO_BASE_EPOCH = 1725264000.0  # 2024-09-02T08:00:00Z

DEMO_PASSWORDS = {
    "head": "head-pass-1234",
    "instructor": "teach-pass-1234",
    "student": "study-pass-1234",
}

_FAMILY = ["Reyes", "Santos", "Cruz", "Bautista", "Ocampo", "Garcia", "Mendoza",
           "Torres", "Flores", "Ramos", "Aquino", "Navarro", "Domingo", "Salazar",
           "Villanueva"]
_GIVEN = ["Ana", "Jose", "Maria", "Paolo", "Rafael", "Lucia", "Bianca", "Marco",
          "Teresa", "Nina", "Caloy", "Diana", "Emman", "Faye", "Gio"]

_OUTCOMES = [
    ("PO-A", "Apply knowledge of computing fundamentals to solve problems"),
    ("PO-B", "Design, implement and evaluate computing solutions"),
    ("PO-C", "Communicate effectively in oral and written form"),
    ("PO-D", "Function effectively as part of a development team"),
    ("PO-E", "Recognize professional, ethical and social responsibilities"),
]

_SKILLS = {
    "CS101": ["debugging", "problem decomposition", "version control"],
    "CS102": ["query design", "data modeling", "report writing"],
}


class _Clock:
    """Monotonic fake clock stepping one minute per reading."""

    def __init__(self, start: float):
        self._now = start

    def __call__(self) -> float:
        self._now += 60.0
        return self._now


def seed_demo(store) -> dict:
    """Populate a store with the demo cohort; returns the key ids used."""
    rng = random.Random(DEMO_SEED)
    clock = _Clock(DEMO_BASE_EPOCH)
    service = Service(store, clock=clock)

    def salt() -> bytes:
        return rng.getrandbits(128).to_bytes(16, "big")

    head = service.create_user(None, "Dela Cruz, Amelia", Role.DEPARTMENT_HEAD,
                               DEMO_PASSWORDS["head"], salt=salt())
    instructors = [
        service.create_user(None, "Reyes, Benito", Role.INSTRUCTOR,
                            DEMO_PASSWORDS["instructor"], salt=salt()),
        service.create_user(None, "Santos, Carmela", Role.INSTRUCTOR,
                            DEMO_PASSWORDS["instructor"], salt=salt()),
    ]
    students = []
    for i in range(30):
        name = f"{_FAMILY[i % len(_FAMILY)]}, {_GIVEN[(i * 7) % len(_GIVEN)]}"
        students.append(service.create_user(
            None, name, Role.STUDENT, DEMO_PASSWORDS["student"], salt=salt()))

    for code, attribute in _OUTCOMES:
        service.upsert_program_outcome(None, code, attribute, "2023")

    service.create_course(None, "CS101", "Programming Fundamentals", 3.0)
    service.create_course(None, "CS102", "Data Management", 3.0)

    class_a = service.create_class_section(
        None, "CS101", "2024-1", instructors[0].user_id)
    class_b = service.create_class_section(
        None, "CS102", "2024-2", instructors[1].user_id)

    for student in students:
        service.enroll_student(None, class_a.class_id, student.user_id)
    cohort_b = rng.sample(students, 18)
    for student in sorted(cohort_b, key=lambda s: s.user_id):
        service.enroll_student(None, class_b.class_id, student.user_id)

    rubric_a = service.define_rubric(None, "Capstone Project Rubric", tuple(
        domain_criterion(cid, desc, weight, mappings, max_level)
        for cid, desc, weight, mappings, max_level in [
            ("design", "Solution design quality", 2.0,
             [("PO-A", 1.0), ("PO-B", 0.5)], 4),
            ("implementation", "Implementation correctness", 3.0,
             [("PO-B", 1.0)], 4),
            ("documentation", "Technical documentation", 1.0,
             [("PO-C", 1.0)], 5),
            ("collaboration", "Team contribution", 1.5,
             [("PO-D", 1.0), ("PO-E", 0.25)], 4),
        ]))
    rubric_b = service.define_rubric(None, "Lab Exercise Rubric", tuple(
        domain_criterion(cid, desc, weight, mappings, max_level)
        for cid, desc, weight, mappings, max_level in [
            ("queries", "Query correctness", 2.0,
             [("PO-A", 0.5), ("PO-B", 1.0)], 4),
            ("schema", "Schema design", 1.0, [("PO-B", 1.0), ("PO-E", 0.5)], 4),
            ("writeup", "Result interpretation", 1.0,
             [("PO-C", 1.0), ("PO-D", 0.5)], 4),
        ]))

    # rubric evaluations: one per enrolled student per class
    for section, rubric, weights in (
            (class_a, rubric_a, [1, 2, 4, 5, 6]),
            (class_b, rubric_b, [1, 3, 4, 4, 5])):
        snapshot = service.snapshot()
        roster = sorted(snapshot.section(section.class_id).roster)
        for student_id in roster:
            levels = {}
            for criterion in rubric.criteria:
                span = list(range(criterion.min_level, criterion.max_level + 1))
                levels[criterion.criterion_id] = rng.choices(
                    span, weights=weights[:len(span)])[0]
            service.record_evaluation(None, section.class_id, rubric.rubric_id,
                                      student_id, levels)

    # gradebook for class A: quizzes 40% / exam 60%
    components = service.define_grade_components(
        None, class_a.class_id, [("Quizzes", 0.4), ("Exam", 0.6)])
    quiz_component, exam_component = components
    quiz1 = service.define_grade_item(None, class_a.class_id,
                                      quiz_component.component_id, "Quiz 1", 20.0)
    quiz2 = service.define_grade_item(None, class_a.class_id,
                                      quiz_component.component_id, "Quiz 2", 20.0)
    exam = service.define_grade_item(None, class_a.class_id,
                                     exam_component.component_id, "Final Exam", 50.0)
    for index, student in enumerate(students):
        service.record_score(None, class_a.class_id, student.user_id,
                             quiz1.item_id, float(rng.randint(8, 20)))
        service.record_score(None, class_a.class_id, student.user_id,
                             quiz2.item_id, float(rng.randint(10, 20)))
        if index >= 2:  # leave two students exam-less: incomplete paths
            service.record_score(None, class_a.class_id, student.user_id,
                                 exam.item_id, float(rng.randint(20, 50)))

    # skills with some re-rated entries (last write wins)
    skills = {}
    for course_code, names in _SKILLS.items():
        for name in names:
            skill = service.define_skill(None, name, course_code)
            skills[(course_code, name)] = skill
    for section, course_code in ((class_a, "CS101"), (class_b, "CS102")):
        snapshot = service.snapshot()
        roster = sorted(snapshot.section(section.class_id).roster)
        for student_id in roster[:12]:
            for name in _SKILLS[course_code][:2]:
                skill = skills[(course_code, name)]
                service.record_skill_rating(None, student_id, skill.skill_id,
                                            section.class_id,
                                            float(rng.randint(60, 100)))
        for student_id in roster[:3]:  # re-rate to exercise history
            skill = skills[(course_code, _SKILLS[course_code][0])]
            service.record_skill_rating(None, student_id, skill.skill_id,
                                        section.class_id,
                                        float(rng.randint(70, 100)))

    return {
        "head": head.user_id,
        "instructors": [i.user_id for i in instructors],
        "students": [s.user_id for s in students],
        "classes": [class_a.class_id, class_b.class_id],
        "rubrics": [rubric_a.rubric_id, rubric_b.rubric_id],
        "curriculum": "2023",
        "terms": ["2024-1", "2024-2"],
    }


def domain_criterion(cid: str, description: str, weight: float,
                     mappings: list[tuple[str, float]], max_level: int):
    from .models import Criterion, OutcomeMapping
    return Criterion(
        criterion_id=cid, description=description, weight=weight,
        mappings=tuple(OutcomeMapping(outcome_code=code, map_weight=w)
                       for code, w in mappings),
        min_level=1, max_level=max_level)
