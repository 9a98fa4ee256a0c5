"""Roster and scores CSV ingestion: header checks, line-level rejects,
atomic application of the good rows."""

import pytest

from gradelens import errors
from gradelens.models import Role

HEADER = "student_id,last_name,first_name,email"


def _class(service):
    service.create_user(None, "Head", Role.DEPARTMENT_HEAD, "head-pass-1")
    instructor = service.create_user(None, "Reyes", Role.INSTRUCTOR, "teach-pass-1")
    service.create_course(None, "CS101", "Programming 1", 3.0)
    return service.create_class_section(None, "CS101", "2024-1",
                                        instructor.user_id)


def _roster_csv(n, prefix="s"):
    lines = [HEADER]
    for i in range(n):
        lines.append(f"{prefix}{i:03d},Family{i},Given{i},{prefix}{i:03d}@school.edu")
    return "\n".join(lines) + "\n"


def test_thirty_valid_rows_enrolled(service):
    section = _class(service)
    result = service.import_roster_csv(None, section.class_id, _roster_csv(30))
    assert result.applied == 30
    assert result.rejected == ()
    state = service.snapshot()
    assert len(state.section(section.class_id).roster) == 30
    # oracle: distinct ids in the file
    distinct = len({line.split(",")[0]
                    for line in _roster_csv(30).strip().splitlines()[1:]})
    assert len(state.section(section.class_id).roster) == distinct


def test_wrong_header_nothing_applied(service):
    section = _class(service)
    bad = "id,surname,name,mail\ns1,A,B,a@b.c\n"
    with pytest.raises(errors.BadHeader):
        service.import_roster_csv(None, section.class_id, bad)
    assert service.snapshot().section(section.class_id).roster == ()


def test_empty_file(service):
    section = _class(service)
    with pytest.raises(errors.EmptyFile):
        service.import_roster_csv(None, section.class_id, "")
    with pytest.raises(errors.EmptyFile):
        service.import_roster_csv(None, section.class_id, HEADER + "\n")


def test_duplicate_ids_rejected_with_line_numbers(service):
    section = _class(service)
    rows = _roster_csv(30).strip().splitlines()
    rows.insert(5, rows[4])   # duplicate of s003 right after it
    rows.append(rows[10])     # second duplicate at the end
    text = "\n".join(rows) + "\n"
    result = service.import_roster_csv(None, section.class_id, text)
    assert result.applied == 30
    assert len(result.rejected) == 2
    assert [r.line for r in result.rejected] == [6, 33]
    assert all("duplicate" in r.reason for r in result.rejected)


def test_rejected_rows_do_not_block_good_ones(service):
    section = _class(service)
    text = "\n".join([
        HEADER,
        "s001,Reyes,Ana,ana@school.edu",
        ",NoId,Given,x@school.edu",
        "s002,Santos,Ben,not-an-email",
        "s003,,Carla,carla@school.edu",
        "s004,Cruz,Dana,dana@school.edu",
    ]) + "\n"
    result = service.import_roster_csv(None, section.class_id, text)
    assert result.applied == 2
    reasons = {r.line: r.reason for r in result.rejected}
    assert set(reasons) == {3, 4, 5}
    roster = service.snapshot().section(section.class_id).roster
    assert roster == ("s001", "s004")


def test_imported_accounts_cannot_login_until_password_set(service):
    section = _class(service)
    service.import_roster_csv(None, section.class_id, _roster_csv(1))
    with pytest.raises(errors.BadCredentials):
        service.authenticate("s000", "anything-goes")
    service.set_password(None, "s000", "fresh-pass-1")
    assert service.authenticate("s000", "fresh-pass-1").user_id == "s000"


def test_existing_non_student_id_rejected(service):
    section = _class(service)
    text = HEADER + "\nu-0002,Reyes,Benito,reyes@school.edu\n"
    result = service.import_roster_csv(None, section.class_id, text)
    assert result.applied == 0
    assert "role" in result.rejected[0].reason


def test_reimport_rejects_already_enrolled(service):
    section = _class(service)
    service.import_roster_csv(None, section.class_id, _roster_csv(3))
    result = service.import_roster_csv(None, section.class_id, _roster_csv(3))
    assert result.applied == 0
    assert all("already enrolled" in r.reason for r in result.rejected)


# --- scores CSV --------------------------------------------------------------

def _scored_class(service):
    section = _class(service)
    service.import_roster_csv(None, section.class_id, _roster_csv(3))
    components = service.define_grade_components(
        None, section.class_id, [("Quizzes", 1.0)])
    item = service.define_grade_item(None, section.class_id,
                                     components[0].component_id, "Quiz 1", 20.0)
    return section, item


def test_scores_import_applies_good_rows(service):
    section, item = _scored_class(service)
    text = "\n".join([
        "student_id,item_id,raw_score",
        f"s000,{item.item_id},18",
        f"s001,{item.item_id},21",       # above max
        f"s999,{item.item_id},10",       # not enrolled
        f"s002,bogus-item,10",           # unknown item
        f"s002,{item.item_id},abc",      # not a number
        f"s002,{item.item_id},20",
    ]) + "\n"
    result = service.import_scores_csv(None, section.class_id, text)
    assert result.applied == 2
    assert [r.line for r in result.rejected] == [3, 4, 5, 6]
    state = service.snapshot()
    entries = {(e.student_id, e.item_id): e.raw_score
               for e in state.scores.values()}
    assert entries == {("s000", item.item_id): 18.0,
                       ("s002", item.item_id): 20.0}


def test_scores_import_bad_header(service):
    section, item = _scored_class(service)
    with pytest.raises(errors.BadHeader):
        service.import_scores_csv(None, section.class_id,
                                  "sid,item,score\na,b,1\n")


def test_scores_import_later_row_wins(service):
    section, item = _scored_class(service)
    text = "\n".join([
        "student_id,item_id,raw_score",
        f"s000,{item.item_id},10",
        f"s000,{item.item_id},15",
    ]) + "\n"
    result = service.import_scores_csv(None, section.class_id, text)
    assert result.applied == 2
    from gradelens import gradebook
    state = service.snapshot()
    component = state.class_components(section.class_id)[0]
    assert gradebook.component_score(state, "s000",
                                     component.component_id) == 0.75
