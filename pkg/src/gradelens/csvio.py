"""CSV ingestion: class roster imports and raw score imports.

Both run as a single atomic commit of the accepted rows; rejected rows are
reported with their 1-based line numbers (header is line 1) and a reason,
and never block the good rows. A wrong header rejects the whole file.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

from . import errors
from .models import (
    COUNTERS,
    SCORES,
    SECTIONS,
    USERS,
    Role,
    ScoreEntry,
    UserAccount,
    iso_utc,
)
from .state import ChangeSet, State

ROSTER_HEADER = ["student_id", "last_name", "first_name", "email"]
SCORES_HEADER = ["student_id", "item_id", "raw_score"]


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str

    def to_doc(self) -> dict:
        return {"line": self.line, "reason": self.reason}


@dataclass(frozen=True)
class ImportResult:
    applied: int
    rejected: tuple[RejectedRow, ...]
    changes: ChangeSet


def _read_rows(text: str, expected_header: list[str]) -> list[tuple[int, list[str]]]:
    if not text.strip():
        raise errors.EmptyFile("no rows to import")
    reader = csv.reader(io.StringIO(text))
    rows = [(i + 1, row) for i, row in enumerate(reader) if row]
    if not rows:
        raise errors.EmptyFile("no rows to import")
    header_line, header = rows[0]
    if [h.strip() for h in header] != expected_header:
        raise errors.BadHeader(
            f"line {header_line}: expected header {','.join(expected_header)!r}")
    data = rows[1:]
    if not data:
        raise errors.EmptyFile("header only, no data rows")
    return data


def import_roster_csv(state: State, class_id: str, text: str) -> ImportResult:
    """Enroll students from a roster file, creating missing Student accounts
    with an unset credential (a department head must set one)."""
    section = state.section(class_id)
    data = _read_rows(text, ROSTER_HEADER)

    changes = ChangeSet(based_on=state.seq)
    rejected: list[RejectedRow] = []
    seen_ids: set[str] = set()
    roster = set(section.roster)
    enrolled = 0

    for line, row in data:
        if len(row) != len(ROSTER_HEADER):
            rejected.append(RejectedRow(line, f"expected {len(ROSTER_HEADER)} fields, got {len(row)}"))
            continue
        student_id, last_name, first_name, email = (f.strip() for f in row)
        if not student_id:
            rejected.append(RejectedRow(line, "empty student_id"))
            continue
        if student_id in seen_ids:
            rejected.append(RejectedRow(line, f"duplicate student_id {student_id} in file"))
            continue
        seen_ids.add(student_id)
        if not last_name:
            rejected.append(RejectedRow(line, "empty last_name"))
            continue
        if "@" not in email:
            rejected.append(RejectedRow(line, f"invalid email {email!r}"))
            continue
        existing = state.users.get(student_id)
        if existing is not None and existing.role != Role.STUDENT:
            rejected.append(RejectedRow(
                line, f"{student_id} exists with role {existing.role.value}"))
            continue
        if student_id in roster:
            rejected.append(RejectedRow(line, f"{student_id} already enrolled"))
            continue
        if existing is None:
            display = f"{last_name}, {first_name}" if first_name else last_name
            account = UserAccount(user_id=student_id, display_name=display,
                                  role=Role.STUDENT, credential=None, active=True)
            changes.put(USERS, student_id, account)
        roster.add(student_id)
        enrolled += 1

    if enrolled:
        updated = replace(section, roster=tuple(sorted(roster)))
        changes.put(SECTIONS, class_id, updated)
    return ImportResult(applied=enrolled, rejected=tuple(rejected), changes=changes)


def import_scores_csv(state: State, class_id: str, text: str,
                      recorded_at_epoch: float) -> ImportResult:
    """Record raw scores for items belonging to the class's components."""
    section = state.section(class_id)
    data = _read_rows(text, SCORES_HEADER)

    class_items = {
        item.item_id: item
        for component in state.class_components(class_id)
        for item in state.component_items(component.component_id)
    }
    changes = ChangeSet(based_on=state.seq)
    rejected: list[RejectedRow] = []
    applied = 0
    counter = state.counters.get("score", 0)
    stamp = iso_utc(recorded_at_epoch)

    for line, row in data:
        if len(row) != len(SCORES_HEADER):
            rejected.append(RejectedRow(line, f"expected {len(SCORES_HEADER)} fields, got {len(row)}"))
            continue
        student_id, item_id, raw_text = (f.strip() for f in row)
        item = class_items.get(item_id)
        if item is None:
            rejected.append(RejectedRow(line, f"item {item_id} not in class {class_id}"))
            continue
        if student_id not in section.roster:
            rejected.append(RejectedRow(line, f"{student_id} not enrolled"))
            continue
        try:
            raw_score = float(raw_text)
        except ValueError:
            rejected.append(RejectedRow(line, f"raw_score {raw_text!r} is not a number"))
            continue
        if not 0 <= raw_score <= item.max_points:
            rejected.append(RejectedRow(
                line, f"raw_score {raw_score} outside [0, {item.max_points}]"))
            continue
        counter += 1
        score_id = f"sc-{counter:06d}"
        changes.put(SCORES, score_id, ScoreEntry(
            score_id=score_id, student_id=student_id, item_id=item_id,
            raw_score=raw_score, recorded_at=stamp))
        applied += 1

    if applied:
        changes.put(COUNTERS, "score", counter)
    return ImportResult(applied=applied, rejected=tuple(rejected), changes=changes)
