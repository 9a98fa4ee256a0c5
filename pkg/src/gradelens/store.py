"""Embedded journaled store: append-only commit log + optional snapshot file.

Commit protocol: validate the change set against current state, append one
checksummed journal record, flush and fsync it, and only then swap the
in-memory state reference. Opening replays the journal over the last
snapshot; a truncated final record (no trailing newline, or shorter than its
own framing) is crash residue and is dropped, while a complete record that
fails its checksum or does not parse is corruption and refuses the open.

Reads take snapshots (immutable State references); writes are serialized
under a single lock with optimistic conflict detection keyed on the entities
a change set touches.
"""

from __future__ import annotations

import json
import os
import threading
import zlib
from pathlib import Path

from . import errors, models
from .canon import canonical_bytes, canonical_json
from .settings import Settings
from .state import COLLECTION_ATTRS, ENTITY_TYPES, ChangeSet, State, apply_changes

SCHEMA_VERSION = 1
META_FILE = "meta.json"
SNAPSHOT_FILE = "snapshot.json"
JOURNAL_FILE = "journal.log"


def _entity_doc(collection: str, entity) -> object:
    if collection == models.SETTINGS:
        return entity.to_doc()
    if collection == models.COUNTERS:
        return int(entity)
    return entity.to_doc()


def _entity_from_doc(collection: str, doc):
    if collection == models.SETTINGS:
        return Settings.from_doc(doc)
    if collection == models.COUNTERS:
        return int(doc)
    return ENTITY_TYPES[collection].from_doc(doc)


def state_doc(state: State) -> dict:
    """Full-state canonical document; used by snapshots and state comparison."""
    doc: dict = {"seq": state.seq, "collections": {}}
    for collection, attr in COLLECTION_ATTRS.items():
        doc["collections"][collection] = {
            key: entity.to_doc()
            for key, entity in sorted(getattr(state, attr).items())}
    doc["settings"] = state.settings.to_doc() if state.settings else None
    doc["counters"] = dict(sorted(state.counters.items()))
    return doc


def _state_from_doc(doc: dict) -> State:
    collections = doc.get("collections", {})
    kwargs = {}
    for collection, attr in COLLECTION_ATTRS.items():
        entries = collections.get(collection, {})
        kwargs[attr] = {key: ENTITY_TYPES[collection].from_doc(entity_doc)
                        for key, entity_doc in entries.items()}
    settings_doc = doc.get("settings")
    return State(
        seq=int(doc["seq"]),
        settings=Settings.from_doc(settings_doc) if settings_doc else None,
        counters={k: int(v) for k, v in doc.get("counters", {}).items()},
        **kwargs,
    )


def _journal_line(seq: int, puts: list[tuple[str, str, object]]) -> bytes:
    payload = canonical_json({
        "seq": seq,
        "puts": [{"c": c, "k": k, "v": v} for c, k, v in puts],
    }).encode("utf-8")
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    return f"{crc:08x} ".encode("ascii") + payload + b"\n"


def _parse_journal(data: bytes) -> list[dict]:
    """Complete, checksum-valid records; raises CorruptJournal on a complete
    record that fails verification. A partial trailing record is ignored."""
    records = []
    line_no = 0
    for raw in data.split(b"\n")[:-1]:  # only newline-terminated lines
        line_no += 1
        if len(raw) < 9 or raw[8:9] != b" ":
            raise errors.CorruptJournal(
                f"journal record {line_no}: malformed framing")
        crc_text, payload = raw[:8], raw[9:]
        try:
            expected = int(crc_text, 16)
        except ValueError:
            raise errors.CorruptJournal(
                f"journal record {line_no}: bad checksum field")
        if zlib.crc32(payload) & 0xFFFFFFFF != expected:
            raise errors.CorruptJournal(
                f"journal record {line_no}: checksum mismatch")
        try:
            record = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise errors.CorruptJournal(
                f"journal record {line_no}: invalid JSON ({exc})")
        records.append(record)
    return records


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _validate_puts(new_state: State, old_state: State,
                   changes: ChangeSet) -> None:
    """Commit-time authority: entity invariants + referential integrity of
    every changed entity against the post-change state."""
    for put in changes.puts:
        entity = put.entity
        c = put.collection
        try:
            if c == models.SETTINGS:
                entity.validate()
            elif c == models.COUNTERS:
                if not isinstance(entity, int) or entity < 0:
                    raise errors.ValidationError("counter must be a non-negative int")
            elif c == models.USERS:
                entity.validate()
            elif c == models.OUTCOMES:
                entity.validate()
            elif c == models.COURSES:
                entity.validate()
            elif c == models.SECTIONS:
                entity.validate()
                new_state.course(entity.course_code)
                instructor = new_state.user(entity.instructor_id)
                if instructor.role != models.Role.INSTRUCTOR:
                    raise errors.NotAnInstructor(
                        f"{entity.instructor_id} is not an instructor")
                for sid in entity.roster:
                    if new_state.user(sid).role != models.Role.STUDENT:
                        raise errors.NotAStudent(f"{sid} is not a student")
            elif c == models.RUBRICS:
                entity.validate()
                held = old_state.rubrics.get(put.key)
                if held is not None and held.to_doc() != entity.to_doc():
                    raise errors.ValidationError(
                        f"rubric {put.key} is immutable; create a new rubric")
                for criterion in entity.criteria:
                    for mapping in criterion.mappings:
                        if not new_state.outcome_versions(mapping.outcome_code):
                            raise errors.UnknownOutcome(
                                f"no outcome {mapping.outcome_code}")
            elif c == models.SKILLS:
                entity.validate()
                new_state.course(entity.course_code)
                for other in new_state.skills.values():
                    if (other.skill_id != entity.skill_id
                            and other.name == entity.name
                            and other.course_code == entity.course_code):
                        raise errors.DuplicateSkill(
                            f"skill {entity.name!r} already exists in {entity.course_code}")
            elif c == models.RATINGS:
                entity.validate()
                skill = new_state.skill(entity.skill_id)
                section = new_state.section(entity.class_id)
                new_state.user(entity.student_id)
                if entity.student_id not in section.roster:
                    raise errors.NotEnrolled(
                        f"{entity.student_id} not in {entity.class_id} roster")
                if skill.course_code != section.course_code:
                    raise errors.ValidationError(
                        f"skill {skill.skill_id} belongs to {skill.course_code}, "
                        f"not {section.course_code}")
            elif c == models.COMPONENTS:
                entity.validate()
                new_state.section(entity.class_id)
            elif c == models.ITEMS:
                entity.validate()
                new_state.component(entity.component_id)
            elif c == models.SCORES:
                entity.validate()
                item = new_state.item(entity.item_id)
                component = new_state.component(item.component_id)
                section = new_state.section(component.class_id)
                if entity.student_id not in section.roster:
                    raise errors.NotEnrolled(
                        f"{entity.student_id} not in {component.class_id} roster")
                if entity.raw_score > item.max_points:
                    raise errors.OutOfRange(
                        f"raw_score {entity.raw_score} exceeds max {item.max_points}")
            elif c == models.EVALUATIONS:
                section = new_state.section(entity.class_id)
                rubric = new_state.rubric(entity.rubric_id)
                new_state.user(entity.evaluator_id)
                if entity.student_id not in section.roster:
                    raise errors.NotEnrolled(
                        f"{entity.student_id} not in {entity.class_id} roster")
                entity.validate_against(rubric)
            else:
                raise errors.ValidationError(f"unknown collection {c!r}")
        except errors.GradelensError as exc:
            raise errors.ValidationFailed(
                f"{c}/{put.key}: {exc.message}", cause=exc.code)


class Store:
    """Single-writer, multi-reader store over one data directory."""

    def __init__(self, path: Path, state: State,
                 last_modified: dict[tuple[str, str], int]):
        self._path = path
        self._state = state
        self._floor_seq = state.seq
        self._last_modified = last_modified
        self._lock = threading.Lock()
        self._journal = open(path / JOURNAL_FILE, "ab")
        self._closed = False

    @property
    def path(self) -> Path:
        return self._path

    def snapshot(self) -> State:
        return self._state

    def commit(self, changes: ChangeSet) -> int:
        if self._closed:
            raise errors.IoFailure("store is closed")
        with self._lock:
            current = self._state
            for key in changes.touched_keys():
                if self._last_modified.get(key, self._floor_seq) > changes.based_on:
                    raise errors.ConflictDetected(
                        f"{key[0]}/{key[1]} changed after snapshot {changes.based_on}")
            new_seq = current.seq + 1
            tentative = apply_changes(current, changes, new_seq)
            _validate_puts(tentative, current, changes)
            line = _journal_line(new_seq, [
                (p.collection, p.key, _entity_doc(p.collection, p.entity))
                for p in changes.puts])
            try:
                self._journal.write(line)
                self._journal.flush()
                os.fsync(self._journal.fileno())
            except OSError as exc:
                raise errors.IoFailure(f"journal append failed: {exc}")
            self._state = tentative
            for key in changes.touched_keys():
                self._last_modified[key] = new_seq
            return new_seq

    def checkpoint(self) -> None:
        """Fold the journal into the snapshot file and start a fresh journal."""
        with self._lock:
            _atomic_write(self._path / SNAPSHOT_FILE,
                          canonical_bytes(state_doc(self._state)))
            self._journal.close()
            with open(self._path / JOURNAL_FILE, "wb") as fh:
                fh.flush()
                os.fsync(fh.fileno())
            self._journal = open(self._path / JOURNAL_FILE, "ab")

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._journal.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def open_store(path: str | Path, *, initial_settings: Settings | None = None) -> Store:
    """Open (or create) a store directory and replay its journal.

    After any crash this yields exactly the state of the last fully
    journaled commit.
    """
    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise errors.IoFailure(f"cannot create data dir {root}: {exc}")

    meta_path = root / META_FILE
    if meta_path.exists():
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise errors.IoFailure(f"cannot read {meta_path}: {exc}")
        if meta.get("schema_version") != SCHEMA_VERSION:
            raise errors.IncompatibleSchemaVersion(
                f"store schema {meta.get('schema_version')!r}, "
                f"this build reads {SCHEMA_VERSION}")
    else:
        _atomic_write(meta_path, canonical_bytes({"schema_version": SCHEMA_VERSION}))

    snapshot_path = root / SNAPSHOT_FILE
    if snapshot_path.exists():
        try:
            snap_doc = json.loads(snapshot_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise errors.IoFailure(f"cannot read snapshot: {exc}")
        state = _state_from_doc(snap_doc)
    else:
        state = State(seq=0)

    journal_path = root / JOURNAL_FILE
    last_modified: dict[tuple[str, str], int] = {}
    if journal_path.exists():
        data = journal_path.read_bytes()
        for record in _parse_journal(data):
            seq = int(record["seq"])
            if seq <= state.seq:
                continue  # already folded into the snapshot
            changes = ChangeSet(based_on=state.seq)
            for put in record["puts"]:
                changes.put(put["c"], put["k"],
                            _entity_from_doc(put["c"], put["v"]))
            state = apply_changes(state, changes, seq)
            for key in changes.touched_keys():
                last_modified[key] = seq

    if state.settings is None:
        settings = initial_settings or Settings()
        settings.validate()
        state = apply_changes(
            state, _settings_change(state, settings), state.seq)

    return Store(root, state, last_modified)


def _settings_change(state: State, settings: Settings) -> ChangeSet:
    changes = ChangeSet(based_on=state.seq)
    changes.put(models.SETTINGS, "settings", settings)
    return changes
