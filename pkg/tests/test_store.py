"""Journaled store: durability, replay, isolation, conflicts, corruption."""

import json
import threading

import pytest

from gradelens import errors, models
from gradelens.canon import canonical_bytes
from gradelens.models import Course
from gradelens.seed import seed_demo
from gradelens.service import Service
from gradelens.settings import Settings
from gradelens.state import ChangeSet
from gradelens.store import JOURNAL_FILE, META_FILE, SNAPSHOT_FILE, open_store, state_doc


def _state_bytes(store) -> bytes:
    return canonical_bytes(state_doc(store.snapshot()))


def _course_change(state, code: str) -> ChangeSet:
    changes = ChangeSet(based_on=state.seq)
    changes.put(models.COURSES, code, Course(course_code=code, title=f"T {code}",
                                             units=3.0))
    return changes


def test_fresh_directory_empty_store_default_settings(tmp_path):
    store = open_store(tmp_path / "data")
    state = store.snapshot()
    assert state.seq == 0
    assert state.users == {}
    assert state.settings == Settings()
    store.close()


def test_reopen_after_clean_close_identical(tmp_path):
    store = open_store(tmp_path / "data")
    for i in range(5):
        store.commit(_course_change(store.snapshot(), f"C{i}"))
    before = _state_bytes(store)
    store.close()
    store2 = open_store(tmp_path / "data")
    assert _state_bytes(store2) == before
    store2.close()


def test_commit_visible_to_next_snapshot(tmp_path):
    store = open_store(tmp_path / "data")
    old = store.snapshot()
    store.commit(_course_change(old, "CS101"))
    assert "CS101" in store.snapshot().courses
    store.close()


def test_snapshot_isolation(tmp_path):
    store = open_store(tmp_path / "data")
    snap = store.snapshot()
    store.commit(_course_change(snap, "CS101"))
    assert "CS101" not in snap.courses  # old view unchanged
    assert "CS101" in store.snapshot().courses
    store.close()


def test_two_snapshots_no_commit_identical(tmp_path):
    store = open_store(tmp_path / "data")
    assert store.snapshot() is store.snapshot()
    store.close()


def test_validation_failed_leaves_state_unchanged(tmp_path):
    store = open_store(tmp_path / "data")
    state = store.snapshot()
    changes = ChangeSet(based_on=state.seq)
    changes.put(models.SECTIONS, "cls-0001", models.ClassSection(
        class_id="cls-0001", course_code="NOPE", term="2024-1",
        instructor_id="u-0001"))
    before = _state_bytes(store)
    with pytest.raises(errors.ValidationFailed):
        store.commit(changes)
    assert _state_bytes(store) == before
    assert store.snapshot().seq == 0
    store.close()


def test_conflict_detected_on_same_entity(tmp_path):
    store = open_store(tmp_path / "data")
    base = store.snapshot()
    store.commit(_course_change(base, "CS101"))
    stale = ChangeSet(based_on=base.seq)
    stale.put(models.COURSES, "CS101",
              Course(course_code="CS101", title="Stale", units=1.0))
    with pytest.raises(errors.ConflictDetected):
        store.commit(stale)
    # disjoint entities from the same stale snapshot commit fine
    store.commit(_course_change(base, "CS102"))
    store.close()


def test_rubric_immutability_enforced_at_commit(tmp_path):
    store = open_store(tmp_path / "data")
    service = Service(store)
    service.upsert_program_outcome(None, "PO-A", "attr", "2023")
    from gradelens.models import Criterion, OutcomeMapping, Rubric
    criterion = Criterion(criterion_id="c1", description="x", weight=1.0,
                          mappings=(OutcomeMapping("PO-A", 1.0),))
    rubric = service.define_rubric(None, "Project", (criterion,))
    tampered = Rubric(rubric_id=rubric.rubric_id, title="Project v2",
                      criteria=rubric.criteria)
    changes = ChangeSet(based_on=store.snapshot().seq)
    changes.put(models.RUBRICS, rubric.rubric_id, tampered)
    with pytest.raises(errors.ValidationFailed):
        store.commit(changes)
    store.close()


def test_thousand_commits_replay_equal(tmp_path):
    store = open_store(tmp_path / "data")
    for i in range(1000):
        store.commit(_course_change(store.snapshot(), f"C{i:04d}"))
    before = _state_bytes(store)
    store.close()
    store2 = open_store(tmp_path / "data")
    assert _state_bytes(store2) == before
    assert store2.snapshot().seq == 1000
    store2.close()


def test_checkpoint_then_reopen(tmp_path):
    store = open_store(tmp_path / "data")
    for i in range(10):
        store.commit(_course_change(store.snapshot(), f"C{i}"))
    store.checkpoint()
    store.commit(_course_change(store.snapshot(), "AFTER"))
    before = _state_bytes(store)
    store.close()
    assert (tmp_path / "data" / SNAPSHOT_FILE).exists()
    store2 = open_store(tmp_path / "data")
    assert _state_bytes(store2) == before
    store2.close()


def test_truncated_tail_is_crash_residue(tmp_path):
    store = open_store(tmp_path / "data")
    store.commit(_course_change(store.snapshot(), "CS101"))
    store.commit(_course_change(store.snapshot(), "CS102"))
    store.close()
    journal = tmp_path / "data" / JOURNAL_FILE
    data = journal.read_bytes()
    journal.write_bytes(data[:-3])  # cut inside the last record
    store2 = open_store(tmp_path / "data")
    assert "CS101" in store2.snapshot().courses
    assert "CS102" not in store2.snapshot().courses
    store2.close()


def test_corrupt_complete_record_refuses_open(tmp_path):
    store = open_store(tmp_path / "data")
    store.commit(_course_change(store.snapshot(), "CS101"))
    store.close()
    journal = tmp_path / "data" / JOURNAL_FILE
    data = bytearray(journal.read_bytes())
    data[20] ^= 0xFF  # flip a payload byte, line stays complete
    journal.write_bytes(bytes(data))
    with pytest.raises(errors.CorruptJournal) as excinfo:
        open_store(tmp_path / "data")
    assert "record 1" in str(excinfo.value)


def test_incompatible_schema_version(tmp_path):
    store = open_store(tmp_path / "data")
    store.close()
    meta = tmp_path / "data" / META_FILE
    meta.write_text(json.dumps({"schema_version": 999}), encoding="utf-8")
    with pytest.raises(errors.IncompatibleSchemaVersion):
        open_store(tmp_path / "data")


def test_crash_truncation_every_offset_small(tmp_path):
    """Exhaustive prefix truncation over a 10-commit journal (the full
    50-commit sweep runs in the acceptance suite)."""
    workdir = tmp_path / "data"
    store = open_store(workdir)
    expected = {0: _state_bytes(store)}
    for i in range(10):
        store.commit(_course_change(store.snapshot(), f"C{i}"))
        expected[i + 1] = _state_bytes(store)
    store.close()
    journal_bytes = (workdir / JOURNAL_FILE).read_bytes()
    crash_dir = tmp_path / "crash"
    crash_dir.mkdir()
    (crash_dir / META_FILE).write_bytes((workdir / META_FILE).read_bytes())
    for offset in range(len(journal_bytes) + 1):
        prefix = journal_bytes[:offset]
        (crash_dir / JOURNAL_FILE).write_bytes(prefix)
        replayed = open_store(crash_dir)
        k = prefix.count(b"\n")
        assert _state_bytes(replayed) == expected[k], f"offset {offset}"
        replayed.close()


def test_concurrent_commits_with_snapshot_reads(tmp_path):
    """Analytics over a snapshot stay internally consistent while commits run."""
    store = open_store(tmp_path / "data")
    service = Service(store)
    ids = seed_demo(store)
    from gradelens import analytics
    from gradelens.analytics import Scope

    stop = threading.Event()
    failures = []

    def writer():
        i = 0
        while not stop.is_set() and i < 100:
            service.create_course(None, f"X{i:03d}", "Concurrent", 1.0)
            i += 1

    def reader():
        while not stop.is_set():
            state = store.snapshot()
            try:
                dist = analytics.distribution(
                    state, Scope(class_id=ids["classes"][0]), "PO-B")
                evaluated = sum(count for _, count in dist.bands)
                if evaluated != dist.total:
                    failures.append("count conservation broke")
                roster = len(state.section(ids["classes"][0]).roster)
                if dist.total + dist.no_evidence_count != roster:
                    failures.append("roster partition broke")
            except errors.GradelensError as exc:
                failures.append(f"unexpected {exc.code}")

    threads = [threading.Thread(target=writer)] + \
        [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    threads[0].join()
    stop.set()
    for t in threads[1:]:
        t.join()
    assert failures == []
    assert len([c for c in store.snapshot().courses if c.startswith("X")]) == 100
    store.close()


def test_settings_commit_roundtrip(tmp_path):
    store = open_store(tmp_path / "data")
    service = Service(store)
    service.update_settings(None, {"attainment_threshold": 0.75})
    store.close()
    store2 = open_store(tmp_path / "data")
    assert store2.snapshot().settings.attainment_threshold == 0.75
    store2.close()


def test_bad_settings_rejected(tmp_path):
    store = open_store(tmp_path / "data")
    service = Service(store)
    with pytest.raises(errors.BadSettings):
        service.update_settings(None, {"attainment_threshold": 1.5})
    with pytest.raises(errors.BadSettings):
        service.update_settings(None, {"unknown_key": 1})
    store.close()
