"""Report assembly and export.

Single source of the JSON shapes the API serves, so a report fetched over
HTTP is byte-identical to one computed directly from the same snapshot.
Display rounding happens here and only here: attainment scores at 4 decimals,
rates and means at 2, all half-up.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from . import analytics, errors, gradebook
from .analytics import AttainmentRecord, BandScheme, Distribution, Scope
from .canon import canonical_bytes, format_fixed, round_half_up
from .settings import Settings
from .state import State

ATTAINMENT_CSV_HEADER = ["student_id", "outcome_code", "scope", "score",
                         "attained", "evidence_count"]


def _settings(state: State) -> Settings:
    return state.settings or Settings()


def record_doc(record: AttainmentRecord, band: str | None = None) -> dict:
    doc = {
        "student_id": record.student_id,
        "outcome_code": record.outcome_code,
        "scope": record.scope,
        "score": round_half_up(record.score, 4),
        "attained": record.attained,
        "evidence_count": record.evidence_count,
    }
    if band is not None:
        doc["band"] = band
    return doc


def distribution_doc(dist: Distribution) -> dict:
    return {
        "scope": dist.scope,
        "outcome_code": dist.outcome_code,
        "theta": dist.theta,
        "bands": [{"label": label, "count": count} for label, count in dist.bands],
        "total": dist.total,
        "no_evidence_count": dist.no_evidence_count,
    }


def attainment_records(state: State, scope: Scope, outcome_code: str | None,
                       student_id: str | None, theta: float
                       ) -> list[AttainmentRecord]:
    """Every (student, outcome) record with evidence in scope, sorted."""
    sections = analytics.sections_in_scope(state, scope)
    students = sorted({sid for s in sections for sid in s.roster})
    if student_id is not None:
        state.user(student_id)
        students = [s for s in students if s == student_id] or [student_id]
    if outcome_code is not None:
        codes = [outcome_code]
    else:
        codes = sorted({o.outcome_code for o in state.outcomes.values()})
    records = []
    for sid in students:
        for code in codes:
            try:
                records.append(analytics.student_outcome_attainment(
                    state, sid, code, scope, theta))
            except errors.NoEvidence:
                continue
    return records


def attainment_report(state: State, scope: Scope,
                      outcome_code: str | None = None,
                      student_id: str | None = None,
                      theta: float | None = None) -> dict:
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    records = attainment_records(state, scope, outcome_code, student_id, theta)
    return {
        "scope": scope.descriptor(),
        "theta": theta,
        "records": [record_doc(r) for r in records],
    }


def student_attainment_report(state: State, student_id: str,
                              theta: float | None = None) -> dict:
    """Per-outcome attainment with band labels: the student feedback view."""
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    scheme = cfg.band_scheme
    state.user(student_id)
    scope = Scope()
    records = attainment_records(state, scope, None, student_id, theta)
    return {
        "student_id": student_id,
        "theta": theta,
        "records": [record_doc(r, band=scheme.band_of(r.score)) for r in records],
    }


def distribution_report(state: State, scope: Scope, outcome_code: str,
                        theta: float | None = None,
                        scheme: BandScheme | None = None) -> dict:
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    scheme = scheme or cfg.band_scheme
    dist = analytics.distribution(state, scope, outcome_code, scheme, theta)
    return distribution_doc(dist)


def class_attainment_report(state: State, class_id: str, outcome_code: str,
                            theta: float | None = None) -> dict:
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    rate = analytics.class_attainment_rate(state, class_id, outcome_code, theta)
    return {
        "class_id": rate.class_id,
        "outcome_code": rate.outcome_code,
        "theta": rate.theta,
        "rate": round_half_up(rate.rate, 2),
        "attained_count": rate.attained_count,
        "evaluated_count": rate.evaluated_count,
        "no_evidence_count": rate.no_evidence_count,
    }


def rollup_report(state: State, curriculum_version: str,
                  terms: tuple[str, ...] = (),
                  theta: float | None = None) -> dict:
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    entries = analytics.program_rollup(state, curriculum_version, terms, theta,
                                       cfg.band_scheme)
    outcome_docs = []
    for entry in entries:
        doc = {
            "outcome_code": entry.outcome_code,
            "graduate_attribute": entry.graduate_attribute,
            "active": entry.active,
            "no_evidence": entry.no_evidence,
            "rate": None if entry.rate is None else round_half_up(entry.rate, 2),
            "attained_count": entry.attained_count,
            "record_count": entry.record_count,
            "distribution": (None if entry.distribution is None
                             else distribution_doc(entry.distribution)),
        }
        outcome_docs.append(doc)
    return {
        "curriculum_version": curriculum_version,
        "terms": list(terms),
        "theta": theta,
        "outcomes": outcome_docs,
    }


def trend_report(state: State, outcome_code: str, curriculum_version: str,
                 ordered_terms: tuple[str, ...],
                 theta: float | None = None) -> dict:
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    points = analytics.term_trend(state, outcome_code, curriculum_version,
                                  ordered_terms, theta)
    return {
        "outcome_code": outcome_code,
        "curriculum_version": curriculum_version,
        "theta": theta,
        "series": [{
            "term": p.term,
            "no_evidence": p.no_evidence,
            "rate": None if p.rate is None else round_half_up(p.rate, 2),
            "attained_count": p.attained_count,
            "record_count": p.record_count,
        } for p in points],
    }


def skills_summary_report(state: State, class_id: str) -> dict:
    summaries = analytics.skills_summary(state, class_id)
    return {
        "class_id": class_id,
        "skills": [{
            "skill_id": s.skill_id,
            "name": s.name,
            "mean_score": s.mean_score,
            "count": s.count,
        } for s in summaries],
    }


def gradebook_report(state: State, class_id: str,
                     student_filter: str | None = None) -> dict:
    """Gradebook JSON shape: structure, effective scores and the summary.

    With student_filter set (the student self-view) only that student's rows
    appear and class aggregates are withheld.
    """
    from .state import effective_scores

    cfg = _settings(state)
    section = state.section(class_id)
    components = state.class_components(class_id)
    items = [item for c in components for item in state.component_items(c.component_id)]
    item_ids = {i.item_id for i in items}
    normalized = gradebook.weights_normalized(state, class_id)

    students = sorted(section.roster)
    if student_filter is not None:
        students = [s for s in students if s == student_filter]

    entries = [
        {"student_id": e.student_id, "item_id": e.item_id,
         "raw_score": e.raw_score, "recorded_at": e.recorded_at}
        for e in sorted(effective_scores(state, item_ids=item_ids),
                        key=lambda e: (e.student_id, e.item_id))
        if e.student_id in set(students)
    ]

    graded_docs = []
    incomplete_docs = []
    mean = None
    if normalized:
        for sid in students:
            try:
                percent = gradebook.final_percent(state, sid, class_id)
            except errors.IncompleteComponents as exc:
                incomplete_docs.append({"student_id": sid, "missing": exc.missing})
                continue
            graded_docs.append({
                "student_id": sid,
                "final_percent": percent,
                "grade": gradebook.transmute_grade(percent, cfg.grade_scale),
            })
        if student_filter is None and graded_docs:
            summary = gradebook.class_grade_summary(state, class_id, cfg.grade_scale)
            mean = summary.mean_percent

    doc = {
        "class_id": class_id,
        "course_code": section.course_code,
        "term": section.term,
        "weights_normalized": normalized,
        "components": [{
            "component_id": c.component_id, "name": c.name, "weight": c.weight,
        } for c in components],
        "items": [{
            "item_id": i.item_id, "component_id": i.component_id,
            "title": i.title, "max_points": i.max_points,
        } for i in sorted(items, key=lambda i: i.item_id)],
        "scores": entries,
        "graded": graded_docs,
        "incomplete": incomplete_docs,
    }
    if student_filter is None:
        doc["mean_percent"] = mean
        doc["roster"] = sorted(section.roster)
    return doc


def attainment_csv(records: list[AttainmentRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(ATTAINMENT_CSV_HEADER)
    for r in sorted(records, key=lambda r: (r.student_id, r.outcome_code)):
        writer.writerow([
            r.student_id,
            r.outcome_code,
            r.scope,
            format_fixed(r.score, 4),
            "true" if r.attained else "false",
            r.evidence_count,
        ])
    return buffer.getvalue()


@dataclass(frozen=True)
class Report:
    json_doc: dict
    csv_text: str | None = None


def analytics_export(state: State, scope: Scope,
                     outcome_code: str | None = None,
                     theta: float | None = None) -> Report:
    cfg = _settings(state)
    theta = cfg.attainment_threshold if theta is None else theta
    records = attainment_records(state, scope, outcome_code, None, theta)
    return Report(
        json_doc={
            "scope": scope.descriptor(),
            "theta": theta,
            "records": [record_doc(r) for r in records],
        },
        csv_text=attainment_csv(records),
    )


def export_report(report: Report, fmt: str, destination: str | Path) -> int:
    """Write a report canonically; identical snapshots yield identical bytes."""
    if fmt == "json":
        payload = canonical_bytes(report.json_doc)
    elif fmt == "csv":
        if report.csv_text is None:
            raise errors.ValidationError("report has no CSV form")
        payload = report.csv_text.encode("utf-8")
    else:
        raise errors.ValidationError(f"unknown export format {fmt!r}")
    try:
        with open(destination, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise errors.IoFailure(f"cannot write {destination}: {exc}")
    return len(payload)
