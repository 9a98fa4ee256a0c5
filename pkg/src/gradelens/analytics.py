"""Outcome-attainment analytics: level normalization, weighted means, banding,
distributions, program rollups and term trends.

All aggregation happens in exact rational arithmetic (fractions.Fraction over
the stored float inputs) and converts to float only at the record boundary.
That keeps scores independent of summation order and makes scaling every
weight by a common positive factor a true no-op, which the invariant suite
pins down.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import errors
from .models import ClassSection, EvaluationRecord
from .state import State

DEFAULT_THETA = 0.70


# --- band schemes ------------------------------------------------------------

@dataclass(frozen=True)
class Band:
    label: str
    lower_bound: float


@dataclass(frozen=True)
class BandScheme:
    """Ordered lower-bound-inclusive partition of [lo, hi] into labeled bands."""
    lo: float
    hi: float
    bands: tuple[Band, ...]  # descending lower bounds

    def validate(self) -> None:
        if self.hi <= self.lo:
            raise errors.InvalidBandScheme("domain must satisfy lo < hi")
        if not self.bands:
            raise errors.InvalidBandScheme("at least one band required")
        bounds = [b.lower_bound for b in self.bands]
        if any(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise errors.InvalidBandScheme("lower bounds must be strictly decreasing")
        if bounds[-1] != self.lo:
            raise errors.InvalidBandScheme("lowest band must start at the domain floor")
        if bounds[0] > self.hi:
            raise errors.InvalidBandScheme("top band starts above the domain ceiling")
        labels = [b.label for b in self.bands]
        if len(set(labels)) != len(labels) or any(not l.strip() for l in labels):
            raise errors.InvalidBandScheme("band labels must be unique and non-empty")

    def labels(self) -> list[str]:
        return [b.label for b in self.bands]

    def band_of(self, score: float) -> str:
        if not self.lo <= score <= self.hi:
            raise errors.OutOfDomain(
                f"score {score} outside [{self.lo}, {self.hi}]")
        for band in self.bands:
            if score >= band.lower_bound:
                return band.label
        raise errors.OutOfDomain(f"score {score} below every band")  # unreachable

    def band_index(self, score: float) -> int:
        label = self.band_of(score)
        return self.labels().index(label)

    def to_doc(self) -> dict:
        return {"lo": float(self.lo), "hi": float(self.hi),
                "bands": [{"label": b.label, "lower_bound": float(b.lower_bound)}
                          for b in self.bands]}

    @classmethod
    def from_doc(cls, doc: dict) -> "BandScheme":
        scheme = cls(
            lo=float(doc["lo"]), hi=float(doc["hi"]),
            bands=tuple(Band(label=b["label"], lower_bound=float(b["lower_bound"]))
                        for b in doc["bands"]))
        scheme.validate()
        return scheme


DEFAULT_ATTAINMENT_BANDS = BandScheme(
    lo=0.0, hi=1.0,
    bands=(
        Band("Exemplary", 0.85),
        Band("Satisfactory", 0.70),
        Band("Developing", 0.50),
        Band("Beginning", 0.0),
    ),
)

# Likert interpretation scheme on [1, 5]: half-step boundaries.
LIKERT5_BANDS = BandScheme(
    lo=1.0, hi=5.0,
    bands=(
        Band("Highly Acceptable", 4.50),
        Band("Acceptable", 3.50),
        Band("Moderately Acceptable", 2.50),
        Band("Slightly Acceptable", 1.50),
        Band("Not Acceptable", 1.00),
    ),
)


def band_of(score: float, scheme: BandScheme) -> str:
    return scheme.band_of(score)


# --- scalar operations --------------------------------------------------------

def normalize_level_exact(level: int, min_level: int, max_level: int) -> Fraction:
    if max_level <= min_level:
        raise errors.DegenerateRange(
            f"level range [{min_level}, {max_level}] is degenerate")
    if not min_level <= level <= max_level:
        raise errors.OutOfRange(
            f"level {level} outside [{min_level}, {max_level}]")
    return Fraction(level - min_level, max_level - min_level)


def normalize_level(level: int, min_level: int, max_level: int) -> float:
    """Map a chosen level onto [0, 1]; the lowest level is zero evidence."""
    return float(normalize_level_exact(level, min_level, max_level))


def weighted_mean(values, weights) -> float:
    if len(values) != len(weights):
        raise errors.LengthMismatch(
            f"{len(values)} values vs {len(weights)} weights")
    if not values:
        raise errors.EmptyInput("weighted_mean of nothing")
    total = Fraction(0)
    mass = Fraction(0)
    for v, w in zip(values, weights):
        if w <= 0:
            raise errors.NonPositiveWeight(f"weight {w} is not positive")
        total += Fraction(v) * Fraction(w)
        mass += Fraction(w)
    return float(total / mass)


# --- scopes --------------------------------------------------------------------

@dataclass(frozen=True)
class Scope:
    """Filter over class sections: one class, a term (or terms), or everything."""
    class_id: str | None = None
    term: str | None = None
    terms: tuple[str, ...] | None = None
    curriculum_version: str | None = None

    def descriptor(self) -> str:
        parts = []
        if self.class_id:
            parts.append(f"class={self.class_id}")
        if self.curriculum_version:
            parts.append(f"curriculum={self.curriculum_version}")
        if self.term:
            parts.append(f"term={self.term}")
        if self.terms:
            parts.append("terms=" + ",".join(self.terms))
        return ";".join(sorted(parts)) if parts else "all"

    @classmethod
    def parse(cls, text: str) -> "Scope":
        text = (text or "").strip()
        if not text or text == "all":
            return cls()
        kwargs: dict = {}
        for part in text.split(";"):
            if "=" not in part:
                raise errors.BadScope(f"expected key=value, got {part!r}")
            key, value = part.split("=", 1)
            key, value = key.strip(), value.strip()
            if not value:
                raise errors.BadScope(f"empty value for {key!r}")
            if key == "class":
                kwargs["class_id"] = value
            elif key == "term":
                kwargs["term"] = value
            elif key == "terms":
                kwargs["terms"] = tuple(t.strip() for t in value.split(",") if t.strip())
            elif key == "curriculum":
                kwargs["curriculum_version"] = value
            else:
                raise errors.BadScope(f"unknown scope key {key!r}")
        return cls(**kwargs)


def sections_in_scope(state: State, scope: Scope) -> list[ClassSection]:
    if scope.class_id is not None:
        return [state.section(scope.class_id)]
    wanted_terms = set(scope.terms or ())
    if scope.term is not None:
        wanted_terms.add(scope.term)
    sections = [s for s in state.sections.values()
                if not wanted_terms or s.term in wanted_terms]
    return sorted(sections, key=lambda s: s.class_id)


# --- attainment -----------------------------------------------------------------

@dataclass(frozen=True)
class AttainmentRecord:
    student_id: str
    outcome_code: str
    scope: str
    score: float  # full precision; display rounding happens at report time
    attained: bool
    evidence_count: int


@dataclass(frozen=True)
class ClassRate:
    class_id: str
    outcome_code: str
    theta: float
    rate: float  # attained / evaluated
    attained_count: int
    evaluated_count: int
    no_evidence_count: int


@dataclass(frozen=True)
class Distribution:
    scope: str
    outcome_code: str
    theta: float
    bands: tuple[tuple[str, int], ...]  # scheme order, zero counts retained
    total: int
    no_evidence_count: int


@dataclass(frozen=True)
class RollupEntry:
    outcome_code: str
    graduate_attribute: str
    active: bool
    no_evidence: bool
    rate: float | None
    attained_count: int
    record_count: int
    distribution: Distribution | None


@dataclass(frozen=True)
class TrendPoint:
    term: str
    no_evidence: bool
    rate: float | None
    attained_count: int
    record_count: int


def _check_theta(theta: float) -> None:
    if not 0 < theta <= 1:
        raise errors.ValidationError(f"theta {theta} outside (0, 1]")


def _contributions(state: State, evaluations: list[EvaluationRecord],
                   outcome_code: str) -> tuple[Fraction, Fraction, int]:
    """Weighted sum, weight mass and contributing-pair count for one outcome."""
    total = Fraction(0)
    mass = Fraction(0)
    pairs = 0
    for ev in evaluations:
        rubric = state.rubric(ev.rubric_id)
        for criterion in rubric.criteria:
            hit = False
            value = None
            for mapping in criterion.mappings:
                if mapping.outcome_code != outcome_code:
                    continue
                if value is None:
                    value = normalize_level_exact(
                        ev.levels[criterion.criterion_id],
                        criterion.min_level, criterion.max_level)
                weight = Fraction(criterion.weight) * Fraction(mapping.map_weight)
                total += weight * value
                mass += weight
                hit = True
            if hit:
                pairs += 1
    return total, mass, pairs


def _scoped_evaluations(state: State, sections: list[ClassSection],
                        student_id: str) -> list[EvaluationRecord]:
    class_ids = {s.class_id for s in sections}
    return sorted((ev for ev in state.evaluations.values()
                   if ev.student_id == student_id and ev.class_id in class_ids),
                  key=lambda ev: ev.evaluation_id)


def _attainment_over(state: State, evaluations: list[EvaluationRecord],
                     student_id: str, outcome_code: str, scope_text: str,
                     theta: float) -> AttainmentRecord | None:
    total, mass, pairs = _contributions(state, evaluations, outcome_code)
    if pairs == 0:
        return None
    score = float(total / mass)
    return AttainmentRecord(
        student_id=student_id,
        outcome_code=outcome_code,
        scope=scope_text,
        score=score,
        attained=score >= theta,
        evidence_count=pairs,
    )


def student_outcome_attainment(state: State, student_id: str, outcome_code: str,
                               scope: Scope, theta: float = DEFAULT_THETA
                               ) -> AttainmentRecord:
    """Weighted mean of normalized levels over every (criterion, evaluation)
    pair in scope that maps onto the outcome; weight = criterion weight x
    mapping weight. Attained iff score >= theta (inclusive)."""
    _check_theta(theta)
    sections = sections_in_scope(state, scope)
    evaluations = _scoped_evaluations(state, sections, student_id)
    record = _attainment_over(state, evaluations, student_id, outcome_code,
                              scope.descriptor(), theta)
    if record is None:
        raise errors.NoEvidence(
            f"no evaluations of {student_id} touch {outcome_code} in scope")
    return record


def class_attainment_rate(state: State, class_id: str, outcome_code: str,
                          theta: float = DEFAULT_THETA) -> ClassRate:
    _check_theta(theta)
    section = state.section(class_id)
    scope = Scope(class_id=class_id)
    attained = evaluated = no_evidence = 0
    for student_id in sorted(section.roster):
        evaluations = _scoped_evaluations(state, [section], student_id)
        record = _attainment_over(state, evaluations, student_id, outcome_code,
                                  scope.descriptor(), theta)
        if record is None:
            no_evidence += 1
            continue
        evaluated += 1
        if record.attained:
            attained += 1
    if evaluated == 0:
        raise errors.NoEvaluatedStudents(
            f"no student in {class_id} has evidence for {outcome_code}")
    return ClassRate(
        class_id=class_id,
        outcome_code=outcome_code,
        theta=theta,
        rate=float(Fraction(attained, evaluated)),
        attained_count=attained,
        evaluated_count=evaluated,
        no_evidence_count=no_evidence,
    )


def _bucket(records: list[AttainmentRecord], scheme: BandScheme,
            scope_text: str, outcome_code: str, theta: float,
            no_evidence_count: int) -> Distribution:
    counts = {label: 0 for label in scheme.labels()}
    for record in records:
        counts[scheme.band_of(record.score)] += 1
    return Distribution(
        scope=scope_text,
        outcome_code=outcome_code,
        theta=theta,
        bands=tuple((label, counts[label]) for label in scheme.labels()),
        total=len(records),
        no_evidence_count=no_evidence_count,
    )


def distribution(state: State, scope: Scope, outcome_code: str,
                 scheme: BandScheme = DEFAULT_ATTAINMENT_BANDS,
                 theta: float = DEFAULT_THETA) -> Distribution:
    """Pie-chart payload: band counts of per-student attainment in scope."""
    _check_theta(theta)
    scheme.validate()
    if (scheme.lo, scheme.hi) != (0.0, 1.0):
        raise errors.OutOfDomain("attainment distributions need a [0, 1] scheme")
    sections = sections_in_scope(state, scope)
    students = sorted({sid for s in sections for sid in s.roster})
    records = []
    no_evidence = 0
    for student_id in students:
        evaluations = _scoped_evaluations(state, sections, student_id)
        record = _attainment_over(state, evaluations, student_id, outcome_code,
                                  scope.descriptor(), theta)
        if record is None:
            no_evidence += 1
        else:
            records.append(record)
    if not records:
        raise errors.NoEvaluatedStudents(
            f"no student has evidence for {outcome_code} in scope")
    return _bucket(records, scheme, scope.descriptor(), outcome_code, theta,
                   no_evidence)


def pooled_records(state: State, sections: list[ClassSection],
                   outcome_code: str, theta: float,
                   scope_text: str) -> tuple[list[AttainmentRecord], int]:
    """One record per (student, class) pair with evidence; a student evaluated
    in k classes contributes k records. Second value counts the pairs without
    evidence."""
    records = []
    no_evidence = 0
    for section in sorted(sections, key=lambda s: s.class_id):
        for student_id in sorted(section.roster):
            evaluations = _scoped_evaluations(state, [section], student_id)
            record = _attainment_over(state, evaluations, student_id,
                                      outcome_code, scope_text, theta)
            if record is None:
                no_evidence += 1
            else:
                records.append(record)
    return records, no_evidence


def program_rollup(state: State, curriculum_version: str,
                   terms: tuple[str, ...] = (),
                   theta: float = DEFAULT_THETA,
                   scheme: BandScheme = DEFAULT_ATTAINMENT_BANDS
                   ) -> list[RollupEntry]:
    """Per-outcome pooled attainment over every class in the term range.

    Pooled means flat enumeration of (student, class) records, no
    deduplication across classes.
    """
    _check_theta(theta)
    scope = Scope(curriculum_version=curriculum_version, terms=terms or None)
    sections = sections_in_scope(state, scope)
    if not sections:
        raise errors.EmptyScope("no classes in the requested term range")
    outcomes = sorted(
        (o for o in state.outcomes.values()
         if o.curriculum_version == curriculum_version),
        key=lambda o: o.outcome_code)
    if not outcomes:
        raise errors.UnknownOutcome(
            f"no outcomes defined for curriculum {curriculum_version}")
    entries = []
    for outcome in outcomes:
        records, no_evidence = pooled_records(
            state, sections, outcome.outcome_code, theta, scope.descriptor())
        if not records:
            entries.append(RollupEntry(
                outcome_code=outcome.outcome_code,
                graduate_attribute=outcome.graduate_attribute,
                active=outcome.active,
                no_evidence=True, rate=None,
                attained_count=0, record_count=0, distribution=None))
            continue
        attained = sum(1 for r in records if r.attained)
        entries.append(RollupEntry(
            outcome_code=outcome.outcome_code,
            graduate_attribute=outcome.graduate_attribute,
            active=outcome.active,
            no_evidence=False,
            rate=float(Fraction(attained, len(records))),
            attained_count=attained,
            record_count=len(records),
            distribution=_bucket(records, scheme, scope.descriptor(),
                                 outcome.outcome_code, theta, no_evidence),
        ))
    return entries


def term_trend(state: State, outcome_code: str, curriculum_version: str,
               ordered_terms: tuple[str, ...],
               theta: float = DEFAULT_THETA) -> list[TrendPoint]:
    """Pooled attainment rate per term, in the order given; terms without
    evidence keep their slot with an explicit marker."""
    _check_theta(theta)
    points = []
    for term in ordered_terms:
        scope = Scope(term=term, curriculum_version=curriculum_version)
        sections = sections_in_scope(state, scope)
        records, _ = pooled_records(state, sections, outcome_code, theta,
                                    scope.descriptor())
        if not records:
            points.append(TrendPoint(term=term, no_evidence=True, rate=None,
                                     attained_count=0, record_count=0))
            continue
        attained = sum(1 for r in records if r.attained)
        points.append(TrendPoint(
            term=term, no_evidence=False,
            rate=float(Fraction(attained, len(records))),
            attained_count=attained, record_count=len(records)))
    return points


# --- skills ---------------------------------------------------------------------

@dataclass(frozen=True)
class SkillSummary:
    skill_id: str
    name: str
    mean_score: float  # half-up, 2 dp
    count: int


def skills_summary(state: State, class_id: str) -> list[SkillSummary]:
    from .canon import round_half_up
    from .state import effective_skill_ratings

    state.section(class_id)
    by_skill: dict[str, list[float]] = {}
    for rating in effective_skill_ratings(state, class_id=class_id):
        by_skill.setdefault(rating.skill_id, []).append(rating.score)
    summaries = []
    for skill_id, scores in by_skill.items():
        skill = state.skill(skill_id)
        mean = Fraction(0)
        for s in scores:
            mean += Fraction(s)
        mean /= len(scores)
        summaries.append(SkillSummary(
            skill_id=skill_id,
            name=skill.name,
            mean_score=round_half_up(mean, 2),
            count=len(scores),
        ))
    return sorted(summaries, key=lambda s: (s.name, s.skill_id))
