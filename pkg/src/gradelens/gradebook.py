"""Weighted grade components, score pooling, final percentages and
transmutation to institutional grade labels.

Component scores pool points (sum of raw over sum of max) across the items a
student actually has scores for; missing components block finalization
instead of counting as zero. The single rounding point is final_percent
(half-up, 2 decimals); everything before it is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import errors
from .canon import round_half_up
from .state import State, effective_scores

WEIGHT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GradeBand:
    lower_bound: float  # percent, inclusive
    label: str


@dataclass(frozen=True)
class GradeScale:
    """Ordered transmutation table; bounds strictly decreasing down to 0."""
    bands: tuple[GradeBand, ...]

    def validate(self) -> None:
        if not self.bands:
            raise errors.InvalidScale("at least one band required")
        bounds = [b.lower_bound for b in self.bands]
        if any(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise errors.InvalidScale("bounds must be strictly decreasing")
        if bounds[-1] != 0:
            raise errors.InvalidScale("lowest band must start at 0")
        if bounds[0] > 100:
            raise errors.InvalidScale("top band starts above 100")
        if any(not b.label.strip() for b in self.bands):
            raise errors.InvalidScale("labels must be non-empty")

    def to_doc(self) -> list:
        return [{"lower_bound": float(b.lower_bound), "label": b.label}
                for b in self.bands]

    @classmethod
    def from_doc(cls, doc: list) -> "GradeScale":
        scale = cls(bands=tuple(
            GradeBand(lower_bound=float(b["lower_bound"]), label=str(b["label"]))
            for b in doc))
        scale.validate()
        return scale


# Philippine 1.00-5.00 convention; overridable in settings.
DEFAULT_GRADE_SCALE = GradeScale(bands=(
    GradeBand(96, "1.00"),
    GradeBand(93, "1.25"),
    GradeBand(90, "1.50"),
    GradeBand(87, "1.75"),
    GradeBand(84, "2.00"),
    GradeBand(81, "2.25"),
    GradeBand(78, "2.50"),
    GradeBand(75, "2.75"),
    GradeBand(70, "3.00"),
    GradeBand(0, "5.00"),
))


def transmute_grade(percent: float, scale: GradeScale = DEFAULT_GRADE_SCALE) -> str:
    scale.validate()
    if not 0 <= percent <= 100:
        raise errors.OutOfRange(f"percent {percent} outside [0, 100]")
    for band in scale.bands:
        if percent >= band.lower_bound:
            return band.label
    raise errors.InvalidScale("no band matched")  # unreachable after validate


def grade_band_index(percent: float, scale: GradeScale = DEFAULT_GRADE_SCALE) -> int:
    label = transmute_grade(percent, scale)
    return [b.label for b in scale.bands].index(label)


def weights_sum(state: State, class_id: str) -> float:
    return float(sum(Fraction(c.weight) for c in state.class_components(class_id)))


def weights_normalized(state: State, class_id: str) -> bool:
    total = sum(Fraction(c.weight) for c in state.class_components(class_id))
    return abs(total - 1) <= Fraction(WEIGHT_SUM_TOLERANCE)


def require_normalized_weights(state: State, class_id: str) -> None:
    if not weights_normalized(state, class_id):
        raise errors.WeightsNotNormalized(
            f"component weights for {class_id} sum to {weights_sum(state, class_id)!r}, "
            "must be 1 within 1e-9")


def component_score_exact(state: State, student_id: str,
                          component_id: str) -> Fraction:
    component = state.component(component_id)
    items = state.component_items(component.component_id)
    entries = effective_scores(state, student_id=student_id,
                               item_ids={i.item_id for i in items})
    if not entries:
        raise errors.NoScores(
            f"{student_id} has no scores in component {component.name}")
    raw = Fraction(0)
    out_of = Fraction(0)
    max_points = {i.item_id: i.max_points for i in items}
    for entry in entries:
        raw += Fraction(entry.raw_score)
        out_of += Fraction(max_points[entry.item_id])
    return raw / out_of


def component_score(state: State, student_id: str, component_id: str) -> float:
    """Points-pooled ratio over the component's scored items, in [0, 1]."""
    return float(component_score_exact(state, student_id, component_id))


def final_percent(state: State, student_id: str, class_id: str) -> float:
    """100 x sum(weight_k x component_score_k), half-up to 2 decimals."""
    require_normalized_weights(state, class_id)
    components = state.class_components(class_id)
    missing = []
    total = Fraction(0)
    for component in components:
        try:
            score = component_score_exact(state, student_id, component.component_id)
        except errors.NoScores:
            missing.append(component.name)
            continue
        total += Fraction(component.weight) * score
    if missing:
        raise errors.IncompleteComponents(missing, student_id=student_id)
    return round_half_up(100 * total, 2)


@dataclass(frozen=True)
class StudentGrade:
    student_id: str
    final_percent: float
    grade: str


@dataclass(frozen=True)
class ClassSummary:
    class_id: str
    graded: tuple[StudentGrade, ...]  # ordered by student id
    incomplete: tuple[tuple[str, tuple[str, ...]], ...]  # (student, missing names)
    mean_percent: float | None  # absent when nobody finalizes


def class_grade_summary(state: State, class_id: str,
                        scale: GradeScale = DEFAULT_GRADE_SCALE) -> ClassSummary:
    section = state.section(class_id)
    require_normalized_weights(state, class_id)
    graded = []
    incomplete = []
    for student_id in sorted(section.roster):
        try:
            percent = final_percent(state, student_id, class_id)
        except errors.IncompleteComponents as exc:
            incomplete.append((student_id, tuple(exc.missing)))
            continue
        graded.append(StudentGrade(student_id=student_id,
                                   final_percent=percent,
                                   grade=transmute_grade(percent, scale)))
    mean = None
    if graded:
        total = Fraction(0)
        for g in graded:
            total += Fraction(g.final_percent)
        mean = round_half_up(total / len(graded), 2)
    return ClassSummary(class_id=class_id, graded=tuple(graded),
                        incomplete=tuple(incomplete), mean_percent=mean)
