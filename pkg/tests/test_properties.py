"""Module-level property tests (the heavyweight 1000-case invariant suite
lives in test_acceptance.py; these cover the remaining stated invariants)."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradelens import errors
from gradelens.analytics import Band, BandScheme, band_of, weighted_mean
from gradelens.canon import canonical_bytes, round_half_up
from gradelens.gradebook import DEFAULT_GRADE_SCALE, grade_band_index, transmute_grade

finite_values = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)
positive_weights = st.floats(min_value=1e-6, max_value=1e6,
                             allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(finite_values, positive_weights), min_size=1,
                max_size=8))
def test_weighted_mean_within_value_bounds(pairs):
    values = [v for v, _ in pairs]
    weights = [w for _, w in pairs]
    mean = weighted_mean(values, weights)
    assert min(values) - 1e-9 <= mean <= max(values) + 1e-9


@given(st.floats(min_value=0, max_value=100, allow_nan=False))
def test_transmutation_total_over_domain(percent):
    label = transmute_grade(percent)
    assert label in {b.label for b in DEFAULT_GRADE_SCALE.bands}


def test_transmutation_boundaries_take_higher_band():
    for band in DEFAULT_GRADE_SCALE.bands:
        assert transmute_grade(band.lower_bound) == band.label


@given(st.floats(min_value=0, max_value=100, allow_nan=False),
       st.floats(min_value=0, max_value=100, allow_nan=False))
def test_transmutation_monotone(a, b):
    low, high = sorted((a, b))
    assert grade_band_index(high) <= grade_band_index(low)


@given(st.lists(st.floats(min_value=0.001, max_value=1.0, allow_nan=False),
                min_size=1, max_size=6))
def test_weight_normalization_check_is_exact(weights):
    total = sum(Fraction(w) for w in weights)
    normalized = abs(total - 1) <= Fraction(1e-9)
    # mirror of the gradebook check without a store
    from gradelens.gradebook import WEIGHT_SUM_TOLERANCE
    assert (abs(total - 1) <= Fraction(WEIGHT_SUM_TOLERANCE)) == normalized


@st.composite
def unit_band_schemes(draw):
    n = draw(st.integers(1, 5))
    interior = draw(st.lists(
        st.floats(min_value=0.01, max_value=0.99, allow_nan=False),
        min_size=n - 1, max_size=n - 1, unique=True))
    bounds = sorted(interior, reverse=True) + [0.0]
    return BandScheme(lo=0.0, hi=1.0, bands=tuple(
        Band(label=f"b{i}", lower_bound=b) for i, b in enumerate(bounds)))


@given(unit_band_schemes(), st.floats(min_value=0, max_value=1,
                                      allow_nan=False))
def test_band_of_total_and_monotone(scheme, score):
    scheme.validate()
    label = scheme.band_of(score)
    assert label in scheme.labels()
    # every bound maps onto its own band (lower-bound inclusive)
    for band in scheme.bands:
        assert scheme.band_of(band.lower_bound) == band.label


@given(unit_band_schemes(),
       st.floats(min_value=0, max_value=1, allow_nan=False),
       st.floats(min_value=0, max_value=1, allow_nan=False))
def test_band_order_respects_score_order(scheme, a, b):
    low, high = sorted((a, b))
    assert scheme.band_index(high) <= scheme.band_index(low)


@given(st.integers(2, 10), st.integers(0, 20))
def test_normalize_level_stays_in_unit_interval(span, offset):
    from gradelens.analytics import normalize_level
    min_level = 1 + offset
    max_level = min_level + span
    values = [normalize_level(level, min_level, max_level)
              for level in range(min_level, max_level + 1)]
    assert values[0] == 0.0
    assert values[-1] == 1.0
    assert all(0 <= v <= 1 for v in values)
    assert values == sorted(values)


@given(st.dictionaries(st.text(min_size=1, max_size=8),
                       st.integers(-1000, 1000), max_size=6))
def test_canonical_bytes_deterministic(doc):
    assert canonical_bytes(doc) == canonical_bytes(dict(reversed(doc.items())))


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_round_half_up_matches_decimal_string_rounding(scaled, places):
    # against an independent digit-based implementation
    value = Fraction(scaled, 10**4)
    got = round_half_up(value, places)
    text = f"{scaled // 10**4}.{scaled % 10**4:04d}"
    whole, frac = text.split(".")
    keep, rest = frac[:places], frac[places:]
    n = int(whole) * 10**places + int(keep or 0)
    if rest and int(rest[0]) >= 5:
        n += 1
    assert got == n / 10**places


def test_weighted_mean_rejects_bad_weights_property():
    with pytest.raises(errors.NonPositiveWeight):
        weighted_mean([1.0], [-1.0])


@given(st.floats(min_value=1.0, max_value=5.0, allow_nan=False))
def test_likert_band_total(value):
    from gradelens.analytics import LIKERT5_BANDS
    assert band_of(value, LIKERT5_BANDS) in LIKERT5_BANDS.labels()
