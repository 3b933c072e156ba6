import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latebind.errors import InvalidSpec
from latebind.lifecycle import (
    LifecyclePolicy,
    PolicyVerdict,
    ViewState,
    evaluate,
    record_view,
)

T0 = 1_000_000.0
DAY = 86_400.0


def test_view_limit_boundary():
    policy = LifecyclePolicy(max_views=1)
    assert evaluate(policy, ViewState(view_count=1, first_viewed_at=T0, last_viewed_at=T0), T0).reason == "view-limit"
    assert not evaluate(policy, ViewState(view_count=0), T0).expired


def test_after_first_view_three_days_inclusive_boundary():
    policy = LifecyclePolicy(after_first_view=3 * DAY)
    state = ViewState(view_count=1, first_viewed_at=T0, last_viewed_at=T0)
    assert evaluate(policy, state, T0 + 3 * DAY).reason == "after-first-view"
    assert not evaluate(policy, state, T0 + 3 * DAY - 1).expired


def test_after_first_view_needs_a_first_view():
    policy = LifecyclePolicy(after_first_view=60.0)
    assert not evaluate(policy, ViewState(), T0 + 10 * DAY).expired


def test_empty_policy_never_expires():
    policy = LifecyclePolicy()
    state = ViewState(view_count=10**6, first_viewed_at=T0, last_viewed_at=T0)
    assert not evaluate(policy, state, float("inf")).expired


def test_reason_order_absolute_first():
    policy = LifecyclePolicy(absolute_expiry=T0, after_first_view=0.0, max_views=1)
    state = ViewState(view_count=5, first_viewed_at=T0 - 10, last_viewed_at=T0)
    assert evaluate(policy, state, T0).reason == "absolute-expiry"


def test_policy_validation():
    with pytest.raises(InvalidSpec):
        LifecyclePolicy(max_views=0).validate()
    with pytest.raises(InvalidSpec):
        LifecyclePolicy.from_dict({"unknown_knob": 1})


def test_record_view_owner_is_a_noop():
    state = ViewState()
    new, first = record_view(state, is_owner=True, now=T0)
    assert new == state and not first


def test_record_view_counts_and_marks_first():
    state, first = record_view(ViewState(), is_owner=False, now=T0)
    assert (state.view_count, state.first_viewed_at, first) == (1, T0, True)
    state2, first2 = record_view(state, is_owner=False, now=T0 + 5)
    assert (state2.view_count, state2.first_viewed_at, state2.last_viewed_at) == (2, T0, T0 + 5)
    assert not first2


policies = st.builds(
    LifecyclePolicy,
    absolute_expiry=st.one_of(st.none(), st.floats(min_value=0, max_value=1e9)),
    after_first_view=st.one_of(st.none(), st.floats(min_value=0, max_value=1e6)),
    max_views=st.one_of(st.none(), st.integers(min_value=1, max_value=50)),
)


@settings(max_examples=300, deadline=None)
@given(
    policy=policies,
    first=st.one_of(st.none(), st.floats(min_value=0, max_value=1e9)),
    count=st.integers(min_value=0, max_value=100),
    t=st.floats(min_value=0, max_value=2e9),
    dt=st.floats(min_value=0, max_value=1e9),
    extra_views=st.integers(min_value=0, max_value=10),
)
def test_expiry_is_monotone(policy, first, count, t, dt, extra_views):
    if count == 0:
        first = None
    if count > 0 and first is None:
        first = t
    state = ViewState(view_count=count, first_viewed_at=first, last_viewed_at=first)
    if evaluate(policy, state, t).expired:
        later = ViewState(
            view_count=count + extra_views, first_viewed_at=first, last_viewed_at=first
        )
        assert evaluate(policy, later, t + dt).expired


@settings(max_examples=200, deadline=None)
@given(policy=policies, first=st.floats(min_value=0, max_value=1e9),
       count=st.integers(min_value=0, max_value=100), t=st.floats(min_value=0, max_value=2e9))
def test_verdict_reason_iff_expired(policy, first, count, t):
    state = ViewState(view_count=count, first_viewed_at=first if count else None,
                      last_viewed_at=first if count else None)
    verdict = evaluate(policy, state, t)
    assert isinstance(verdict, PolicyVerdict)
    assert (verdict.reason is not None) == verdict.expired
