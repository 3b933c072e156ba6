"""Self-destruct policies and view accounting.

A policy expires content when ANY of its set conditions is met: the absolute
deadline passed, the configured time after the first view elapsed, or the
view allowance is used up. Views are counted by image downloads that arrive
without the owner's edit token; owner previews never count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import InvalidSpec

REASON_ABSOLUTE = "absolute-expiry"
REASON_AFTER_FIRST_VIEW = "after-first-view"
REASON_VIEW_LIMIT = "view-limit"


@dataclass(frozen=True)
class LifecyclePolicy:
    absolute_expiry: Optional[float] = None
    after_first_view: Optional[float] = None  # seconds after first recipient view
    max_views: Optional[int] = None

    def is_empty(self) -> bool:
        return (
            self.absolute_expiry is None
            and self.after_first_view is None
            and self.max_views is None
        )

    def validate(self) -> "LifecyclePolicy":
        if self.after_first_view is not None and self.after_first_view < 0:
            raise InvalidSpec("after_first_view must be non-negative")
        if self.max_views is not None and self.max_views < 1:
            raise InvalidSpec("max_views must be a positive integer")
        return self

    def to_dict(self) -> dict:
        return {
            "absolute_expiry": self.absolute_expiry,
            "after_first_view": self.after_first_view,
            "max_views": self.max_views,
        }

    @classmethod
    def from_dict(cls, raw: Optional[dict]) -> "LifecyclePolicy":
        raw = raw or {}
        known = {"absolute_expiry", "after_first_view", "max_views"}
        bad = set(raw) - known
        if bad:
            raise InvalidSpec(f"unknown policy fields: {sorted(bad)}")
        policy = cls(
            absolute_expiry=raw.get("absolute_expiry"),
            after_first_view=raw.get("after_first_view"),
            max_views=raw.get("max_views"),
        )
        return policy.validate()


@dataclass
class ViewState:
    view_count: int = 0
    first_viewed_at: Optional[float] = None
    last_viewed_at: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "view_count": self.view_count,
            "first_viewed_at": self.first_viewed_at,
            "last_viewed_at": self.last_viewed_at,
        }

    @classmethod
    def from_dict(cls, raw: Optional[dict]) -> "ViewState":
        raw = raw or {}
        return cls(
            view_count=raw.get("view_count", 0),
            first_viewed_at=raw.get("first_viewed_at"),
            last_viewed_at=raw.get("last_viewed_at"),
        )


@dataclass(frozen=True)
class PolicyVerdict:
    status: str  # "active" | "expired"
    reason: Optional[str] = None

    @property
    def expired(self) -> bool:
        return self.status == "expired"

    def to_dict(self) -> dict:
        return {"status": self.status, "reason": self.reason}


ACTIVE = PolicyVerdict("active")


def evaluate(policy: LifecyclePolicy, state: ViewState, now: float) -> PolicyVerdict:
    """OR of the set conditions; the first satisfied one names the reason."""
    if policy.absolute_expiry is not None and now >= policy.absolute_expiry:
        return PolicyVerdict("expired", REASON_ABSOLUTE)
    if (
        policy.after_first_view is not None
        and state.first_viewed_at is not None
        and now >= state.first_viewed_at + policy.after_first_view
    ):
        return PolicyVerdict("expired", REASON_AFTER_FIRST_VIEW)
    if policy.max_views is not None and state.view_count >= policy.max_views:
        return PolicyVerdict("expired", REASON_VIEW_LIMIT)
    return ACTIVE


def record_view(state: ViewState, is_owner: bool, now: float) -> tuple[ViewState, bool]:
    """Apply one image download to the view state.

    Returns (new state, first_recipient_view). Owner previews leave the
    state untouched.
    """
    if is_owner:
        return state, False
    first = state.first_viewed_at is None
    return (
        ViewState(
            view_count=state.view_count + 1,
            first_viewed_at=state.first_viewed_at if not first else now,
            last_viewed_at=now,
        ),
        first,
    )
