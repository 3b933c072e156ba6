"""Ties the store, token vault, renderer, and policies into content flows.

This is where the service semantics live: which kinds render as what, when
a view revokes editing, and how expiry swaps every segment for the
notification image and purges the original.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import lifecycle
from .clock import Clock
from .errors import AuthDenied, Conflict, ContentExpired, InvalidSpec, NotFound, TokenRevoked
from .lifecycle import LifecyclePolicy, PolicyVerdict, ViewState
from .render import (
    DEFAULT_MAX_BLUR_PX,
    NOTIFICATION_TEXT,
    ImageAsset,
    ImageFormat,
    RenderSpec,
    blur_fraction,
    render_blur_segments,
    render_history_segments,
    render_notification,
    render_static,
)
from .storage import BoundContent, ContentStore, new_content_id
from .tokens import TokenStatus, TokenVault

KT_KINDS = {"self-destruct": "blur", "continuous-edit": "history"}
PLACEHOLDER_VALUE = "—"  # em dash until the first refresh lands
SNAPSHOT_PLACEHOLDER = "(snapshot pending)"


@dataclass
class CreatedContent:
    content_id: str
    edit_token: str
    content: BoundContent


class ContentManager:
    def __init__(self, store: ContentStore, vault: TokenVault, clock: Clock,
                 max_blur_px: float = DEFAULT_MAX_BLUR_PX):
        self.store = store
        self.vault = vault
        self.clock = clock
        self.max_blur_px = max_blur_px

    # -- rendering dispatch ----------------------------------------------

    def _kt_animation(self, content: BoundContent) -> Optional[str]:
        if not content.kt_enabled:
            return None
        return KT_KINDS.get(content.kind)

    def render_revision(self, content: BoundContent, text: str) -> list[ImageAsset]:
        style = self._kt_animation(content)
        if style == "blur":
            fraction = blur_fraction(
                now=self.clock.now(),
                created_at=content.created_at,
                first_viewed_at=content.view_state.first_viewed_at,
                after_first_view=content.policy.after_first_view,
                absolute_expiry=content.policy.absolute_expiry,
            )
            return render_blur_segments(text, content.spec, fraction, self.max_blur_px)
        if style == "history":
            texts = [r.text for r in content.revisions if r.text is not None]
            return render_history_segments(texts + [text], content.spec)
        return render_static(text, content.spec)

    def _notification_assets(self, content: BoundContent, kind: str) -> list[ImageAsset]:
        note = render_notification(kind, content.spec)
        if content.serving_format is ImageFormat.ANIMATED:
            # keep the file extension the delivered email already references
            note = render_blur_segments(
                NOTIFICATION_TEXT[kind], content.spec, 0.0, self.max_blur_px
            )[0]
        count = max(1, content.segment_count)
        return [
            ImageAsset(
                segment_index=i,
                format=note.format,
                width=note.width,
                height=note.height,
                payload=note.payload,
            )
            for i in range(count)
        ]

    # -- creation ----------------------------------------------------------

    def create(
        self,
        kind: str,
        text: Optional[str],
        spec: RenderSpec,
        policy: LifecyclePolicy,
        kt_enabled: bool = False,
        binding: Optional[dict] = None,
    ) -> CreatedContent:
        if kind in ("dashboard", "web-reference"):
            if binding is None:
                raise InvalidSpec(f"{kind} content needs a binding")
            if text is None:
                template = (binding.get("template") or "").replace("{value}", PLACEHOLDER_VALUE)
                text = template or SNAPSHOT_PLACEHOLDER
        elif text is None:
            raise InvalidSpec("text is required for this kind")
        if kind == "self-destruct" and policy.is_empty():
            raise InvalidSpec("self-destruct content needs at least one expiry condition")

        content_id = new_content_id()
        self.store.create(content_id, kind, spec, policy, kt_enabled, binding)
        token = self.vault.issue(content_id)
        content = self.store.load(content_id)
        assets = self.render_revision(content, text)
        self.store.put_revision(content_id, text, assets, origin="sender")
        return CreatedContent(content_id, token, self.store.load(content_id))

    # -- view accounting -----------------------------------------------

    def record_view(self, content_id: str, presented_token: Optional[str]) -> tuple[ViewState, bool]:
        """Count one image download; returns (state, edit_rights_revoked_now)."""
        is_owner = self.vault.is_owner(presented_token, content_id)

        def apply(meta: dict) -> tuple[ViewState, bool]:
            state = ViewState.from_dict(meta["view"])
            if meta["status"] != "live":
                return state, False
            new_state, first = lifecycle.record_view(state, is_owner, self.clock.now())
            meta["view"] = new_state.to_dict()
            revoke = (
                first
                and meta["kind"] == "continuous-edit"
                and (meta.get("token") or {}).get("status") == "active"
            )
            if revoke:
                meta["token"]["status"] = "revoked"
            return new_state, revoke

        return self.store.mutate(content_id, apply)

    # -- expiry / deletion ------------------------------------------------

    def evaluate(self, content_id: str) -> PolicyVerdict:
        content = self.store.load(content_id)
        if content.status == "expired":
            return PolicyVerdict("expired", content.expiry_reason)
        if content.status == "deleted":
            return PolicyVerdict("expired", "deleted")
        return lifecycle.evaluate(content.policy, content.view_state, self.clock.now())

    def _terminate(self, content_id: str, status: str, notification_kind: str, reason: Optional[str]) -> None:
        with self.store.lock(content_id):
            content = self.store.load(content_id)
            if not content.live:
                return
            assets = self._notification_assets(content, notification_kind)
            self.store.put_revision(content_id, None, assets, origin=status)

            def apply(meta: dict):
                meta["status"] = status
                meta["expiry_reason"] = reason

            self.store.mutate(content_id, apply)
            self.store.purge_source(content_id)

    def expire_content(self, content_id: str, reason: str) -> None:
        self._terminate(content_id, "expired", "expired", reason)

    def delete_content(self, content_id: str, presented_token: Optional[str]) -> None:
        status = self.vault.validate(presented_token, content_id)
        content = self.store.load(content_id)
        if status is TokenStatus.INVALID:
            raise AuthDenied("missing or unknown token")
        if status is TokenStatus.REVOKED and content.kind != "self-destruct":
            # senders of self-destruct secrets may always pull the plug;
            # for other kinds revocation ends all control
            raise TokenRevoked("recipient-opened")
        self._terminate(content_id, "deleted", "deleted", "deleted")

    # -- serving -----------------------------------------------------------

    def serve_image(self, content_id: str, segment_index: int, ext: str,
                    presented_token: Optional[str]) -> ImageAsset:
        """The recipient-facing fetch: expire first if due, then count the view."""
        with self.store.lock(content_id):
            content = self.store.load(content_id)
            if content.live:
                verdict = lifecycle.evaluate(content.policy, content.view_state, self.clock.now())
                if verdict.expired:
                    self.expire_content(content_id, verdict.reason or "expired")
                    content = self.store.load(content_id)
            asset = self.store.get_latest_asset(content_id, segment_index)
            if asset.format.value != ext:
                raise NotFound(f"segment {segment_index} is not a .{ext}")
            if content.live:
                self.record_view(content_id, presented_token)
            return asset

    # -- editing -----------------------------------------------------------

    def _require_editable(self, content_id: str, presented_token: Optional[str]) -> BoundContent:
        status = self.vault.validate(presented_token, content_id)
        if status is TokenStatus.REVOKED:
            raise TokenRevoked("recipient-opened")
        if status is not TokenStatus.AUTHORIZED:
            raise AuthDenied("missing or unknown token")
        content = self.store.load(content_id)
        if not content.live:
            raise ContentExpired(f"content is {content.status}")
        return content

    def update_text(self, content_id: str, presented_token: Optional[str], new_text: str) -> int:
        with self.store.lock(content_id):
            content = self._require_editable(content_id, presented_token)
            assets = self.render_revision(content, new_text)
            return self.store.put_revision(content_id, new_text, assets, origin="sender")

    def replace_binding(self, content_id: str, presented_token: Optional[str], binding: dict) -> None:
        with self.store.lock(content_id):
            content = self._require_editable(content_id, presented_token)
            if content.kind not in ("dashboard", "web-reference"):
                raise Conflict(f"{content.kind} content does not take bindings")

            def apply(meta: dict):
                meta["binding"] = binding

            self.store.mutate(content_id, apply)

    # -- status -------------------------------------------------------------

    def status_doc(self, content_id: str, presented_token: Optional[str]) -> dict:
        if not self.vault.is_owner(presented_token, content_id):
            raise AuthDenied("missing or unknown token")
        content = self.store.load(content_id)
        verdict = self.evaluate(content_id)
        return {
            "content_id": content.content_id,
            "kind": content.kind,
            "status": content.status,
            "policy": content.policy.to_dict(),
            "view_count": content.view_state.view_count,
            "first_viewed_at": content.view_state.first_viewed_at,
            "last_viewed_at": content.view_state.last_viewed_at,
            "revision_count": content.revision_count,
            "segment_count": content.segment_count,
            "kt_enabled": content.kt_enabled,
            "verdict": verdict.to_dict(),
            "created_at": content.created_at,
            "binding": content.binding,
            "token_status": content.token_status,
        }
