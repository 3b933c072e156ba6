from concurrent.futures import ThreadPoolExecutor

import pytest

from latebind.clock import ManualClock
from latebind.content import ContentManager
from latebind.errors import AuthDenied, ContentExpired, InvalidSpec, TokenRevoked
from latebind.lifecycle import LifecyclePolicy
from latebind.render import DEFAULT_SPEC, ImageFormat, render_notification, render_static
from latebind.storage import ContentStore
from latebind.tokens import TokenVault


@pytest.fixture()
def clock():
    return ManualClock()


@pytest.fixture()
def manager(data_dir, clock):
    store = ContentStore(data_dir, clock=clock)
    return ContentManager(store, TokenVault(store, store.salt), clock)


def create(manager, kind="static", text="hello", policy=None, kt=False, binding=None):
    return manager.create(kind, text, DEFAULT_SPEC, policy or LifecyclePolicy(), kt, binding)


def test_create_renders_revision_one(manager):
    made = create(manager)
    assert made.content.revision_count == 1
    asset = manager.store.get_latest_asset(made.content_id, 0)
    assert asset.payload == render_static("hello", DEFAULT_SPEC)[0].payload


def test_self_destruct_requires_policy(manager):
    with pytest.raises(InvalidSpec):
        create(manager, kind="self-destruct", policy=LifecyclePolicy())


def test_owner_views_do_not_count(manager):
    made = create(manager)
    state, revoked = manager.record_view(made.content_id, made.edit_token)
    assert state.view_count == 0 and not revoked


def test_recipient_views_count_and_revoke_ce_once(manager):
    made = create(manager, kind="continuous-edit")
    state, revoked = manager.record_view(made.content_id, None)
    assert state.view_count == 1 and revoked
    state, revoked = manager.record_view(made.content_id, None)
    assert state.view_count == 2 and not revoked


def test_revocation_only_applies_to_continuous_edit(manager):
    made = create(manager, kind="self-destruct", policy=LifecyclePolicy(max_views=100))
    _, revoked = manager.record_view(made.content_id, None)
    assert not revoked
    assert manager.store.load(made.content_id).token_status == "active"


def test_hundred_concurrent_views_count_exactly(manager):
    made = create(manager)
    with ThreadPoolExecutor(max_workers=32) as pool:
        list(pool.map(lambda _: manager.record_view(made.content_id, None), range(100)))
    # oracle: sequential replay of the same 100 tokenless fetches
    replay = create(manager)
    for _ in range(100):
        manager.record_view(replay.content_id, None)
    assert (
        manager.store.load(made.content_id).view_state.view_count
        == manager.store.load(replay.content_id).view_state.view_count
        == 100
    )


def test_expire_replaces_segments_and_purges(manager, data_dir):
    long_text = "\n".join(f"line {i}" for i in range(65))
    made = create(manager, kind="self-destruct", text=long_text,
                  policy=LifecyclePolicy(max_views=1))
    assert made.content.segment_count == 3

    manager.expire_content(made.content_id, "view-limit")
    content = manager.store.load(made.content_id)
    assert content.status == "expired"
    note = render_notification("expired", DEFAULT_SPEC)
    for seg in range(3):
        assert manager.store.get_latest_asset(made.content_id, seg).payload == note.payload
    raw = (data_dir / "contents" / made.content_id / "meta.json").read_bytes()
    assert b"line 33" not in raw


def test_expire_twice_is_noop(manager):
    made = create(manager, kind="self-destruct", policy=LifecyclePolicy(max_views=1))
    manager.expire_content(made.content_id, "view-limit")
    rev = manager.store.load(made.content_id).latest.revision
    manager.expire_content(made.content_id, "view-limit")
    assert manager.store.load(made.content_id).latest.revision == rev


def test_update_after_expiry_fails(manager):
    made = create(manager, kind="self-destruct", policy=LifecyclePolicy(max_views=1))
    manager.expire_content(made.content_id, "view-limit")
    with pytest.raises(ContentExpired):
        manager.update_text(made.content_id, made.edit_token, "new")


def test_update_with_revoked_token_denied_permanently(manager):
    made = create(manager, kind="continuous-edit")
    assert manager.update_text(made.content_id, made.edit_token, "first edit") == 2
    manager.record_view(made.content_id, None)  # recipient opens
    for _ in range(3):
        with pytest.raises(TokenRevoked):
            manager.update_text(made.content_id, made.edit_token, "late edit")


def test_update_with_garbage_token_denied(manager):
    made = create(manager)
    with pytest.raises(AuthDenied):
        manager.update_text(made.content_id, "garbage", "x")


def test_delete_semantics_by_kind(manager):
    sd = create(manager, kind="self-destruct", policy=LifecyclePolicy(max_views=5))
    manager.record_view(sd.content_id, None)
    manager.store.mutate(sd.content_id, lambda m: m["token"].__setitem__("status", "revoked"))
    manager.delete_content(sd.content_id, sd.edit_token)  # revoked token may still destroy SD
    assert manager.store.load(sd.content_id).status == "deleted"

    ce = create(manager, kind="continuous-edit")
    manager.record_view(ce.content_id, None)
    with pytest.raises(TokenRevoked):
        manager.delete_content(ce.content_id, ce.edit_token)


def test_delete_is_idempotent(manager):
    made = create(manager)
    manager.delete_content(made.content_id, made.edit_token)
    manager.delete_content(made.content_id, made.edit_token)
    note = render_notification("deleted", DEFAULT_SPEC)
    assert manager.store.get_latest_asset(made.content_id, 0).payload == note.payload


def test_serve_image_expires_then_serves_notification(manager, clock):
    made = create(manager, kind="self-destruct", policy=LifecyclePolicy(after_first_view=3.0))
    first = manager.serve_image(made.content_id, 0, "png", None)
    assert first.payload == render_static("hello", DEFAULT_SPEC)[0].payload

    clock.advance(2.9)
    still = manager.serve_image(made.content_id, 0, "png", None)
    assert still.payload == first.payload

    clock.advance(0.2)  # now at +3.1s
    after = manager.serve_image(made.content_id, 0, "png", None)
    assert after.payload == render_notification("expired", DEFAULT_SPEC).payload


def test_serve_image_counts_only_recipients(manager):
    made = create(manager)
    manager.serve_image(made.content_id, 0, "png", made.edit_token)
    manager.serve_image(made.content_id, 0, "png", None)
    assert manager.store.load(made.content_id).view_state.view_count == 1


def test_kt_content_serves_gif_and_notification_stays_gif(manager):
    made = create(manager, kind="self-destruct", kt=True,
                  policy=LifecyclePolicy(max_views=1))
    asset = manager.serve_image(made.content_id, 0, "gif", None)
    assert asset.format is ImageFormat.ANIMATED
    # second tokenless fetch: view limit reached, notification replaces it, same extension
    note = manager.serve_image(made.content_id, 0, "gif", None)
    assert note.format is ImageFormat.ANIMATED
    assert note.payload != asset.payload


def test_kt_history_renders_on_edit(manager):
    made = create(manager, kind="continuous-edit", text="Hi Jhon", kt=True)
    manager.update_text(made.content_id, made.edit_token, "Hi John")
    asset = manager.store.get_latest_asset(made.content_id, 0)
    assert asset.format is ImageFormat.ANIMATED
    from latebind.render import render_history_segments

    expected = render_history_segments(["Hi Jhon", "Hi John"], DEFAULT_SPEC)[0]
    assert asset.payload == expected.payload


def test_status_doc_requires_owner(manager):
    made = create(manager, kind="self-destruct", policy=LifecyclePolicy(after_first_view=259200.0))
    doc = manager.status_doc(made.content_id, made.edit_token)
    assert doc["view_count"] == 0
    assert doc["policy"]["after_first_view"] == 259200.0
    with pytest.raises(AuthDenied):
        manager.status_doc(made.content_id, "wrong")
    for _ in range(3):
        manager.record_view(made.content_id, None)
    assert manager.status_doc(made.content_id, made.edit_token)["view_count"] == 3
