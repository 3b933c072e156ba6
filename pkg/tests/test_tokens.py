import inspect
import json

import pytest

from latebind.clock import ManualClock
from latebind.errors import Conflict
from latebind.lifecycle import LifecyclePolicy
from latebind.render import DEFAULT_SPEC
from latebind.storage import ContentStore, new_content_id
from latebind.tokens import TokenStatus, TokenVault, new_token


@pytest.fixture()
def store(data_dir):
    return ContentStore(data_dir, clock=ManualClock())


@pytest.fixture()
def vault(store):
    return TokenVault(store, store.salt)


def make_content(store) -> str:
    cid = new_content_id()
    store.create(cid, "static", DEFAULT_SPEC, LifecyclePolicy())
    return cid


def test_issue_then_validate_round_trip(store, vault):
    cid = make_content(store)
    token = vault.issue(cid)
    assert vault.validate(token, cid) is TokenStatus.AUTHORIZED


def test_second_issue_conflicts(store, vault):
    cid = make_content(store)
    vault.issue(cid)
    with pytest.raises(Conflict):
        vault.issue(cid)


def test_wrong_empty_and_foreign_tokens_invalid(store, vault):
    cid = make_content(store)
    other = make_content(store)
    token = vault.issue(cid)
    vault.issue(other)
    assert vault.validate("definitely-wrong", cid) is TokenStatus.INVALID
    assert vault.validate("", cid) is TokenStatus.INVALID
    assert vault.validate(None, cid) is TokenStatus.INVALID
    assert vault.validate(token, other) is TokenStatus.INVALID
    assert vault.validate(token, "no-such-content") is TokenStatus.INVALID


def test_revoke_is_idempotent_and_detectable(store, vault):
    cid = make_content(store)
    token = vault.issue(cid)
    vault.revoke(cid)
    vault.revoke(cid)
    assert vault.validate(token, cid) is TokenStatus.REVOKED
    assert vault.is_owner(token, cid)


def test_revoke_without_token_is_noop(store, vault):
    cid = make_content(store)
    vault.revoke(cid)
    assert vault.validate("anything", cid) is TokenStatus.INVALID


def test_clear_token_never_persisted(store, vault, data_dir):
    cid = make_content(store)
    token = vault.issue(cid)
    for path in data_dir.rglob("*"):
        if path.is_file():
            assert token.encode() not in path.read_bytes()
    meta = json.loads((data_dir / "contents" / cid / "meta.json").read_text())
    assert meta["token"]["hash"] and meta["token"]["hash"] != token


def test_generated_tokens_are_distinct():
    seen = {new_token() for _ in range(10_000)}
    assert len(seen) == 10_000


def test_validation_uses_constant_time_compare():
    source = inspect.getsource(TokenVault.validate)
    assert "compare_digest(digest, stored)" in source
    # the secret digests must never hit a short-circuiting comparison
    for fragment in ("digest ==", "== digest", "stored ==", "== stored", "digest !=", "stored !="):
        assert fragment not in source
