"""Per-content edit tokens.

Each piece of content gets one bearer token, handed out exactly once at
creation. The server keeps only a salted SHA-256 of it; validation hashes
the presented value and compares digests in constant time via
hmac.compare_digest. Revocation is one-way.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
import secrets

from .errors import Conflict, NotFound

TOKEN_BYTES = 16  # 128-bit random value, base64url on the wire


class TokenStatus(enum.Enum):
    AUTHORIZED = "authorized"
    REVOKED = "revoked"
    INVALID = "invalid"


def new_token() -> str:
    return secrets.token_urlsafe(TOKEN_BYTES)


def hash_token(token: str, salt: bytes) -> str:
    return hashlib.sha256(salt + token.encode("utf-8")).hexdigest()


class TokenVault:
    """Issues, validates, and revokes edit tokens against the content store."""

    def __init__(self, store, salt: bytes):
        self._store = store
        self._salt = salt

    def issue(self, content_id: str) -> str:
        token = new_token()
        digest = hash_token(token, self._salt)

        def apply(meta: dict):
            if meta.get("token", {}).get("hash"):
                raise Conflict(f"token already issued for {content_id}")
            meta["token"] = {"hash": digest, "status": "active"}

        self._store.mutate(content_id, apply)
        return token

    def validate(self, presented: str | None, content_id: str) -> TokenStatus:
        try:
            record = self._store.token_record(content_id)
        except NotFound:
            return TokenStatus.INVALID
        stored = record.get("hash")
        if not stored or not presented:
            return TokenStatus.INVALID
        digest = hash_token(presented, self._salt)
        if not hmac.compare_digest(digest, stored):
            return TokenStatus.INVALID
        return TokenStatus.AUTHORIZED if record.get("status") == "active" else TokenStatus.REVOKED

    def revoke(self, content_id: str) -> None:
        def apply(meta: dict):
            token = meta.get("token") or {}
            if token.get("hash"):
                token["status"] = "revoked"
                meta["token"] = token

        self._store.mutate(content_id, apply)

    def is_owner(self, presented: str | None, content_id: str) -> bool:
        """Hash match regardless of revocation: identifies the sender."""
        return self.validate(presented, content_id) is not TokenStatus.INVALID
