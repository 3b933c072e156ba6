"""Exception taxonomy shared across the package.

The HTTP layer maps these onto status codes; everything below it raises
them directly.
"""


class LateBindError(Exception):
    """Base class for all latebind errors."""


class InvalidSpec(LateBindError, ValueError):
    """A render spec or request payload violates its constraints."""


class NotFound(LateBindError, KeyError):
    """Unknown content id, segment, or binding."""

    def __str__(self) -> str:  # KeyError quotes its args; keep messages readable
        return Exception.__str__(self)


class Conflict(LateBindError):
    """Operation conflicts with current state (token already issued, wrong kind)."""


class ContentExpired(LateBindError):
    """Content has expired or was deleted; mutation is no longer possible."""


class AuthDenied(LateBindError):
    """Presented token is missing or does not match."""


class TokenRevoked(AuthDenied):
    """Token matches but edit rights were revoked (recipient opened the email)."""
