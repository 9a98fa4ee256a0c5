"""Password hashing and bearer-token sessions.

PBKDF2-HMAC-SHA256 with per-account random salt; tokens are opaque 128-bit
random values held in memory with a TTL, so sessions do not survive a restart
(the store itself never holds tokens). The clock is injectable for expiry
tests.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable

from . import errors
from .models import Credential, Role

MIN_PASSWORD_LENGTH = 8
PBKDF2_ITERATIONS = 60_000
TOKEN_BYTES = 16  # 128-bit opaque tokens


def hash_password(password: str, *, salt: bytes | None = None,
                  iterations: int = PBKDF2_ITERATIONS) -> Credential:
    if len(password) < MIN_PASSWORD_LENGTH:
        raise errors.WeakPassword(
            f"password must be at least {MIN_PASSWORD_LENGTH} characters")
    if salt is None:
        salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return Credential(algorithm="pbkdf2_sha256", salt=salt.hex(),
                      iterations=iterations, digest=digest.hex())


def verify_password(password: str, credential: Credential | None) -> bool:
    if credential is None:
        return False
    computed = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"),
        bytes.fromhex(credential.salt), credential.iterations)
    return hmac.compare_digest(computed.hex(), credential.digest)


@dataclass(frozen=True)
class Session:
    token: str
    user_id: str
    role: Role
    expires_at: float


class TokenStore:
    """In-memory token table; thread-safe, expiry checked on every resolve."""

    def __init__(self, clock: Callable[[], float] = time.time):
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def issue(self, user_id: str, role: Role, ttl_minutes: int) -> Session:
        token = secrets.token_hex(TOKEN_BYTES)
        session = Session(token=token, user_id=user_id, role=role,
                          expires_at=self._clock() + ttl_minutes * 60)
        with self._lock:
            self._sessions[token] = session
        return session

    def resolve(self, token: str) -> Session:
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                raise errors.InvalidToken("unknown or expired token")
            if self._clock() >= session.expires_at:
                del self._sessions[token]
                raise errors.InvalidToken("unknown or expired token")
            return session

    def revoke(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)
