"""Time-based one-time passwords (RFC 6238 over RFC 4226, HMAC-SHA1).

30-second step, 6 digits, verification window of ±1 step to absorb clock
skew between server and authenticator.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import secrets
import struct

STEP_SECONDS = 30
DIGITS = 6
SECRET_BITS = 160


def generate_secret() -> str:
    """Fresh 160-bit key, base32 without padding (otpauth-friendly)."""
    raw = secrets.token_bytes(SECRET_BITS // 8)
    return base64.b32encode(raw).decode("ascii").rstrip("=")


def _decode_secret(secret: str) -> bytes:
    normalized = secret.strip().replace(" ", "").upper()
    pad = (-len(normalized)) % 8
    return base64.b32decode(normalized + "=" * pad)


def hotp(secret: str, counter: int, digits: int = DIGITS) -> str:
    key = _decode_secret(secret)
    msg = struct.pack(">Q", counter)
    digest = hmac.new(key, msg, hashlib.sha1).digest()
    offset = digest[-1] & 0x0F
    code = struct.unpack(">I", digest[offset:offset + 4])[0] & 0x7FFFFFFF
    return str(code % (10 ** digits)).zfill(digits)


def totp_at(secret: str, unix_time: float, step: int = STEP_SECONDS,
            digits: int = DIGITS) -> str:
    return hotp(secret, int(unix_time) // step, digits)


def verify(secret: str, code: str, unix_time: float, step: int = STEP_SECONDS,
           window: int = 1, digits: int = DIGITS) -> bool:
    """Constant-time comparison against the current step and ±window neighbors."""
    if not code or not code.isdigit():
        return False
    counter = int(unix_time) // step
    for offset in range(-window, window + 1):
        if hmac.compare_digest(hotp(secret, counter + offset, digits), code):
            return True
    return False


def provisioning_uri(handle: str, secret: str) -> str:
    return f"otpauth://totp/PDS:{handle}?secret={secret}&period={STEP_SECONDS}&digits={DIGITS}"
