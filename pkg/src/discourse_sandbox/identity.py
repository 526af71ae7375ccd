"""Registration, login, mandatory 2FA, consent capture and profiles."""

from __future__ import annotations

import hashlib
import hmac
import re
import secrets
from datetime import timedelta
from typing import Optional

from . import errors, totp
from .clock import Clock
from .config import SandboxConfig
from .models import (
    AccountKind, AccountStatus, ConsentRecord, MediaBlob, ResearcherRequest,
    Session, TotpDevice, UserAccount,
)
from .store import InMemoryStore

HANDLE_RE = re.compile(r"^[a-z0-9_]{3,32}$")
EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")
REQUIRED_CONSENTS = ("platform_rules", "research_participation")

MAX_DISPLAY_NAME = 50
MAX_BIO = 500


def hash_password(password: str, iterations: int) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"pbkdf2${iterations}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        _, iterations, salt_hex, digest_hex = stored.split("$")
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations))
        return hmac.compare_digest(digest.hex(), digest_hex)
    except (ValueError, AttributeError):
        return False


class IdentityService:
    def __init__(self, store: InMemoryStore, clock: Clock, config: SandboxConfig,
                 emailer=None):
        self._store = store
        self._clock = clock
        self._config = config
        self._emailer = emailer

    # -- registration -----------------------------------------------------------

    def _validate_registration(self, handle: str, email: str, password: str,
                               consents: list[str]) -> None:
        if not HANDLE_RE.match(handle):
            raise errors.InvalidHandle(
                "handle must be 3-32 characters of [a-z0-9_]")
        if not EMAIL_RE.match(email):
            raise errors.InvalidEmail("email address looks invalid")
        if len(password) < self._config.password_min_length:
            raise errors.WeakPassword(
                f"password must be at least {self._config.password_min_length} characters")
        for kind in REQUIRED_CONSENTS:
            if kind not in consents:
                raise errors.MissingConsent(
                    f"consent to '{kind}' is required", document_kind=kind)

    def _record_consents(self, user_id: str, consents: list[str]) -> None:
        now = self._clock.now()
        for kind in REQUIRED_CONSENTS:
            document = self._config.consent_documents[kind]
            self._store.add_consent(ConsentRecord(
                user_id=user_id, document_kind=kind,
                document_version=document.version, accepted_at=now))

    def register(self, handle: str, email: str, password: str, display_name: str,
                 consents: list[str]) -> UserAccount:
        self._validate_registration(handle, email, password, consents)
        if len(display_name) > MAX_DISPLAY_NAME:
            raise errors.ValidationError("display name too long")
        user = self._store.create_user(
            handle=handle, email=email,
            password_digest=hash_password(password, self._config.password_hash_iterations),
            kind=AccountKind.REGULAR, display_name=display_name,
            now=self._clock.now())
        self._record_consents(user.id, consents)
        return user

    def request_researcher_access(self, handle: str, email: str, password: str,
                                  display_name: str, consents: list[str],
                                  position_title: str, institution: str,
                                  department: str, intent: str) -> ResearcherRequest:
        for name, value in (("position_title", position_title),
                            ("institution", institution),
                            ("department", department),
                            ("intent", intent)):
            if not value or not value.strip():
                raise errors.EmptyResearcherField(f"{name} must not be empty", field=name)
        if len(intent) > 2000:
            raise errors.ValidationError("intent exceeds 2000 characters")
        user = self.register(handle, email, password, display_name, consents)
        request = ResearcherRequest(
            id=secrets.token_hex(8), user_id=user.id,
            position_title=position_title, institution=institution,
            department=department, intent=intent)
        return self._store.add_researcher_request(request)

    def decide_researcher_request(self, admin: UserAccount, request_id: str,
                                  approve: bool) -> ResearcherRequest:
        if not admin.is_platform_admin:
            raise errors.NotAdmin("only platform administrators vet researcher requests")
        return self._store.decide_researcher_request(
            request_id, approve, admin.id, self._clock.now())

    # -- 2FA ----------------------------------------------------------------------

    def enroll_totp(self, user: UserAccount, label: str) -> tuple[TotpDevice, str]:
        device = TotpDevice(
            id=secrets.token_hex(8), user_id=user.id, label=label,
            secret=totp.generate_secret(), created_at=self._clock.now())
        self._store.add_device(device)
        return device, totp.provisioning_uri(user.handle, device.secret)

    def confirm_totp(self, user: UserAccount, device_id: str, code: str) -> TotpDevice:
        device = self._store.get_device(device_id)
        if device is None or device.user_id != user.id:
            raise errors.UnknownDevice("no such device for this user")
        if not totp.verify(device.secret, code, self._clock.unix()):
            raise errors.BadCode("TOTP code did not verify")
        device.confirmed = True
        return device

    def has_confirmed_device(self, user_id: str) -> bool:
        return bool(self._store.devices_for(user_id, confirmed_only=True))

    # -- sessions ---------------------------------------------------------------------

    def _new_session(self, user_id: str, second_factor_passed: bool) -> Session:
        session = Session(
            token=secrets.token_hex(32), user_id=user_id,
            second_factor_passed=second_factor_passed,
            expires_at=self._clock.now() + timedelta(hours=self._config.session_idle_hours))
        return self._store.put_session(session)

    def login(self, handle_or_email: str, password: str) -> Session:
        user = self._store.find_user(handle_or_email)
        if (user is None or user.is_agent
                or user.status is not AccountStatus.ACTIVE
                or not verify_password(password, user.password_digest)):
            raise errors.BadCredentials("unknown account or wrong password")
        return self._new_session(user.id, second_factor_passed=False)

    def verify_second_factor(self, session: Session, code: str) -> Session:
        devices = self._store.devices_for(session.user_id, confirmed_only=True)
        if not devices:
            raise errors.SecondFactorRequired(
                "no confirmed authenticator device; enroll one first")
        now = self._clock.unix()
        if not any(totp.verify(d.secret, code, now) for d in devices):
            raise errors.BadCode("TOTP code did not verify")
        upgraded = self._new_session(session.user_id, second_factor_passed=True)
        self._store.drop_session(session.token)
        return upgraded

    def resolve_session(self, token: str) -> Optional[Session]:
        """Valid session or None; touching a live session slides its idle expiry."""
        session = self._store.get_session(token)
        if session is None:
            return None
        now = self._clock.now()
        if now >= session.expires_at:
            self._store.drop_session(token)
            return None
        session.expires_at = now + timedelta(hours=self._config.session_idle_hours)
        return session

    # -- profile -----------------------------------------------------------------------

    def _store_media(self, data: bytes, content_type: str, filename: str = "") -> MediaBlob:
        if len(data) > self._config.media_max_bytes:
            raise errors.MediaTooLarge(
                f"media exceeds {self._config.media_max_bytes} bytes", size=len(data))
        if content_type not in self._config.media_allowed_types:
            raise errors.UnsupportedMediaType(
                f"content type '{content_type}' not allowed", content_type=content_type)
        blob = MediaBlob(id=secrets.token_hex(8), content_type=content_type,
                         size=len(data), data=data, filename=filename)
        return self._store.put_media(blob)

    def update_profile(self, user: UserAccount, display_name: str | None = None,
                       bio: str | None = None,
                       profile_photo: tuple[bytes, str] | None = None,
                       banner_photo: tuple[bytes, str] | None = None) -> UserAccount:
        if display_name is not None:
            if len(display_name) > MAX_DISPLAY_NAME:
                raise errors.ValidationError(
                    f"display name exceeds {MAX_DISPLAY_NAME} characters")
            user.display_name = display_name
        if bio is not None:
            if len(bio) > MAX_BIO:
                raise errors.ValidationError(f"bio exceeds {MAX_BIO} characters")
            user.bio = bio
        if profile_photo is not None:
            user.profile_photo = self._store_media(*profile_photo).id
        if banner_photo is not None:
            user.banner_photo = self._store_media(*banner_photo).id
        return user

    # -- password reset (single tokenized flow) -----------------------------------------

    def request_password_reset(self, email: str) -> Optional[str]:
        """Returns the token (also emailed); None for unknown addresses."""
        user = self._store.user_by_email(email)
        if user is None or user.is_agent:
            return None
        token = secrets.token_hex(16)
        expires = self._clock.now() + timedelta(hours=self._config.password_reset_expiry_hours)
        self._store.put_reset_token(token, user.id, expires)
        if self._emailer is not None:
            self._emailer.send(
                to=user.email, subject="Password reset",
                body=(f"A password reset was requested for @{user.handle}.\n"
                      f"Reset token: {token}\n"
                      f"The token expires in {self._config.password_reset_expiry_hours} hours.\n"),
                kind="password_reset")
        return token

    def reset_password(self, token: str, new_password: str) -> UserAccount:
        if len(new_password) < self._config.password_min_length:
            raise errors.WeakPassword(
                f"password must be at least {self._config.password_min_length} characters")
        user_id = self._store.consume_reset_token(token, self._clock.now())
        user = self._store.get_user(user_id)
        user.password_digest = hash_password(
            new_password, self._config.password_hash_iterations)
        return user
