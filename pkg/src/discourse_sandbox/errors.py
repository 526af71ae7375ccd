"""Error hierarchy shared by every service module.

Each error carries a stable ``code`` (its class name), a human message and a
``details`` dict; the HTTP gateway serializes all three verbatim, so the class
name doubles as the wire-level error code.
"""

from __future__ import annotations

from typing import Any


class SandboxError(Exception):
    """Base class: ``code`` is the class name, ``http_status`` the REST mapping."""

    http_status = 400

    def __init__(self, message: str = "", **details: Any):
        self.code = type(self).__name__
        self.message = message or self.code
        self.details = details
        super().__init__(self.message)

    def to_payload(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


# -- authentication (401) ---------------------------------------------------

class Unauthorized(SandboxError):
    http_status = 401

class BadCredentials(Unauthorized):
    pass

class SecondFactorRequired(Unauthorized):
    pass

class BadCode(Unauthorized):
    pass


# -- authorization (403) ----------------------------------------------------

class Forbidden(SandboxError):
    http_status = 403

class NotAdmin(Forbidden):
    pass

class NotResearcher(Forbidden):
    pass

class NotAMember(Forbidden):
    pass

class CannotRemoveOwner(Forbidden):
    pass

class EmailMismatch(Forbidden):
    pass


# -- missing resources (404) ------------------------------------------------

class NotFound(SandboxError):
    http_status = 404

class ExperimentNotFound(NotFound):
    pass

class PostNotFound(NotFound):
    pass

class ParentNotFound(NotFound):
    pass

class UnknownDevice(NotFound):
    pass

class UserNotFound(NotFound):
    pass


# -- conflicts (409) ---------------------------------------------------------

class Conflict(SandboxError):
    http_status = 409

class DuplicateHandle(Conflict):
    pass

class DuplicateEmail(Conflict):
    pass

class AlreadyDecided(Conflict):
    pass

class AlreadyMember(Conflict):
    pass

class DuplicatePendingInvitation(Conflict):
    pass

class TokenUsed(Conflict):
    pass

class AlreadyLiked(Conflict):
    pass

class NotLiked(Conflict):
    pass

class AlreadyFollowing(Conflict):
    pass

class NotFollowing(Conflict):
    pass

class FlagNotOpen(Conflict):
    pass


# -- expired tokens (410) -----------------------------------------------------

class TokenExpired(SandboxError):
    http_status = 410


# -- validation (400 / 413 / 415 / 422) ---------------------------------------

class WeakPassword(SandboxError):
    pass

class MissingConsent(SandboxError):
    pass

class EmptyResearcherField(SandboxError):
    pass

class InvalidHandle(SandboxError):
    pass

class InvalidEmail(SandboxError):
    pass

class ValidationError(SandboxError):
    pass

class PublicNotSupported(SandboxError):
    pass

class MissingIrbDocument(SandboxError):
    pass

class SelfReport(SandboxError):
    pass

class SelfFollow(SandboxError):
    pass

class BodyTooLong(SandboxError):
    pass

class BodyEmpty(SandboxError):
    pass

class ParentDeleted(SandboxError):
    pass

class PostDeleted(SandboxError):
    pass

class QueryTooLong(SandboxError):
    pass

class UnknownFilter(SandboxError):
    pass

class InvalidEndpoint(SandboxError):
    pass

class MediaTooLarge(SandboxError):
    http_status = 413

class UnsupportedMediaType(SandboxError):
    http_status = 415


# -- moderation ---------------------------------------------------------------

class ModerationRejected(SandboxError):
    """Raised by the pre-publication content gate; carries the matched terms."""

    http_status = 422

    def __init__(self, message: str = "content rejected by the moderation gate",
                 matched_terms: list[str] | None = None, reason: str | None = None):
        super().__init__(message, matched_terms=matched_terms or [], reason=reason)
        self.matched_terms = matched_terms or []
        self.reason = reason


# -- inference / outbound (502 / 504) ------------------------------------------

class InferenceTimeout(SandboxError):
    http_status = 504

class InferenceHttpError(SandboxError):
    http_status = 502

    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"inference endpoint returned HTTP {status}", status=status)
        self.status = status

class InferenceMalformedResponse(SandboxError):
    http_status = 502

class RateLimited(SandboxError):
    http_status = 429

class ProviderFailure(SandboxError):
    http_status = 502
