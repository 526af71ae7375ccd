"""Registration, consent capture, researcher vetting, login + 2FA, profile."""

from __future__ import annotations

import pytest

from discourse_sandbox import errors, totp
from discourse_sandbox.models import AccountKind, RequestState
from tests.conftest import CONSENTS, PASSWORD


def test_register_happy_path(sandbox):
    user = sandbox.identity.register("ada", "ada@x.org", PASSWORD, "Ada", CONSENTS)
    assert user.kind is AccountKind.REGULAR
    assert user.handle == "ada"
    assert user.email == "ada@x.org"
    assert user.created_at == sandbox.clock.now()


def test_register_duplicate_handle(sandbox, build):
    build.user("ada")
    with pytest.raises(errors.DuplicateHandle):
        sandbox.identity.register("ada", "other@x.org", PASSWORD, "Ada2", CONSENTS)


def test_register_duplicate_handle_case_insensitive(sandbox, build):
    build.user("ada")
    with pytest.raises(errors.InvalidHandle):
        # uppercase fails the handle grammar before uniqueness is even reached
        sandbox.identity.register("ADA", "other@x.org", PASSWORD, "A", CONSENTS)


def test_register_duplicate_email(sandbox, build):
    build.user("ada")
    with pytest.raises(errors.DuplicateEmail):
        sandbox.identity.register("notada", "ADA@example.test", PASSWORD, "A", CONSENTS)


def test_register_weak_password(sandbox):
    with pytest.raises(errors.WeakPassword):
        sandbox.identity.register("ada", "ada@x.org", "short", "Ada", CONSENTS)


def test_register_missing_consent_names_the_document(sandbox):
    with pytest.raises(errors.MissingConsent) as exc:
        sandbox.identity.register("ada", "ada@x.org", PASSWORD, "Ada",
                                  ["platform_rules"])
    assert exc.value.details["document_kind"] == "research_participation"


def test_consent_records_stored_with_versions(sandbox, build):
    user = build.user("ada")
    records = sandbox.store.consents_for(user.id)
    assert {r.document_kind for r in records} == set(CONSENTS)
    assert all(r.document_version == "1.0" for r in records)


def test_researcher_request_flow(sandbox, build):
    request = sandbox.identity.request_researcher_access(
        "meera", "meera@lab.test", PASSWORD, "Meera", CONSENTS,
        "Professor", "Example University", "Sociology", "Run discourse studies.")
    assert request.state is RequestState.PENDING
    user = sandbox.store.get_user(request.user_id)
    assert user.kind is AccountKind.REGULAR

    decided = sandbox.identity.decide_researcher_request(
        sandbox.admin, request.id, approve=True)
    assert decided.state is RequestState.APPROVED
    assert sandbox.store.get_user(request.user_id).kind is AccountKind.RESEARCHER


def test_researcher_request_empty_field(sandbox):
    with pytest.raises(errors.EmptyResearcherField):
        sandbox.identity.request_researcher_access(
            "meera", "meera@lab.test", PASSWORD, "Meera", CONSENTS,
            "Professor", "Example University", "Sociology", "   ")


def test_researcher_request_rejection_keeps_kind(sandbox):
    request = sandbox.identity.request_researcher_access(
        "nope", "nope@lab.test", PASSWORD, "Nope", CONSENTS,
        "Student", "Uni", "Dept", "testing")
    sandbox.identity.decide_researcher_request(sandbox.admin, request.id, approve=False)
    assert sandbox.store.get_user(request.user_id).kind is AccountKind.REGULAR


def test_researcher_request_decided_twice(sandbox):
    request = sandbox.identity.request_researcher_access(
        "twice", "twice@lab.test", PASSWORD, "Twice", CONSENTS,
        "Dr", "Uni", "Dept", "testing")
    sandbox.identity.decide_researcher_request(sandbox.admin, request.id, approve=True)
    with pytest.raises(errors.AlreadyDecided):
        sandbox.identity.decide_researcher_request(sandbox.admin, request.id, approve=False)


def test_decide_requires_platform_admin(sandbox, build):
    request = sandbox.identity.request_researcher_access(
        "who", "who@lab.test", PASSWORD, "Who", CONSENTS,
        "Dr", "Uni", "Dept", "testing")
    random_user = build.user("bystander")
    with pytest.raises(errors.NotAdmin):
        sandbox.identity.decide_researcher_request(random_user, request.id, True)


# -- 2FA ------------------------------------------------------------------------


def test_enroll_and_confirm_totp(sandbox, build, clock):
    user = build.user("ada")
    device, uri = sandbox.identity.enroll_totp(user, "phone")
    assert uri == f"otpauth://totp/PDS:ada?secret={device.secret}&period=30&digits=6"
    assert not device.confirmed
    code = totp.totp_at(device.secret, clock.unix())
    confirmed = sandbox.identity.confirm_totp(user, device.id, code)
    assert confirmed.confirmed


def test_confirm_with_stale_code_fails(sandbox, build, clock):
    user = build.user("ada")
    device, _ = sandbox.identity.enroll_totp(user, "phone")
    stale = totp.totp_at(device.secret, clock.unix() - 60)  # two steps ago
    current_window = {totp.totp_at(device.secret, clock.unix() + d)
                      for d in (-30, 0, 30)}
    if stale in current_window:
        pytest.skip("code collision between steps")
    with pytest.raises(errors.BadCode):
        sandbox.identity.confirm_totp(user, device.id, stale)


def test_confirm_per_step_window(sandbox, build, clock):
    user = build.user("ada")
    device, _ = sandbox.identity.enroll_totp(user, "phone")
    previous = totp.totp_at(device.secret, clock.unix() - 30)  # one step ago, in window
    assert sandbox.identity.confirm_totp(user, device.id, previous).confirmed


def test_confirm_other_users_device(sandbox, build, clock):
    ada, eve = build.user("ada"), build.user("eve")
    device, _ = sandbox.identity.enroll_totp(ada, "phone")
    code = totp.totp_at(device.secret, clock.unix())
    with pytest.raises(errors.UnknownDevice):
        sandbox.identity.confirm_totp(eve, device.id, code)


# -- login ----------------------------------------------------------------------


def _enrolled_user(sandbox, build, clock, handle="ada"):
    user = build.user(handle)
    device, _ = sandbox.identity.enroll_totp(user, "phone")
    sandbox.identity.confirm_totp(user, device.id, totp.totp_at(device.secret, clock.unix()))
    return user, device


def test_login_then_second_factor(sandbox, build, clock):
    user, device = _enrolled_user(sandbox, build, clock)
    session = sandbox.identity.login("ada", PASSWORD)
    assert session.second_factor_passed is False
    full = sandbox.identity.verify_second_factor(
        session, totp.totp_at(device.secret, clock.unix()))
    assert full.second_factor_passed is True
    assert full.token != session.token  # upgrade mints a new token
    assert sandbox.store.get_session(session.token) is None


def test_login_by_email(sandbox, build, clock):
    _enrolled_user(sandbox, build, clock)
    session = sandbox.identity.login("ada@example.test", PASSWORD)
    assert session.user_id


def test_login_wrong_password(sandbox, build):
    build.user("ada")
    with pytest.raises(errors.BadCredentials):
        sandbox.identity.login("ada", "wrong-password-123")


def test_login_without_device_cannot_pass_second_factor(sandbox, build):
    build.user("ada")
    session = sandbox.identity.login("ada", PASSWORD)
    with pytest.raises(errors.SecondFactorRequired):
        sandbox.identity.verify_second_factor(session, "000000")


def test_second_factor_bad_code(sandbox, build, clock):
    user, device = _enrolled_user(sandbox, build, clock)
    session = sandbox.identity.login("ada", PASSWORD)
    bad = totp.totp_at(device.secret, clock.unix() + 300)   # ten steps ahead
    if bad == totp.totp_at(device.secret, clock.unix()):
        pytest.skip("code collision")
    with pytest.raises(errors.BadCode):
        sandbox.identity.verify_second_factor(session, bad)


def test_sessions_expire_after_idle(sandbox, build, clock):
    _enrolled_user(sandbox, build, clock)
    session = sandbox.identity.login("ada", PASSWORD)
    clock.advance(23 * 3600)
    assert sandbox.identity.resolve_session(session.token) is not None  # touch slides expiry
    clock.advance(23 * 3600)
    assert sandbox.identity.resolve_session(session.token) is not None
    clock.advance(25 * 3600)
    assert sandbox.identity.resolve_session(session.token) is None


# -- profile ---------------------------------------------------------------------


def test_bio_boundary(sandbox, build):
    user = build.user("ada")
    sandbox.identity.update_profile(user, bio="x" * 500)
    assert len(user.bio) == 500
    with pytest.raises(errors.ValidationError):
        sandbox.identity.update_profile(user, bio="x" * 501)


def test_media_too_large(sandbox, build):
    user = build.user("ada")
    with pytest.raises(errors.MediaTooLarge):
        sandbox.identity.update_profile(
            user, profile_photo=(b"\x89PNG" + b"0" * (3 * 1024 * 1024), "image/png"))


def test_media_wrong_type(sandbox, build):
    user = build.user("ada")
    with pytest.raises(errors.UnsupportedMediaType):
        sandbox.identity.update_profile(user, banner_photo=(b"GIF89a", "image/gif"))


def test_profile_photo_upload(sandbox, build):
    user = build.user("ada")
    sandbox.identity.update_profile(user, profile_photo=(b"\x89PNG000", "image/png"))
    blob = sandbox.store.get_media(user.profile_photo)
    assert blob.content_type == "image/png"


def test_partial_update_changes_only_given_fields(sandbox, build):
    user = build.user("ada")
    original_name = user.display_name
    sandbox.identity.update_profile(user, bio="hello")
    assert user.display_name == original_name
    assert user.bio == "hello"


# -- password reset ----------------------------------------------------------------


def test_password_reset_flow(sandbox, build):
    build.user("ada")
    token = sandbox.identity.request_password_reset("ada@example.test")
    assert token
    sandbox.identity.reset_password(token, "a-brand-new-password")
    assert sandbox.identity.login("ada", "a-brand-new-password")
    with pytest.raises(errors.BadCredentials):
        sandbox.identity.login("ada", PASSWORD)


def test_password_reset_token_single_use(sandbox, build):
    build.user("ada")
    token = sandbox.identity.request_password_reset("ada@example.test")
    sandbox.identity.reset_password(token, "a-brand-new-password")
    with pytest.raises(errors.TokenUsed):
        sandbox.identity.reset_password(token, "another-new-password")


def test_password_reset_unknown_email_is_silent(sandbox):
    assert sandbox.identity.request_password_reset("ghost@example.test") is None
