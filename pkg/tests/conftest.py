from __future__ import annotations

import pytest

from discourse_sandbox import ManualClock, Sandbox, SandboxConfig
from discourse_sandbox.inference import ScriptedInferenceClient
from discourse_sandbox.models import Membership, MembershipStatus, Role

PASSWORD = "correct-horse-9"
CONSENTS = ["platform_rules", "research_participation"]
PDF = (b"%PDF-1.4 stub irb document", "application/pdf")


@pytest.fixture
def clock():
    return ManualClock()


@pytest.fixture
def sandbox(clock, tmp_path):
    config = SandboxConfig(
        password_hash_iterations=500,
        email_sink_dir=str(tmp_path / "outbox"),
        sse_heartbeat_seconds=0.2,
    )
    sb = Sandbox(config, clock=clock,
                 inference_client=ScriptedInferenceClient(["DECISION: none"]))
    sb.admin = sb.seed_admin("platform_admin", "admin@sandbox.test", PASSWORD)
    return sb


class Builder:
    """Shortcuts for the setup every suite needs: accounts, experiments, members."""

    def __init__(self, sandbox: Sandbox):
        self.sandbox = sandbox

    def user(self, handle: str):
        return self.sandbox.identity.register(
            handle, f"{handle}@example.test", PASSWORD, handle.title(), CONSENTS)

    def researcher(self, handle: str):
        request = self.sandbox.identity.request_researcher_access(
            handle, f"{handle}@example.test", PASSWORD, handle.title(), CONSENTS,
            position_title="Research Fellow", institution="Example Institute",
            department="Computational Social Science",
            intent="Study discourse dynamics in a controlled setting.")
        self.sandbox.identity.decide_researcher_request(
            self.sandbox.admin, request.id, approve=True)
        return self.sandbox.store.get_user(request.user_id)

    def experiment(self, owner, title="Discourse Study", description="A study."):
        return self.sandbox.experiments.create_experiment(
            owner, title, description, PDF)

    def add_member(self, experiment, user, role: Role = Role.REGULAR):
        """Direct membership injection for setup-heavy tests."""
        self.sandbox.store.set_membership(Membership(
            user_id=user.id, experiment_id=experiment.id, role=role,
            status=MembershipStatus.ACTIVE, invited_by=experiment.owner,
            joined_at=self.sandbox.clock.now()))
        return user

    def member(self, experiment, handle: str, role: Role = Role.REGULAR):
        return self.add_member(experiment, self.user(handle), role)

    def scope(self, user, experiment):
        return self.sandbox.store.scoped(experiment.id, user.id)

    def full_token(self, user) -> str:
        """2FA-complete session token, minted through the identity service."""
        from discourse_sandbox import totp
        sb = self.sandbox
        device, _ = sb.identity.enroll_totp(user, "test-device")
        sb.identity.confirm_totp(
            user, device.id, totp.totp_at(device.secret, sb.clock.unix()))
        session = sb.identity.login(user.handle, PASSWORD)
        full = sb.identity.verify_second_factor(
            session, totp.totp_at(device.secret, sb.clock.unix()))
        return full.token


@pytest.fixture
def build(sandbox):
    return Builder(sandbox)
