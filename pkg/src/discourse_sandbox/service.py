"""The assembled sandbox: one object wiring store, clock, moderation screen,
event bus, email provider, inference client and every service module.

    sandbox = Sandbox()
    admin = sandbox.seed_admin("admin", "admin@example.org", "a-long-password")

Tests and demos inject a ManualClock, a scripted inference client, fast
password hashing, or a custom moderation screen through the constructor.
"""

from __future__ import annotations

import secrets

from .agents import AgentService
from .clock import Clock, SystemClock
from .config import SandboxConfig
from .discourse import DiscourseService
from .emailer import Emailer, SinkProvider, SmtpProvider
from .events import EventBus
from .experiments import ExperimentService
from .exports import ExportService
from .feeds import FeedService
from .identity import IdentityService, hash_password
from .inference import HttpInferenceClient, ScriptedInferenceClient
from .models import AccountKind, UserAccount
from .moderation import LexiconScreen, ModerationService, check_content
from .store import InMemoryStore


class Sandbox:
    def __init__(self, config: SandboxConfig | None = None,
                 clock: Clock | None = None,
                 inference_client=None,
                 screen=None,
                 email_provider=None):
        self.config = config or SandboxConfig()
        self.clock = clock or SystemClock()
        self.store = InMemoryStore(secret_key=self.config.secret_key)
        self.bus = EventBus(buffer_size=self.config.sse_buffer_size)
        self.screen = screen or LexiconScreen.from_file(self.config.moderation_lexicon_path)

        if email_provider is None:
            if self.config.email_mode == "smtp":
                email_provider = SmtpProvider(self.config.smtp_url)
            else:
                email_provider = SinkProvider(self.config.email_sink_dir)
        self.emailer = Emailer(email_provider, self.store, self.clock,
                               max_attempts=self.config.email_max_attempts)

        if inference_client is None:
            if self.config.inference_mode == "stub":
                inference_client = ScriptedInferenceClient.from_script(
                    self.config.inference_stub_script)
            else:
                inference_client = HttpInferenceClient(
                    timeout_seconds=self.config.inference_timeout_seconds)
        self.inference = inference_client

        self.identity = IdentityService(self.store, self.clock, self.config,
                                        emailer=self.emailer)
        self.experiments = ExperimentService(self.store, self.clock, self.config,
                                             self.emailer)
        self.discourse = DiscourseService(self.store, self.clock, self.screen,
                                          self.bus,
                                          threshold=self.config.moderation_threshold)
        self.feeds = FeedService(self.store, self.clock,
                                 page_size=self.config.feed_page_size)
        self.agents = AgentService(self.store, self.clock, self.config,
                                   self.discourse, self.inference)
        self.moderation = ModerationService(self.discourse)
        self.exports = ExportService(self.store, self.clock,
                                     classifier_version=self.screen.version)

        # committed posts flow straight into the agent dispatcher
        self.discourse.on_event(self.agents.dispatch)

    # -- conveniences ------------------------------------------------------------

    def seed_admin(self, handle: str, email: str, password: str) -> UserAccount:
        """Deploy-time platform administrator who vets researcher requests."""
        return self.store.create_user(
            handle=handle, email=email,
            password_digest=hash_password(password, self.config.password_hash_iterations),
            kind=AccountKind.REGULAR, display_name=handle,
            now=self.clock.now(), is_platform_admin=True)

    def scope_for(self, user: UserAccount, experiment_id: str):
        """Membership-checked handle to one experiment's content."""
        return self.store.scoped(experiment_id, user.id)

    def check_content(self, body: str):
        return check_content(body, self.screen, self.config.moderation_threshold)
