"""Runtime configuration.

Deployment settings come from ``PDS_*`` environment variables; everything else
is a constructor argument with a sane default so tests and demos can tune
behavior (fast password hashing, short heartbeats, manual clocks) without
touching the environment.
"""

from __future__ import annotations

import os
import secrets
from dataclasses import dataclass, field
from importlib import resources


def _default_lexicon_path() -> str:
    return str(resources.files("discourse_sandbox").joinpath("data/lexicon.txt"))


@dataclass
class ConsentDocument:
    kind: str               # "platform_rules" | "research_participation"
    version: str
    text: str


DEFAULT_CONSENT_DOCUMENTS = {
    "platform_rules": ConsentDocument(
        kind="platform_rules",
        version="1.0",
        text=(
            "Sandbox rules: interactions are moderated in line with the stated research "
            "objectives; do not share sensitive or personally identifiable information; "
            "automated accounts take part and may or may not be labeled; keep your "
            "credentials private, two-factor authentication is mandatory."
        ),
    ),
    "research_participation": ConsentDocument(
        kind="research_participation",
        version="1.0",
        text=(
            "Research participation agreement: platform interactions, posts, comments and "
            "usage patterns are recorded and analyzed for research purposes; findings are "
            "anonymized before release; research follows institutional review guidelines."
        ),
    ),
}


@dataclass
class SandboxConfig:
    base_url: str = "http://localhost:8000"
    db_url: str = "memory://"
    secret_key: str = field(default_factory=lambda: secrets.token_hex(32))

    # email dispatch: "sink" writes files into email_sink_dir, "smtp" uses smtp_url
    email_mode: str = "sink"
    email_sink_dir: str = "./outbox"
    smtp_url: str = ""
    email_max_attempts: int = 3

    # inference: "live" talks HTTP, "stub" replays a script file in-process
    inference_mode: str = "live"
    inference_default_url: str = ""
    inference_default_key: str = ""
    inference_stub_script: str = ""
    inference_timeout_seconds: float = 60.0

    moderation_lexicon_path: str = field(default_factory=_default_lexicon_path)
    moderation_threshold: float = 0.5

    password_min_length: int = 10
    password_hash_iterations: int = 60_000
    session_idle_hours: int = 24
    invitation_expiry_days: int = 7
    password_reset_expiry_hours: int = 2

    media_max_bytes: int = 2 * 1024 * 1024
    media_allowed_types: tuple = ("image/png", "image/jpeg")

    feed_page_size: int = 20
    sse_buffer_size: int = 500
    sse_heartbeat_seconds: float = 25.0

    consent_documents: dict = field(
        default_factory=lambda: dict(DEFAULT_CONSENT_DOCUMENTS))

    @classmethod
    def from_env(cls, env: dict | None = None) -> "SandboxConfig":
        env = dict(os.environ if env is None else env)
        cfg = cls()
        cfg.base_url = env.get("PDS_BASE_URL", cfg.base_url)
        cfg.db_url = env.get("PDS_DB_URL", cfg.db_url)
        cfg.secret_key = env.get("PDS_SECRET_KEY", cfg.secret_key)
        cfg.email_mode = env.get("PDS_EMAIL_MODE", cfg.email_mode)
        cfg.smtp_url = env.get("PDS_SMTP_URL", cfg.smtp_url)
        cfg.email_sink_dir = env.get("PDS_EMAIL_SINK_DIR", cfg.email_sink_dir)
        cfg.inference_default_url = env.get("PDS_INFERENCE_DEFAULT_URL", cfg.inference_default_url)
        cfg.inference_default_key = env.get("PDS_INFERENCE_DEFAULT_KEY", cfg.inference_default_key)
        cfg.inference_mode = env.get("PDS_INFERENCE_MODE", cfg.inference_mode)
        cfg.inference_stub_script = env.get("PDS_INFERENCE_STUB_SCRIPT", cfg.inference_stub_script)
        cfg.moderation_lexicon_path = env.get("PDS_MODERATION_LEXICON", cfg.moderation_lexicon_path)
        return cfg
