"""Outbound email behind a provider abstraction.

Dev/test deployments use the sink provider, which drops each message as a
plain-text file into a local directory; production points at SMTP. Delivery
failures are retried, then surfaced as a failed record (invitations stay
pending and re-sendable).
"""

from __future__ import annotations

import smtplib
from email.message import EmailMessage
from pathlib import Path
from urllib.parse import urlparse

from . import errors
from .clock import Clock
from .models import EmailState, OutboundEmail
from .store import InMemoryStore


class SinkProvider:
    def __init__(self, directory: str):
        self.directory = Path(directory)

    def deliver(self, email: OutboundEmail) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        name = f"{email.id:05d}_{email.kind}.txt"
        text = (f"To: {email.to}\nSubject: {email.subject}\n"
                f"Kind: {email.kind}\n\n{email.body}")
        (self.directory / name).write_text(text, encoding="utf-8")


class SmtpProvider:
    def __init__(self, smtp_url: str, sender: str = "sandbox@localhost"):
        parsed = urlparse(smtp_url)
        self.host = parsed.hostname or "localhost"
        self.port = parsed.port or 25
        self.sender = sender

    def deliver(self, email: OutboundEmail) -> None:
        message = EmailMessage()
        message["From"] = self.sender
        message["To"] = email.to
        message["Subject"] = email.subject
        message.set_content(email.body)
        with smtplib.SMTP(self.host, self.port, timeout=10) as client:
            client.send_message(message)


class Emailer:
    def __init__(self, provider, store: InMemoryStore, clock: Clock,
                 max_attempts: int = 3):
        self.provider = provider
        self._store = store
        self._clock = clock
        self._max_attempts = max_attempts

    def send(self, to: str, subject: str, body: str, kind: str) -> OutboundEmail:
        email = self._store.add_email(OutboundEmail(
            id=0, to=to, subject=subject, body=body, kind=kind,
            queued_at=self._clock.now()))
        last_error: Exception | None = None
        for _ in range(self._max_attempts):
            email.attempts += 1
            try:
                self.provider.deliver(email)
                email.state = EmailState.SENT
                return email
            except Exception as exc:
                last_error = exc
        email.state = EmailState.FAILED
        raise errors.ProviderFailure(
            f"email delivery failed after {email.attempts} attempts: {last_error}")
