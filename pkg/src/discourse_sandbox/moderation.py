"""Pre-publication content screening and the flag/review workflow.

Every post body, human- or agent-authored, passes ``check_content`` before it
is stored. The default screen is a deterministic lexicon matcher (word
boundary, case-folded); the ``ContentScreen`` protocol leaves room for a
learned scorer later. A screen that raises is treated as unavailable and the
gate fails closed.
"""

from __future__ import annotations

import hashlib
import re
from pathlib import Path
from typing import Protocol

from . import errors
from .models import Flag, FlagState, ModerationResult, Post, PostKind, Verdict
from .permissions import Action, FLAGGING_ROLES, can

BLOCK_THRESHOLD = 0.5


class ContentScreen(Protocol):
    version: str

    def score(self, body: str) -> ModerationResult: ...


class LexiconScreen:
    """Word-boundary, case-folded term matcher; score is 0.0 or 1.0."""

    def __init__(self, terms: list[str], version: str | None = None):
        self.terms = [t.lower() for t in terms if t.strip()]
        fingerprint = hashlib.sha1("\n".join(sorted(self.terms)).encode("utf-8")).hexdigest()[:8]
        self.version = version or f"lexicon-{fingerprint}"
        # one alternation, longest terms first so multi-word entries win
        escaped = sorted((re.escape(t) for t in self.terms), key=len, reverse=True)
        self._pattern = re.compile(
            r"(?<![0-9A-Za-z_])(?:" + "|".join(escaped) + r")(?![0-9A-Za-z_])",
            re.IGNORECASE) if escaped else None

    @classmethod
    def from_file(cls, path: str | Path) -> "LexiconScreen":
        terms = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                terms.append(line)
        return cls(terms)

    def score(self, body: str) -> ModerationResult:
        matched: list[str] = []
        if self._pattern is not None:
            matched = sorted({m.lower() for m in self._pattern.findall(body)})
        hit = bool(matched)
        return ModerationResult(
            verdict=Verdict.BLOCK if hit else Verdict.ALLOW,
            score=1.0 if hit else 0.0,
            matched_terms=matched,
            classifier_version=self.version,
        )


class BrokenScreen:
    """Test double for the fail-closed path: always raises."""

    version = "broken"

    def score(self, body: str) -> ModerationResult:
        raise RuntimeError("classifier offline")


def check_content(body: str, screen: ContentScreen,
                  threshold: float = BLOCK_THRESHOLD) -> ModerationResult:
    """Deterministic verdict for a body under one classifier version.

    Blocks when the score reaches the threshold or the lexicon matched; a
    failing classifier blocks everything (fail-closed) with the reason
    ``classifier_unavailable``.
    """
    try:
        result = screen.score(body)
    except Exception:
        return ModerationResult(
            verdict=Verdict.BLOCK,
            score=1.0,
            matched_terms=[],
            classifier_version=getattr(screen, "version", "unknown"),
            reason="classifier_unavailable",
        )
    if result.score >= threshold or result.matched_terms:
        result.verdict = Verdict.BLOCK
    return result


class ModerationService:
    """Moderator-facing flag/review workflow on top of the discourse module."""

    def __init__(self, discourse):
        self._discourse = discourse

    def flag_post(self, scope, post_id: int, reason: str) -> Flag:
        role = scope.membership.role
        if role not in FLAGGING_ROLES:
            raise errors.Forbidden("regular members report users, not posts",
                                   role=role.value, action="flag_post")
        post = scope.get_post(post_id)
        if post is None:
            raise errors.PostNotFound("no such post")
        return scope.add_flag(post_id, scope.membership.user_id, reason)

    def resolve_flag(self, scope, flag_id: int, action: str) -> Flag:
        if action not in ("dismiss", "delete"):
            raise errors.ValidationError("action must be 'dismiss' or 'delete'")
        flag = scope.get_flag(flag_id)
        if flag is None:
            raise errors.NotFound("no such flag")
        post = scope.get_post(flag.post_id)
        needed = (Action.DELETE_COMMENT if post is not None and post.kind is PostKind.COMMENT
                  else Action.DELETE_THREAD)
        if not can(scope.membership.role, needed):
            raise errors.Forbidden("role may not resolve flags",
                                   role=scope.membership.role.value, action=needed)
        if flag.state is not FlagState.OPEN:
            raise errors.FlagNotOpen("flag already resolved")
        if action == "delete":
            self._discourse.delete_post(scope, flag.post_id)
        return scope.resolve_flag(flag_id, scope.membership.user_id, action)
