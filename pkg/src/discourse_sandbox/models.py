"""Domain records.

Plain dataclasses, no persistence logic; the store owns uniqueness and
mutation rules, services own workflow rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional


class AccountKind(str, Enum):
    REGULAR = "regular"
    RESEARCHER = "researcher"


class AccountStatus(str, Enum):
    ACTIVE = "active"
    DISABLED = "disabled"


@dataclass
class MediaBlob:
    id: str
    content_type: str
    size: int
    data: bytes
    filename: str = ""


@dataclass
class UserAccount:
    id: str
    handle: str
    email: str
    password_digest: str
    kind: AccountKind
    display_name: str
    bio: str = ""
    profile_photo: Optional[str] = None   # MediaBlob id
    banner_photo: Optional[str] = None
    created_at: datetime = None
    status: AccountStatus = AccountStatus.ACTIVE
    is_agent: bool = False
    is_platform_admin: bool = False


class RequestState(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"


@dataclass
class ResearcherRequest:
    id: str
    user_id: str
    position_title: str
    institution: str
    department: str
    intent: str
    state: RequestState = RequestState.PENDING
    decided_by: Optional[str] = None
    decided_at: Optional[datetime] = None


@dataclass
class TotpDevice:
    id: str
    user_id: str
    label: str
    secret: str                 # base32, 160-bit key
    confirmed: bool = False
    created_at: datetime = None


@dataclass
class ConsentRecord:
    user_id: str
    document_kind: str
    document_version: str
    accepted_at: datetime


@dataclass
class Session:
    token: str
    user_id: str
    second_factor_passed: bool
    expires_at: datetime


# -- experiments --------------------------------------------------------------

class Visibility(str, Enum):
    PRIVATE = "private"


class Role(str, Enum):
    OWNER = "owner"
    COLLABORATOR = "collaborator"
    CONTENT_MODERATOR = "content_moderator"
    REGULAR = "regular"


class MembershipStatus(str, Enum):
    INVITED = "invited"
    ACTIVE = "active"
    REMOVED = "removed"
    BANNED = "banned"


@dataclass
class Experiment:
    id: str
    title: str
    description: str
    visibility: Visibility
    irb_document: str           # MediaBlob id
    owner: str                  # user id
    created_at: datetime
    agent_badge_visible: bool = True


@dataclass
class Membership:
    user_id: str
    experiment_id: str
    role: Role
    status: MembershipStatus
    invited_by: str
    joined_at: Optional[datetime] = None


class InvitationState(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    EXPIRED = "expired"
    REVOKED = "revoked"


@dataclass
class Invitation:
    token: str
    experiment_id: str
    email: str
    role: Role
    expires_at: datetime
    state: InvitationState = InvitationState.PENDING
    invited_by: str = ""


@dataclass
class UserReport:
    id: int
    experiment_id: str
    reporter_id: str
    target_id: str
    reason: str
    created_at: datetime
    resolved: bool = False


# -- discourse ----------------------------------------------------------------

class PostKind(str, Enum):
    ORIGINAL = "original"
    COMMENT = "comment"
    REPOST = "repost"


@dataclass
class Post:
    id: int                     # monotonic per experiment
    experiment_id: str
    author_id: str
    body: str
    kind: PostKind
    parent_id: Optional[int] = None      # required iff kind == COMMENT
    repost_of: Optional[int] = None      # required iff kind == REPOST
    hashtags: frozenset = frozenset()
    created_at: datetime = None
    deleted: bool = False
    deleted_by: Optional[str] = None


@dataclass
class Like:
    user_id: str
    post_id: int
    created_at: datetime


@dataclass
class Follow:
    follower_id: str
    followee_id: str
    experiment_id: str
    created_at: datetime


# -- moderation ---------------------------------------------------------------

class Verdict(str, Enum):
    ALLOW = "allow"
    BLOCK = "block"


@dataclass
class ModerationResult:
    verdict: Verdict
    score: float
    matched_terms: list
    classifier_version: str
    reason: Optional[str] = None


class FlagState(str, Enum):
    OPEN = "open"
    DISMISSED = "dismissed"
    ACTIONED = "actioned"


@dataclass
class Flag:
    id: int
    experiment_id: str
    post_id: int
    raised_by: str
    reason: str
    state: FlagState = FlagState.OPEN
    resolved_by: Optional[str] = None
    resolution: Optional[str] = None     # "dismiss" | "delete"


# -- feeds --------------------------------------------------------------------

@dataclass
class PostView:
    post: Post
    author_handle: str
    author_display_name: str
    author_is_agent: bool
    like_count: int
    repost_count: int
    comment_count: int
    liked_by_caller: bool


@dataclass
class FeedPage:
    items: list
    next_cursor: Optional[str] = None


@dataclass
class TrendingEntry:
    tag: str
    unique_post_count: int


class NotificationKind(str, Enum):
    LIKE = "like"
    COMMENT = "comment"
    REPOST = "repost"
    FOLLOW = "follow"


@dataclass
class Notification:
    id: int                     # monotonic per recipient
    recipient_id: str
    kind: NotificationKind
    actor_id: str
    subject_post_id: Optional[int]       # absent for follows
    experiment_id: str
    created_at: datetime
    seen: bool = False


# -- agents ---------------------------------------------------------------

class TriggerPolicy(str, Enum):
    ALL_POSTS = "all_posts"
    REPLIES_TO_SELF_THREAD = "replies_to_self_thread"
    MENTIONS_ONLY = "mentions_only"


class AgentAction(str, Enum):
    LIKE = "like"
    REPOST = "repost"
    REPLY = "reply"


@dataclass
class AgentProfile:
    id: str
    experiment_id: str
    user_id: str                # the agent's UserAccount (is_agent=True)
    persona_prompt: str
    endpoint_url: Optional[str]
    model_name: str
    api_key_ref: Optional[str]  # vault reference, never exported
    trigger_policy: TriggerPolicy = TriggerPolicy.ALL_POSTS
    actions_enabled: frozenset = frozenset(
        {AgentAction.LIKE, AgentAction.REPOST, AgentAction.REPLY})
    max_thread_depth: int = 4
    min_seconds_between_actions: int = 30
    active: bool = True


class EventKind(str, Enum):
    NEW_POST = "new_post"
    NEW_REPLY = "new_reply"


@dataclass
class DiscourseEvent:
    id: int                     # monotonic per experiment
    experiment_id: str
    kind: EventKind
    post_id: int
    author_id: str
    created_at: datetime


class TaskState(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass
class AgentTask:
    id: int
    experiment_id: str
    event_id: int
    agent_id: str
    state: TaskState = TaskState.QUEUED
    attempts: int = 0
    actions_taken: list = field(default_factory=list)  # {"action": ..., "post_id": ...}
    notes: list = field(default_factory=list)
    created_at: datetime = None


@dataclass
class PromptPayload:
    system_text: str
    context_messages: list      # [{"role": ..., "content": ...}], oldest first
    instruction_text: str

    def total_chars(self) -> int:
        return (len(self.system_text) + len(self.instruction_text)
                + sum(len(m["content"]) for m in self.context_messages))


# -- gateway ------------------------------------------------------------------

class EmailState(str, Enum):
    QUEUED = "queued"
    SENT = "sent"
    FAILED = "failed"


@dataclass
class OutboundEmail:
    id: int
    to: str
    subject: str
    body: str
    kind: str                   # "invitation" | "password_reset"
    queued_at: datetime
    state: EmailState = EmailState.QUEUED
    attempts: int = 0
