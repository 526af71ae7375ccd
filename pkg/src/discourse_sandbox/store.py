"""In-memory persistence with hard per-experiment isolation.

All experiment-local records (posts, likes, follows, events, tasks, agents,
flags, reports) live inside one ``ExperimentData`` bucket and are reachable
only through an ``ExperimentScope`` bound to that single bucket: the scope API
has no parameter through which another experiment's data could be addressed.

A single re-entrant lock serializes mutations, so uniqueness checks
(handle, email, one-like-per-user, single-use invitation tokens) are atomic
check-and-set operations rather than read-then-write races. Reads copy the
row references they need under the lock and compute outside it.
"""

from __future__ import annotations

import base64
import hashlib
import secrets
import threading
from datetime import datetime
from typing import Iterable, Optional

from cryptography.fernet import Fernet

from . import errors
from .models import (
    AccountKind, AgentProfile, AgentTask, ConsentRecord,
    DiscourseEvent, EventKind, Experiment, Flag, FlagState, Follow, Invitation,
    InvitationState, Like, MediaBlob, Membership, MembershipStatus,
    Notification, NotificationKind, OutboundEmail, Post, PostKind,
    ResearcherRequest, RequestState, Session, TaskState, TotpDevice,
    UserAccount, UserReport,
)


def _new_id(nbytes: int = 8) -> str:
    return secrets.token_hex(nbytes)


class SecretVault:
    """Encrypted-at-rest storage for agent API keys; values never leave via export."""

    def __init__(self, secret_key: str):
        digest = hashlib.sha256(secret_key.encode("utf-8")).digest()
        self._fernet = Fernet(base64.urlsafe_b64encode(digest))
        self._values: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def put(self, value: str) -> str:
        ref = "key_" + _new_id(8)
        token = self._fernet.encrypt(value.encode("utf-8"))
        with self._lock:
            self._values[ref] = token
        return ref

    def get(self, ref: str) -> str:
        with self._lock:
            token = self._values[ref]
        return self._fernet.decrypt(token).decode("utf-8")


class ExperimentData:
    """Every record belonging to exactly one experiment."""

    def __init__(self, experiment: Experiment):
        self.experiment = experiment
        self.posts: dict[int, Post] = {}
        self.next_post_id = 1
        self.likes: dict[tuple, Like] = {}            # (user_id, post_id)
        self.follows: dict[tuple, Follow] = {}        # (follower, followee)
        self.reports: list[UserReport] = []
        self.next_report_id = 1
        self.flags: dict[int, Flag] = {}
        self.next_flag_id = 1
        self.agents: dict[str, AgentProfile] = {}
        self.events: dict[int, DiscourseEvent] = {}
        self.next_event_id = 1
        self.tasks: dict[int, AgentTask] = {}
        self.next_task_id = 1
        self.task_index: dict[tuple, int] = {}        # (event_id, agent_id) -> task id
        self.agent_last_action: dict[str, datetime] = {}


class ExperimentScope:
    """Read/write handle confined to one experiment's data bucket."""

    def __init__(self, store: "InMemoryStore", data: ExperimentData,
                 membership: Optional[Membership]):
        self._store = store
        self._data = data
        self._lock = store._lock
        self.membership = membership

    @property
    def experiment(self) -> Experiment:
        return self._data.experiment

    # -- posts ---------------------------------------------------------------

    def add_post(self, author_id: str, body: str, kind: PostKind,
                 hashtags: frozenset, now: datetime,
                 parent_id: int | None = None,
                 repost_of: int | None = None) -> Post:
        with self._lock:
            post = Post(
                id=self._data.next_post_id,
                experiment_id=self.experiment.id,
                author_id=author_id,
                body=body,
                kind=kind,
                parent_id=parent_id,
                repost_of=repost_of,
                hashtags=hashtags,
                created_at=now,
            )
            self._data.next_post_id += 1
            self._data.posts[post.id] = post
            return post

    def get_post(self, post_id: int) -> Optional[Post]:
        with self._lock:
            return self._data.posts.get(post_id)

    def posts(self) -> list[Post]:
        with self._lock:
            return list(self._data.posts.values())

    def mark_deleted(self, post_id: int, actor_id: str) -> Post:
        with self._lock:
            post = self._data.posts[post_id]
            post.deleted = True
            post.deleted_by = actor_id
            return post

    def ancestors(self, post_id: int) -> list[Post]:
        """Parent chain of a post, root first, excluding the post itself."""
        with self._lock:
            chain: list[Post] = []
            current = self._data.posts.get(post_id)
            while current is not None and current.parent_id is not None:
                current = self._data.posts.get(current.parent_id)
                if current is None:
                    break
                chain.append(current)
            chain.reverse()
            return chain

    def thread_depth(self, post_id: int) -> int:
        """Root posts sit at depth 0."""
        return len(self.ancestors(post_id))

    def is_visible(self, post: Post) -> bool:
        """Not deleted and no deleted ancestor (thread deletion hides subtrees)."""
        if post.deleted:
            return False
        with self._lock:
            current = post
            while current.parent_id is not None:
                current = self._data.posts.get(current.parent_id)
                if current is None:
                    return False
                if current.deleted:
                    return False
        return True

    # -- likes / follows -------------------------------------------------------

    def add_like(self, user_id: str, post_id: int, now: datetime) -> Like:
        with self._lock:
            key = (user_id, post_id)
            if key in self._data.likes:
                raise errors.AlreadyLiked("post already liked")
            like = Like(user_id=user_id, post_id=post_id, created_at=now)
            self._data.likes[key] = like
            return like

    def remove_like(self, user_id: str, post_id: int) -> None:
        with self._lock:
            if self._data.likes.pop((user_id, post_id), None) is None:
                raise errors.NotLiked("post not liked")

    def likes(self) -> list[Like]:
        with self._lock:
            return list(self._data.likes.values())

    def has_liked(self, user_id: str, post_id: int) -> bool:
        with self._lock:
            return (user_id, post_id) in self._data.likes

    def add_follow(self, follower_id: str, followee_id: str, now: datetime) -> Follow:
        with self._lock:
            key = (follower_id, followee_id)
            if key in self._data.follows:
                raise errors.AlreadyFollowing("already following")
            follow = Follow(follower_id=follower_id, followee_id=followee_id,
                            experiment_id=self.experiment.id, created_at=now)
            self._data.follows[key] = follow
            return follow

    def remove_follow(self, follower_id: str, followee_id: str) -> None:
        with self._lock:
            if self._data.follows.pop((follower_id, followee_id), None) is None:
                raise errors.NotFollowing("not following")

    def follows(self) -> list[Follow]:
        with self._lock:
            return list(self._data.follows.values())

    def followees_of(self, user_id: str) -> set[str]:
        with self._lock:
            return {f.followee_id for f in self._data.follows.values()
                    if f.follower_id == user_id}

    # -- reports / flags -------------------------------------------------------

    def add_report(self, reporter_id: str, target_id: str, reason: str,
                   now: datetime) -> UserReport:
        with self._lock:
            report = UserReport(
                id=self._data.next_report_id,
                experiment_id=self.experiment.id,
                reporter_id=reporter_id,
                target_id=target_id,
                reason=reason,
                created_at=now,
            )
            self._data.next_report_id += 1
            self._data.reports.append(report)
            return report

    def reports(self) -> list[UserReport]:
        with self._lock:
            return list(self._data.reports)

    def add_flag(self, post_id: int, raised_by: str, reason: str) -> Flag:
        with self._lock:
            flag = Flag(
                id=self._data.next_flag_id,
                experiment_id=self.experiment.id,
                post_id=post_id,
                raised_by=raised_by,
                reason=reason,
            )
            self._data.next_flag_id += 1
            self._data.flags[flag.id] = flag
            return flag

    def get_flag(self, flag_id: int) -> Optional[Flag]:
        with self._lock:
            return self._data.flags.get(flag_id)

    def resolve_flag(self, flag_id: int, actor_id: str, resolution: str) -> Flag:
        """Atomic open -> dismissed/actioned transition."""
        with self._lock:
            flag = self._data.flags[flag_id]
            if flag.state is not FlagState.OPEN:
                raise errors.FlagNotOpen("flag already resolved")
            flag.state = (FlagState.ACTIONED if resolution == "delete"
                          else FlagState.DISMISSED)
            flag.resolved_by = actor_id
            flag.resolution = resolution
            return flag

    def flags_list(self) -> list[Flag]:
        with self._lock:
            return list(self._data.flags.values())

    # -- agents ----------------------------------------------------------------

    def add_agent(self, profile: AgentProfile) -> AgentProfile:
        with self._lock:
            self._data.agents[profile.id] = profile
            return profile

    def get_agent(self, agent_id: str) -> Optional[AgentProfile]:
        with self._lock:
            return self._data.agents.get(agent_id)

    def agents(self) -> list[AgentProfile]:
        with self._lock:
            return list(self._data.agents.values())

    def agent_last_action(self, agent_id: str) -> Optional[datetime]:
        with self._lock:
            return self._data.agent_last_action.get(agent_id)

    def record_agent_action(self, agent_id: str, now: datetime) -> None:
        with self._lock:
            self._data.agent_last_action[agent_id] = now

    # -- events / tasks ----------------------------------------------------------

    def add_event(self, kind: EventKind, post_id: int, author_id: str,
                  now: datetime) -> DiscourseEvent:
        with self._lock:
            event = DiscourseEvent(
                id=self._data.next_event_id,
                experiment_id=self.experiment.id,
                kind=kind,
                post_id=post_id,
                author_id=author_id,
                created_at=now,
            )
            self._data.next_event_id += 1
            self._data.events[event.id] = event
            return event

    def get_event(self, event_id: int) -> Optional[DiscourseEvent]:
        with self._lock:
            return self._data.events.get(event_id)

    def add_task(self, event_id: int, agent_id: str, now: datetime,
                 state: TaskState = TaskState.QUEUED) -> AgentTask:
        """At most one task per (event, agent); repeat calls return the existing one."""
        with self._lock:
            key = (event_id, agent_id)
            existing = self._data.task_index.get(key)
            if existing is not None:
                return self._data.tasks[existing]
            task = AgentTask(
                id=self._data.next_task_id,
                experiment_id=self.experiment.id,
                event_id=event_id,
                agent_id=agent_id,
                state=state,
                created_at=now,
            )
            self._data.next_task_id += 1
            self._data.tasks[task.id] = task
            self._data.task_index[key] = task.id
            return task

    def get_task(self, task_id: int) -> Optional[AgentTask]:
        with self._lock:
            return self._data.tasks.get(task_id)

    def tasks(self) -> list[AgentTask]:
        with self._lock:
            return list(self._data.tasks.values())

    def claim_task(self, task_id: int) -> bool:
        """queued -> running; False when someone else holds it or it is terminal."""
        with self._lock:
            task = self._data.tasks[task_id]
            if task.state is not TaskState.QUEUED:
                return False
            task.state = TaskState.RUNNING
            return True

    def finish_task(self, task_id: int, state: TaskState) -> AgentTask:
        with self._lock:
            task = self._data.tasks[task_id]
            if task.state in (TaskState.DONE, TaskState.FAILED, TaskState.SKIPPED):
                return task     # terminal states immutable
            task.state = state
            return task


class InMemoryStore:
    """Global tables plus the per-experiment buckets."""

    def __init__(self, secret_key: str = ""):
        self._lock = threading.RLock()
        self.vault = SecretVault(secret_key or _new_id(16))

        self.users: dict[str, UserAccount] = {}
        self._handle_index: dict[str, str] = {}
        self._email_index: dict[str, str] = {}
        self.sessions: dict[str, Session] = {}
        self.devices: dict[str, TotpDevice] = {}
        self.consents: dict[str, list[ConsentRecord]] = {}
        self.researcher_requests: dict[str, ResearcherRequest] = {}
        self.media: dict[str, MediaBlob] = {}
        self.invitations: dict[str, Invitation] = {}
        self.memberships: dict[tuple, Membership] = {}   # (user_id, experiment_id)
        self.notifications: dict[str, list[Notification]] = {}
        self._notification_seq: dict[str, int] = {}
        self.emails: list[OutboundEmail] = []
        self.reset_tokens: dict[str, tuple] = {}         # token -> (user_id, expires_at)
        self._experiments: dict[str, ExperimentData] = {}

    # -- users -------------------------------------------------------------------

    def create_user(self, handle: str, email: str, password_digest: str,
                    kind: AccountKind, display_name: str, now: datetime,
                    is_agent: bool = False,
                    is_platform_admin: bool = False) -> UserAccount:
        handle_key = handle.lower()
        email_key = email.lower()
        with self._lock:
            if handle_key in self._handle_index:
                raise errors.DuplicateHandle(f"handle '{handle}' is taken")
            if email_key in self._email_index:
                raise errors.DuplicateEmail(f"email '{email}' is registered")
            user = UserAccount(
                id=_new_id(8),
                handle=handle,
                email=email_key,
                password_digest=password_digest,
                kind=kind,
                display_name=display_name,
                created_at=now,
                is_agent=is_agent,
                is_platform_admin=is_platform_admin,
            )
            self.users[user.id] = user
            self._handle_index[handle_key] = user.id
            self._email_index[email_key] = user.id
            return user

    def get_user(self, user_id: str) -> Optional[UserAccount]:
        with self._lock:
            return self.users.get(user_id)

    def find_user(self, handle_or_email: str) -> Optional[UserAccount]:
        key = handle_or_email.lower()
        with self._lock:
            user_id = self._handle_index.get(key) or self._email_index.get(key)
            return self.users.get(user_id) if user_id else None

    def user_by_email(self, email: str) -> Optional[UserAccount]:
        with self._lock:
            user_id = self._email_index.get(email.lower())
            return self.users.get(user_id) if user_id else None

    # -- sessions ---------------------------------------------------------------

    def put_session(self, session: Session) -> Session:
        with self._lock:
            self.sessions[session.token] = session
            return session

    def get_session(self, token: str) -> Optional[Session]:
        with self._lock:
            return self.sessions.get(token)

    def drop_session(self, token: str) -> None:
        with self._lock:
            self.sessions.pop(token, None)

    # -- 2FA devices ---------------------------------------------------------------

    def add_device(self, device: TotpDevice) -> TotpDevice:
        with self._lock:
            self.devices[device.id] = device
            return device

    def get_device(self, device_id: str) -> Optional[TotpDevice]:
        with self._lock:
            return self.devices.get(device_id)

    def devices_for(self, user_id: str, confirmed_only: bool = False) -> list[TotpDevice]:
        with self._lock:
            return [d for d in self.devices.values()
                    if d.user_id == user_id and (d.confirmed or not confirmed_only)]

    # -- consents / researcher requests ---------------------------------------------

    def add_consent(self, record: ConsentRecord) -> None:
        with self._lock:
            self.consents.setdefault(record.user_id, []).append(record)

    def consents_for(self, user_id: str) -> list[ConsentRecord]:
        with self._lock:
            return list(self.consents.get(user_id, []))

    def add_researcher_request(self, request: ResearcherRequest) -> ResearcherRequest:
        with self._lock:
            self.researcher_requests[request.id] = request
            return request

    def decide_researcher_request(self, request_id: str, approve: bool,
                                  admin_id: str, now: datetime) -> ResearcherRequest:
        with self._lock:
            request = self.researcher_requests.get(request_id)
            if request is None:
                raise errors.NotFound("researcher request not found")
            if request.state is not RequestState.PENDING:
                raise errors.AlreadyDecided("request already decided")
            request.state = RequestState.APPROVED if approve else RequestState.REJECTED
            request.decided_by = admin_id
            request.decided_at = now
            if approve:
                self.users[request.user_id].kind = AccountKind.RESEARCHER
            return request

    # -- media -----------------------------------------------------------------------

    def put_media(self, blob: MediaBlob) -> MediaBlob:
        with self._lock:
            self.media[blob.id] = blob
            return blob

    def get_media(self, media_id: str) -> Optional[MediaBlob]:
        with self._lock:
            return self.media.get(media_id)

    # -- experiments / memberships -----------------------------------------------------

    def create_experiment(self, experiment: Experiment, owner_membership: Membership) -> Experiment:
        with self._lock:
            self._experiments[experiment.id] = ExperimentData(experiment)
            self.memberships[(owner_membership.user_id, experiment.id)] = owner_membership
            return experiment

    def experiment_ids(self) -> list[str]:
        with self._lock:
            return list(self._experiments)

    def get_experiment(self, experiment_id: str) -> Optional[Experiment]:
        with self._lock:
            data = self._experiments.get(experiment_id)
            return data.experiment if data else None

    def get_membership(self, user_id: str, experiment_id: str) -> Optional[Membership]:
        with self._lock:
            return self.memberships.get((user_id, experiment_id))

    def set_membership(self, membership: Membership) -> Membership:
        with self._lock:
            self.memberships[(membership.user_id, membership.experiment_id)] = membership
            return membership

    def memberships_of(self, user_id: str) -> list[Membership]:
        with self._lock:
            return [m for (uid, _), m in self.memberships.items() if uid == user_id]

    def members_of(self, experiment_id: str) -> list[Membership]:
        with self._lock:
            return [m for (_, eid), m in self.memberships.items() if eid == experiment_id]

    def scoped(self, experiment_id: str, user_id: str) -> ExperimentScope:
        """Membership-checked scope: the only door to an experiment's content."""
        with self._lock:
            data = self._experiments.get(experiment_id)
            if data is None:
                raise errors.ExperimentNotFound("no such experiment")
            membership = self.memberships.get((user_id, experiment_id))
            if membership is None or membership.status is not MembershipStatus.ACTIVE:
                raise errors.NotAMember("not an active member of this experiment")
            return ExperimentScope(self, data, membership)

    def system_scope(self, experiment_id: str) -> ExperimentScope:
        """Scope for internal machinery (dispatcher, export) after its own checks."""
        with self._lock:
            data = self._experiments.get(experiment_id)
            if data is None:
                raise errors.ExperimentNotFound("no such experiment")
            return ExperimentScope(self, data, None)

    # -- invitations ----------------------------------------------------------------

    def add_invitation(self, invitation: Invitation) -> Invitation:
        with self._lock:
            for existing in self.invitations.values():
                if (existing.experiment_id == invitation.experiment_id
                        and existing.email == invitation.email
                        and existing.state is InvitationState.PENDING):
                    raise errors.DuplicatePendingInvitation(
                        "a pending invitation for this email already exists")
            self.invitations[invitation.token] = invitation
            return invitation

    def get_invitation(self, token: str) -> Optional[Invitation]:
        with self._lock:
            return self.invitations.get(token)

    def consume_invitation(self, token: str, now: datetime) -> Invitation:
        """Atomic single-use acceptance; expiry evaluated lazily against `now`."""
        with self._lock:
            invitation = self.invitations.get(token)
            if invitation is None:
                raise errors.NotFound("unknown invitation token")
            if invitation.state in (InvitationState.ACCEPTED, InvitationState.REVOKED):
                raise errors.TokenUsed("invitation token already used")
            if now >= invitation.expires_at:
                invitation.state = InvitationState.EXPIRED
                raise errors.TokenExpired("invitation token expired")
            invitation.state = InvitationState.ACCEPTED
            return invitation

    # -- notifications -----------------------------------------------------------------

    def add_notification(self, recipient_id: str, kind: NotificationKind,
                         actor_id: str, subject_post_id: Optional[int],
                         experiment_id: str, now: datetime) -> Notification:
        with self._lock:
            seq = self._notification_seq.get(recipient_id, 0) + 1
            self._notification_seq[recipient_id] = seq
            note = Notification(
                id=seq,
                recipient_id=recipient_id,
                kind=kind,
                actor_id=actor_id,
                subject_post_id=subject_post_id,
                experiment_id=experiment_id,
                created_at=now,
            )
            self.notifications.setdefault(recipient_id, []).append(note)
            return note

    def notifications_for(self, recipient_id: str) -> list[Notification]:
        with self._lock:
            return list(self.notifications.get(recipient_id, []))

    def mark_seen(self, recipient_id: str, up_to_id: int) -> int:
        with self._lock:
            marked = 0
            for note in self.notifications.get(recipient_id, []):
                if note.id <= up_to_id and not note.seen:
                    note.seen = True
                    marked += 1
            return marked

    # -- password reset / email -----------------------------------------------------------

    def put_reset_token(self, token: str, user_id: str, expires_at: datetime) -> None:
        with self._lock:
            self.reset_tokens[token] = (user_id, expires_at)

    def consume_reset_token(self, token: str, now: datetime) -> str:
        with self._lock:
            entry = self.reset_tokens.pop(token, None)
            if entry is None:
                raise errors.TokenUsed("unknown or used reset token")
            user_id, expires_at = entry
            if now >= expires_at:
                raise errors.TokenExpired("reset token expired")
            return user_id

    def add_email(self, email: OutboundEmail) -> OutboundEmail:
        with self._lock:
            email.id = len(self.emails) + 1
            self.emails.append(email)
            return email

    def emails_list(self) -> list[OutboundEmail]:
        with self._lock:
            return list(self.emails)
