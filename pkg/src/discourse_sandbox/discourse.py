"""The write path: posts, replies, likes, reposts, follows, deletion.

Every operation runs against an ``ExperimentScope``, so it can only touch one
experiment's content. Agent accounts go through the exact same operations and
the same moderation gate as humans.
"""

from __future__ import annotations

import re
from typing import Callable

from . import errors
from .clock import Clock
from .events import EventBus
from .models import (
    EventKind, Like, MembershipStatus, NotificationKind, Post, PostKind,
)
from .moderation import ContentScreen, check_content
from .permissions import Action, can
from .store import ExperimentScope, InMemoryStore

MAX_BODY_SCALARS = 280

# '#' opens a tag only at start-of-string or after whitespace, then up to 64
# word characters (maximal munch); "email#tag" and "C#x" produce nothing.
_HASHTAG = re.compile(r"(?:^|(?<=\s))#([A-Za-z0-9_]{1,64})")


def extract_hashtags(body: str) -> frozenset:
    """Lowercased, deduplicated tags; recomputable from the body at any time."""
    return frozenset(m.group(1).lower() for m in _HASHTAG.finditer(body))


def scalar_length(body: str) -> int:
    """Unicode scalar values (code points), not bytes or grapheme clusters."""
    return len(body)


class DiscourseService:
    def __init__(self, store: InMemoryStore, clock: Clock, screen: ContentScreen,
                 bus: EventBus, threshold: float = 0.5):
        self._store = store
        self._clock = clock
        self._screen = screen
        self._bus = bus
        self._threshold = threshold
        self._event_listeners: list[Callable] = []

    def on_event(self, listener: Callable) -> None:
        """Register a committed-post stream consumer (the agent dispatcher)."""
        self._event_listeners.append(listener)

    # -- internal helpers ------------------------------------------------------

    def _check_body(self, body: str) -> None:
        length = scalar_length(body)
        if length == 0:
            raise errors.BodyEmpty("post body is empty")
        if length > MAX_BODY_SCALARS:
            raise errors.BodyTooLong(
                f"body is {length} characters, limit is {MAX_BODY_SCALARS}",
                length=length, limit=MAX_BODY_SCALARS)
        result = check_content(body, self._screen, self._threshold)
        if result.verdict.value == "block":
            raise errors.ModerationRejected(
                matched_terms=result.matched_terms, reason=result.reason)

    def _notify(self, recipient_id: str, kind: NotificationKind, actor_id: str,
                subject_post_id: int | None, experiment_id: str) -> None:
        note = self._store.add_notification(
            recipient_id, kind, actor_id, subject_post_id, experiment_id,
            self._clock.now())
        self._bus.publish(recipient_id, "notification", {
            "id": note.id, "kind": kind.value, "experiment_id": experiment_id,
        })

    def _emit(self, scope: ExperimentScope, kind: EventKind, post: Post) -> None:
        """Fan out after the post is durably stored."""
        event = scope.add_event(kind, post.id, post.author_id, self._clock.now())
        for member in self._store.members_of(scope.experiment.id):
            if member.status is MembershipStatus.ACTIVE:
                self._bus.publish(member.user_id, "post_created", {
                    "experiment_id": scope.experiment.id, "post_id": post.id,
                })
        for listener in self._event_listeners:
            listener(event)

    def _announce_repost(self, scope: ExperimentScope, post: Post) -> None:
        for member in self._store.members_of(scope.experiment.id):
            if member.status is MembershipStatus.ACTIVE:
                self._bus.publish(member.user_id, "post_created", {
                    "experiment_id": scope.experiment.id, "post_id": post.id,
                })

    # -- operations ------------------------------------------------------------

    def create_post(self, scope: ExperimentScope, body: str) -> Post:
        if not can(scope.membership.role, Action.POST):
            raise errors.Forbidden("role may not post",
                                   role=scope.membership.role.value, action=Action.POST)
        self._check_body(body)
        post = scope.add_post(
            author_id=scope.membership.user_id, body=body, kind=PostKind.ORIGINAL,
            hashtags=extract_hashtags(body), now=self._clock.now())
        self._emit(scope, EventKind.NEW_POST, post)
        return post

    def reply(self, scope: ExperimentScope, parent_id: int, body: str) -> Post:
        if not can(scope.membership.role, Action.POST):
            raise errors.Forbidden("role may not post",
                                   role=scope.membership.role.value, action=Action.POST)
        parent = scope.get_post(parent_id)
        if parent is None:
            raise errors.ParentNotFound("parent post not found")
        if parent.kind is PostKind.REPOST:
            # commenting on a repost threads under the reposted original
            parent = scope.get_post(parent.repost_of)
            if parent is None:
                raise errors.ParentNotFound("reposted original not found")
        if parent.deleted:
            raise errors.ParentDeleted("parent post was deleted")
        self._check_body(body)
        author_id = scope.membership.user_id
        post = scope.add_post(
            author_id=author_id, body=body, kind=PostKind.COMMENT,
            hashtags=extract_hashtags(body), now=self._clock.now(),
            parent_id=parent.id)
        if parent.author_id != author_id:
            self._notify(parent.author_id, NotificationKind.COMMENT, author_id,
                         post.id, scope.experiment.id)
        self._emit(scope, EventKind.NEW_REPLY, post)
        return post

    def like(self, scope: ExperimentScope, post_id: int) -> Like:
        if not can(scope.membership.role, Action.INTERACT):
            raise errors.Forbidden("role may not interact",
                                   role=scope.membership.role.value, action=Action.INTERACT)
        post = scope.get_post(post_id)
        if post is None or not scope.is_visible(post):
            raise errors.PostNotFound("no such post")
        user_id = scope.membership.user_id
        like = scope.add_like(user_id, post_id, self._clock.now())
        if post.author_id != user_id:
            self._notify(post.author_id, NotificationKind.LIKE, user_id,
                         post_id, scope.experiment.id)
        return like

    def undo_like(self, scope: ExperimentScope, post_id: int) -> None:
        post = scope.get_post(post_id)
        if post is None:
            raise errors.PostNotFound("no such post")
        # the like notification, if any, stays
        scope.remove_like(scope.membership.user_id, post_id)

    def repost(self, scope: ExperimentScope, post_id: int) -> Post:
        if not can(scope.membership.role, Action.INTERACT):
            raise errors.Forbidden("role may not interact",
                                   role=scope.membership.role.value, action=Action.INTERACT)
        target = scope.get_post(post_id)
        if target is None:
            raise errors.PostNotFound("no such post")
        if target.kind is PostKind.REPOST:
            # reposting a repost resolves to its original
            target = scope.get_post(target.repost_of)
            if target is None:
                raise errors.PostNotFound("reposted original not found")
        if target.deleted or not scope.is_visible(target):
            raise errors.PostDeleted("post was deleted")
        user_id = scope.membership.user_id
        post = scope.add_post(
            author_id=user_id, body="", kind=PostKind.REPOST,
            hashtags=frozenset(), now=self._clock.now(), repost_of=target.id)
        if target.author_id != user_id:
            self._notify(target.author_id, NotificationKind.REPOST, user_id,
                         target.id, scope.experiment.id)
        self._announce_repost(scope, post)
        return post

    def follow(self, scope: ExperimentScope, target_user_id: str):
        if not can(scope.membership.role, Action.INTERACT):
            raise errors.Forbidden("role may not interact",
                                   role=scope.membership.role.value, action=Action.INTERACT)
        user_id = scope.membership.user_id
        if target_user_id == user_id:
            raise errors.SelfFollow("cannot follow yourself")
        target = self._store.get_membership(target_user_id, scope.experiment.id)
        if target is None or target.status is not MembershipStatus.ACTIVE:
            raise errors.NotAMember("target is not an active member")
        follow = scope.add_follow(user_id, target_user_id, self._clock.now())
        self._notify(target_user_id, NotificationKind.FOLLOW, user_id,
                     None, scope.experiment.id)
        return follow

    def unfollow(self, scope: ExperimentScope, target_user_id: str) -> None:
        # removes the edge only; the follow notification stays
        scope.remove_follow(scope.membership.user_id, target_user_id)

    def delete_post(self, scope: ExperimentScope, post_id: int) -> Post:
        post = scope.get_post(post_id)
        if post is None:
            raise errors.PostNotFound("no such post")
        actor_id = scope.membership.user_id
        if post.author_id != actor_id:
            needed = (Action.DELETE_COMMENT if post.kind is PostKind.COMMENT
                      else Action.DELETE_THREAD)
            if not can(scope.membership.role, needed):
                raise errors.Forbidden("role may not delete this post",
                                       role=scope.membership.role.value, action=needed)
        return scope.mark_deleted(post_id, actor_id)
