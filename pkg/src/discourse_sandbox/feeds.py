"""The read path: timelines, hashtag pages, search, trending, notifications.

All feeds are contiguous slices of one total order, newest first by
(created_at, id). Pagination uses opaque keyset cursors over that pair, which
stay stable when new posts arrive between page fetches.
"""

from __future__ import annotations

import base64
from datetime import datetime
from typing import Callable, Optional

from . import errors
from .clock import Clock
from .models import (
    FeedPage, MembershipStatus, Notification, Post, PostKind, PostView,
    TrendingEntry,
)
from .store import ExperimentScope, InMemoryStore

MAX_QUERY = 100
FILTER_KINDS = {
    "all": None,
    "likes": "like",
    "comments": "comment",
    "reposts": "repost",
    "follows": "follow",
}


def encode_cursor(created_at: datetime, item_id: int) -> str:
    raw = f"{created_at.isoformat()}|{item_id}".encode("utf-8")
    return base64.urlsafe_b64encode(raw).decode("ascii")


def decode_cursor(cursor: str) -> tuple[datetime, int]:
    try:
        raw = base64.urlsafe_b64decode(cursor.encode("ascii")).decode("utf-8")
        ts, _, item_id = raw.rpartition("|")
        return datetime.fromisoformat(ts), int(item_id)
    except Exception:
        raise errors.ValidationError("malformed cursor")


def _sort_newest_first(posts: list[Post]) -> list[Post]:
    return sorted(posts, key=lambda p: (p.created_at, p.id), reverse=True)


class FeedService:
    def __init__(self, store: InMemoryStore, clock: Clock, page_size: int = 20):
        self._store = store
        self._clock = clock
        self.page_size = page_size

    # -- post views --------------------------------------------------------------

    def _counts(self, scope: ExperimentScope, post_id: int) -> tuple[int, int, int]:
        likes = sum(1 for like in scope.likes() if like.post_id == post_id)
        posts = scope.posts()
        reposts = sum(1 for p in posts
                      if p.kind is PostKind.REPOST and p.repost_of == post_id
                      and not p.deleted)
        comments = sum(1 for p in posts
                       if p.kind is PostKind.COMMENT and p.parent_id == post_id
                       and not p.deleted)
        return likes, reposts, comments

    def post_view(self, scope: ExperimentScope, post: Post,
                  caller_id: str) -> PostView:
        author = self._store.get_user(post.author_id)
        likes, reposts, comments = self._counts(scope, post.id)
        return PostView(
            post=post,
            author_handle=author.handle if author else "unknown",
            author_display_name=author.display_name if author else "",
            author_is_agent=bool(author and author.is_agent),
            like_count=likes,
            repost_count=reposts,
            comment_count=comments,
            liked_by_caller=scope.has_liked(caller_id, post.id),
        )

    def _page(self, scope: ExperimentScope, posts: list[Post],
              cursor: Optional[str], caller_id: str) -> FeedPage:
        ordered = _sort_newest_first(posts)
        if cursor:
            after_ts, after_id = decode_cursor(cursor)
            ordered = [p for p in ordered if (p.created_at, p.id) < (after_ts, after_id)]
        window = ordered[:self.page_size]
        next_cursor = None
        if len(ordered) > self.page_size and window:
            last = window[-1]
            next_cursor = encode_cursor(last.created_at, last.id)
        return FeedPage(
            items=[self.post_view(scope, p, caller_id) for p in window],
            next_cursor=next_cursor)

    def _visible(self, scope: ExperimentScope,
                 predicate: Callable[[Post], bool]) -> list[Post]:
        return [p for p in scope.posts() if scope.is_visible(p) and predicate(p)]

    # -- feeds --------------------------------------------------------------------

    def home_feed(self, scope: ExperimentScope, cursor: Optional[str] = None) -> FeedPage:
        user_id = scope.membership.user_id
        followees = scope.followees_of(user_id)
        posts = self._visible(
            scope, lambda p: p.kind in (PostKind.ORIGINAL, PostKind.REPOST)
            and p.author_id in followees)
        return self._page(scope, posts, cursor, user_id)

    def explore_feed(self, scope: ExperimentScope, cursor: Optional[str] = None) -> FeedPage:
        posts = self._visible(
            scope, lambda p: p.kind in (PostKind.ORIGINAL, PostKind.REPOST))
        return self._page(scope, posts, cursor, scope.membership.user_id)

    def hashtag_feed(self, scope: ExperimentScope, tag: str,
                     cursor: Optional[str] = None) -> FeedPage:
        tag = tag.lower().lstrip("#")
        posts = self._visible(scope, lambda p: tag in p.hashtags)
        return self._page(scope, posts, cursor, scope.membership.user_id)

    def thread(self, scope: ExperimentScope, post_id: int) -> list[PostView]:
        """Root post plus its visible reply subtree, oldest first."""
        root = scope.get_post(post_id)
        if root is None or not scope.is_visible(root):
            raise errors.PostNotFound("no such post")
        while root.parent_id is not None:
            root = scope.get_post(root.parent_id)
        members: list[Post] = []
        frontier = {root.id}
        posts = scope.posts()
        while frontier:
            members.extend(p for p in posts if p.id in frontier)
            frontier = {p.id for p in posts
                        if p.parent_id in frontier and not p.deleted}
        visible = [p for p in members if scope.is_visible(p)]
        visible.sort(key=lambda p: (p.created_at, p.id))
        return [self.post_view(scope, p, scope.membership.user_id) for p in visible]

    def search(self, scope: ExperimentScope, query: str,
               cursor: Optional[str] = None) -> dict:
        if not query:
            raise errors.ValidationError("query must not be empty")
        if len(query) > MAX_QUERY:
            raise errors.QueryTooLong(f"query exceeds {MAX_QUERY} characters")
        needle = query.casefold()
        posts = self._visible(scope, lambda p: needle in p.body.casefold())
        accounts = []
        for membership in self._store.members_of(scope.experiment.id):
            if membership.status is not MembershipStatus.ACTIVE:
                continue
            user = self._store.get_user(membership.user_id)
            if user and (needle in user.handle.casefold()
                         or needle in user.display_name.casefold()):
                accounts.append(user)
        accounts.sort(key=lambda u: u.handle)
        return {
            "posts": self._page(scope, posts, cursor, scope.membership.user_id),
            "accounts": accounts,
        }

    def trending(self, scope: ExperimentScope, limit: int = 5) -> list[TrendingEntry]:
        """Top tags by unique visible posts; ties broken by most recent use,
        then lexicographically."""
        posts = self._visible(
            scope, lambda p: p.kind in (PostKind.ORIGINAL, PostKind.COMMENT))
        counts: dict[str, int] = {}
        latest: dict[str, tuple] = {}
        for post in posts:
            for tag in post.hashtags:
                counts[tag] = counts.get(tag, 0) + 1
                stamp = (post.created_at, post.id)
                if tag not in latest or stamp > latest[tag]:
                    latest[tag] = stamp
        ranked = sorted(
            counts,
            key=lambda t: (-counts[t], -latest[t][0].timestamp(), -latest[t][1], t))
        return [TrendingEntry(tag=t, unique_post_count=counts[t])
                for t in ranked[:limit]]

    # -- notifications ----------------------------------------------------------------

    def notifications(self, user_id: str, filter_name: str = "all",
                      cursor: Optional[str] = None) -> dict:
        if filter_name not in FILTER_KINDS:
            raise errors.UnknownFilter(
                f"unknown filter '{filter_name}'",
                known=sorted(FILTER_KINDS))
        wanted = FILTER_KINDS[filter_name]
        notes = [n for n in self._store.notifications_for(user_id)
                 if wanted is None or n.kind.value == wanted]
        notes.sort(key=lambda n: n.id, reverse=True)
        if cursor:
            _, after_id = decode_cursor(cursor)
            notes = [n for n in notes if n.id < after_id]
        window = notes[:self.page_size]
        next_cursor = None
        if len(notes) > self.page_size and window:
            last = window[-1]
            next_cursor = encode_cursor(last.created_at, last.id)
        return {"items": window, "next_cursor": next_cursor}

    def unseen_count(self, user_id: str) -> int:
        return sum(1 for n in self._store.notifications_for(user_id) if not n.seen)

    def mark_seen(self, user_id: str, up_to_id: int) -> int:
        return self._store.mark_seen(user_id, up_to_id)
