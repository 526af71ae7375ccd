"""Posts, replies, likes, reposts, follows, deletion and their notifications."""

from __future__ import annotations

import threading

import pytest

from discourse_sandbox import errors
from discourse_sandbox.discourse import extract_hashtags
from discourse_sandbox.models import (
    EventKind, NotificationKind, PostKind, Role,
)


@pytest.fixture
def world(sandbox, build):
    owner = build.researcher("owner")
    experiment = build.experiment(owner)
    ada = build.member(experiment, "ada")
    bob = build.member(experiment, "bob")
    mod = build.member(experiment, "mod", Role.CONTENT_MODERATOR)
    return {"experiment": experiment, "owner": owner, "ada": ada, "bob": bob,
            "mod": mod, "build": build, "sandbox": sandbox}


def scope_of(world, who):
    return world["build"].scope(world[who], world["experiment"])


def test_posting_at_280_boundary(world, sandbox):
    scope = scope_of(world, "ada")
    accepted = sandbox.discourse.create_post(scope, "x" * 280)
    assert accepted.id == 1
    with pytest.raises(errors.BodyTooLong):
        sandbox.discourse.create_post(scope, "x" * 281)


def test_multibyte_280_boundary(world, sandbox):
    scope = scope_of(world, "ada")
    emoji_body = "🦜" * 280                        # each is one scalar value
    assert sandbox.discourse.create_post(scope, emoji_body)
    with pytest.raises(errors.BodyTooLong):
        sandbox.discourse.create_post(scope, "🦜" * 281)
    cjk = "研" * 280
    assert sandbox.discourse.create_post(scope, cjk)
    with pytest.raises(errors.BodyTooLong):
        sandbox.discourse.create_post(scope, "研" * 280 + "究")


def test_empty_body_rejected(world, sandbox):
    with pytest.raises(errors.BodyEmpty):
        sandbox.discourse.create_post(scope_of(world, "ada"), "")


def test_hashtags_extracted_and_stored(world, sandbox):
    post = sandbox.discourse.create_post(
        scope_of(world, "ada"), "Great talk! #AI #ai #Discourse")
    assert post.hashtags == {"ai", "discourse"}
    assert post.hashtags == extract_hashtags(post.body)


def test_post_emits_event_to_listeners(world, sandbox):
    seen = []
    sandbox.discourse.on_event(seen.append)
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "hello")
    assert len(seen) == 1
    assert seen[0].kind is EventKind.NEW_POST
    assert seen[0].post_id == post.id
    assert seen[0].author_id == post.author_id


def test_post_does_not_notify_followers(world, sandbox):
    sandbox.discourse.follow(scope_of(world, "bob"), world["ada"].id)
    before = len(sandbox.store.notifications_for(world["bob"].id))
    sandbox.discourse.create_post(scope_of(world, "ada"), "no follower notes")
    assert len(sandbox.store.notifications_for(world["bob"].id)) == before


def test_reply_threads_and_notifies(world, sandbox):
    root = sandbox.discourse.create_post(scope_of(world, "ada"), "root")
    reply = sandbox.discourse.reply(scope_of(world, "bob"), root.id, "a reply")
    assert reply.kind is PostKind.COMMENT
    assert reply.parent_id == root.id
    notes = sandbox.store.notifications_for(world["ada"].id)
    assert [n.kind for n in notes] == [NotificationKind.COMMENT]
    assert notes[0].actor_id == world["bob"].id


def test_self_reply_suppresses_notification(world, sandbox):
    scope = scope_of(world, "ada")
    root = sandbox.discourse.create_post(scope, "root")
    sandbox.discourse.reply(scope, root.id, "self reply")
    assert sandbox.store.notifications_for(world["ada"].id) == []


def test_reply_to_deleted_parent(world, sandbox):
    root = sandbox.discourse.create_post(scope_of(world, "ada"), "root")
    sandbox.discourse.delete_post(scope_of(world, "ada"), root.id)
    with pytest.raises(errors.ParentDeleted):
        sandbox.discourse.reply(scope_of(world, "bob"), root.id, "too late")


def test_reply_to_missing_parent(world, sandbox):
    with pytest.raises(errors.ParentNotFound):
        sandbox.discourse.reply(scope_of(world, "bob"), 404, "to nothing")


def test_reply_to_repost_threads_under_original(world, sandbox):
    root = sandbox.discourse.create_post(scope_of(world, "ada"), "root")
    repost = sandbox.discourse.repost(scope_of(world, "bob"), root.id)
    reply = sandbox.discourse.reply(scope_of(world, "mod"), repost.id, "hi")
    assert reply.parent_id == root.id


def test_reply_event_is_new_reply(world, sandbox):
    seen = []
    root = sandbox.discourse.create_post(scope_of(world, "ada"), "root")
    sandbox.discourse.on_event(seen.append)
    sandbox.discourse.reply(scope_of(world, "bob"), root.id, "reply")
    assert [e.kind for e in seen] == [EventKind.NEW_REPLY]


# -- likes ---------------------------------------------------------------------


def test_like_then_like_again(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "likeable")
    scope = scope_of(world, "bob")
    sandbox.discourse.like(scope, post.id)
    with pytest.raises(errors.AlreadyLiked):
        sandbox.discourse.like(scope, post.id)


def test_like_undo_restores_count(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "likeable")
    scope = scope_of(world, "bob")
    sandbox.discourse.like(scope, post.id)
    assert len(scope.likes()) == 1
    sandbox.discourse.undo_like(scope, post.id)
    assert len(scope.likes()) == 0
    with pytest.raises(errors.NotLiked):
        sandbox.discourse.undo_like(scope, post.id)


def test_undo_like_keeps_notification(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "likeable")
    scope = scope_of(world, "bob")
    sandbox.discourse.like(scope, post.id)
    sandbox.discourse.undo_like(scope, post.id)
    notes = sandbox.store.notifications_for(world["ada"].id)
    assert [n.kind for n in notes] == [NotificationKind.LIKE]


def test_like_a_comment(world, sandbox):
    root = sandbox.discourse.create_post(scope_of(world, "ada"), "root")
    comment = sandbox.discourse.reply(scope_of(world, "bob"), root.id, "comment")
    sandbox.discourse.like(scope_of(world, "mod"), comment.id)
    notes = sandbox.store.notifications_for(world["bob"].id)
    assert NotificationKind.LIKE in [n.kind for n in notes]


def test_self_like_allowed_but_silent(world, sandbox):
    scope = scope_of(world, "ada")
    post = sandbox.discourse.create_post(scope, "mine")
    sandbox.discourse.like(scope, post.id)
    assert sandbox.store.notifications_for(world["ada"].id) == []


def test_concurrent_likes_yield_exactly_one(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "race me")
    scope = scope_of(world, "bob")
    outcomes = []

    def attempt():
        try:
            sandbox.discourse.like(scope, post.id)
            outcomes.append("ok")
        except errors.AlreadyLiked:
            outcomes.append("dup")

    threads = [threading.Thread(target=attempt) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert outcomes.count("ok") == 1
    assert len(scope.likes()) == 1


# -- reposts ------------------------------------------------------------------------


def test_repost_original(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "source")
    repost = sandbox.discourse.repost(scope_of(world, "bob"), post.id)
    assert repost.kind is PostKind.REPOST
    assert repost.repost_of == post.id
    assert repost.body == ""
    notes = sandbox.store.notifications_for(world["ada"].id)
    assert [n.kind for n in notes] == [NotificationKind.REPOST]


def test_repost_of_repost_resolves_to_original(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "source")
    first = sandbox.discourse.repost(scope_of(world, "bob"), post.id)
    second = sandbox.discourse.repost(scope_of(world, "mod"), first.id)
    assert second.repost_of == post.id


def test_repost_deleted_post(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "source")
    sandbox.discourse.delete_post(scope_of(world, "ada"), post.id)
    with pytest.raises(errors.PostDeleted):
        sandbox.discourse.repost(scope_of(world, "bob"), post.id)


def test_no_repost_points_at_a_repost(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "source")
    r1 = sandbox.discourse.repost(scope_of(world, "bob"), post.id)
    sandbox.discourse.repost(scope_of(world, "mod"), r1.id)
    scope = scope_of(world, "ada")
    for p in scope.posts():
        if p.kind is PostKind.REPOST:
            assert scope.get_post(p.repost_of).kind is not PostKind.REPOST


# -- follows -------------------------------------------------------------------------


def test_follow_notifies_target(world, sandbox):
    sandbox.discourse.follow(scope_of(world, "bob"), world["ada"].id)
    notes = sandbox.store.notifications_for(world["ada"].id)
    assert [n.kind for n in notes] == [NotificationKind.FOLLOW]
    assert notes[0].subject_post_id is None


def test_self_follow(world, sandbox):
    with pytest.raises(errors.SelfFollow):
        sandbox.discourse.follow(scope_of(world, "ada"), world["ada"].id)


def test_double_follow(world, sandbox):
    scope = scope_of(world, "bob")
    sandbox.discourse.follow(scope, world["ada"].id)
    with pytest.raises(errors.AlreadyFollowing):
        sandbox.discourse.follow(scope, world["ada"].id)


def test_unfollow_removes_edge_not_notification(world, sandbox):
    scope = scope_of(world, "bob")
    sandbox.discourse.follow(scope, world["ada"].id)
    sandbox.discourse.unfollow(scope, world["ada"].id)
    assert scope.followees_of(world["bob"].id) == set()
    assert len(sandbox.store.notifications_for(world["ada"].id)) == 1
    with pytest.raises(errors.NotFollowing):
        sandbox.discourse.unfollow(scope, world["ada"].id)


def test_follow_removed_member_rejected(world, sandbox):
    sandbox.experiments.remove_member(world["owner"], world["experiment"].id,
                                      world["bob"].id)
    with pytest.raises(errors.NotAMember):
        sandbox.discourse.follow(scope_of(world, "ada"), world["bob"].id)


# -- deletion ---------------------------------------------------------------------------


def test_moderator_deletes_thread_hides_subtree(world, sandbox):
    ada_scope = scope_of(world, "ada")
    root = sandbox.discourse.create_post(ada_scope, "thread root")
    child = sandbox.discourse.reply(scope_of(world, "bob"), root.id, "child")
    grandchild = sandbox.discourse.reply(ada_scope, child.id, "grandchild")
    sandbox.discourse.delete_post(scope_of(world, "mod"), root.id)
    scope = scope_of(world, "owner")
    assert not scope.is_visible(scope.get_post(root.id))
    assert not scope.is_visible(scope.get_post(child.id))
    assert not scope.is_visible(scope.get_post(grandchild.id))
    # content retained for export
    assert scope.get_post(child.id).body == "child"
    assert scope.get_post(child.id).deleted is False


def test_regular_cannot_delete_others_post(world, sandbox):
    post = sandbox.discourse.create_post(scope_of(world, "ada"), "target")
    with pytest.raises(errors.Forbidden):
        sandbox.discourse.delete_post(scope_of(world, "bob"), post.id)


def test_author_deletes_own_post(world, sandbox):
    scope = scope_of(world, "ada")
    post = sandbox.discourse.create_post(scope, "mine to delete")
    deleted = sandbox.discourse.delete_post(scope, post.id)
    assert deleted.deleted
    assert deleted.deleted_by == world["ada"].id


def test_reply_graph_is_a_forest(world, sandbox):
    scope = scope_of(world, "ada")
    root = sandbox.discourse.create_post(scope, "root")
    c1 = sandbox.discourse.reply(scope, root.id, "c1")
    c2 = sandbox.discourse.reply(scope_of(world, "bob"), c1.id, "c2")
    for post in scope.posts():
        if post.kind is PostKind.COMMENT:
            chain = scope.ancestors(post.id)
            assert chain, "comment without ancestry"
            assert chain[0].kind is PostKind.ORIGINAL
    assert scope.thread_depth(c2.id) == 2


def test_removed_member_cannot_post(world, sandbox):
    sandbox.experiments.remove_member(world["owner"], world["experiment"].id,
                                      world["bob"].id)
    with pytest.raises(errors.NotAMember):
        scope_of(world, "bob")


def test_hashtag_recompute_invariant(world, sandbox):
    scope = scope_of(world, "ada")
    bodies = ["#a text", "no tags", "#B #b #c", "mid #tag end", "email#no"]
    for body in bodies:
        sandbox.discourse.create_post(scope, body)
    for post in scope.posts():
        assert post.hashtags == extract_hashtags(post.body)
