"""The read path against independent brute-force oracles.

The oracles below re-derive visibility, predicates and ordering from raw
records — they never call FeedService logic.
"""

from __future__ import annotations

import random

import pytest

from discourse_sandbox import errors
from discourse_sandbox.models import NotificationKind, PostKind, Role


# -- independent oracle helpers ------------------------------------------------------


def oracle_visible(posts_by_id, post):
    node = post
    while True:
        if node.deleted:
            return False
        if node.parent_id is None:
            return True
        node = posts_by_id[node.parent_id]


def oracle_order(posts):
    return sorted(posts, key=lambda p: (p.created_at, p.id), reverse=True)


def oracle_feed(scope, predicate):
    posts_by_id = {p.id: p for p in scope.posts()}
    keep = [p for p in posts_by_id.values()
            if oracle_visible(posts_by_id, p) and predicate(p)]
    return [p.id for p in oracle_order(keep)]


def collect_pages(feed_fn, *args):
    ids, cursor, rounds = [], None, 0
    while True:
        page = feed_fn(*args, cursor)
        ids.extend(view.post.id for view in page.items)
        if page.next_cursor is None:
            return ids
        cursor = page.next_cursor
        rounds += 1
        assert rounds < 500, "cursor loop"


# -- fixture world ---------------------------------------------------------------------


@pytest.fixture
def world(sandbox, build, clock):
    owner = build.researcher("owner")
    experiment = build.experiment(owner)
    ada = build.member(experiment, "ada")
    bob = build.member(experiment, "bob")
    cira = build.member(experiment, "cira")
    return {"sandbox": sandbox, "build": build, "clock": clock,
            "experiment": experiment, "owner": owner,
            "ada": ada, "bob": bob, "cira": cira}


def scope_of(world, who):
    return world["build"].scope(world[who], world["experiment"])


def post_as(world, who, body):
    world["clock"].advance(1)
    return world["sandbox"].discourse.create_post(scope_of(world, who), body)


# -- home --------------------------------------------------------------------------------


def test_home_empty_when_following_nobody(world):
    post_as(world, "ada", "hello")
    page = world["sandbox"].feeds.home_feed(scope_of(world, "bob"))
    assert page.items == []
    assert page.next_cursor is None


def test_home_shows_followees_only(world):
    sb = world["sandbox"]
    sb.discourse.follow(scope_of(world, "cira"), world["ada"].id)
    post_as(world, "ada", "from ada")
    post_as(world, "bob", "from bob")
    page = sb.feeds.home_feed(scope_of(world, "cira"))
    assert [v.author_handle for v in page.items] == ["ada"]


def test_home_pagination_45_posts(world):
    sb = world["sandbox"]
    sb.discourse.follow(scope_of(world, "cira"), world["ada"].id)
    expected = [post_as(world, "ada", f"post {i}").id for i in range(45)]
    scope = scope_of(world, "cira")

    first = sb.feeds.home_feed(scope)
    assert len(first.items) == 20 and first.next_cursor
    second = sb.feeds.home_feed(scope, first.next_cursor)
    assert len(second.items) == 20 and second.next_cursor
    third = sb.feeds.home_feed(scope, second.next_cursor)
    assert len(third.items) == 5 and third.next_cursor is None

    combined = [v.post.id for v in first.items + second.items + third.items]
    assert combined == list(reversed(expected))
    assert combined == oracle_feed(
        scope, lambda p: p.kind in (PostKind.ORIGINAL, PostKind.REPOST)
        and p.author_id == world["ada"].id)


def test_home_includes_reposts_excludes_comments(world):
    sb = world["sandbox"]
    sb.discourse.follow(scope_of(world, "cira"), world["ada"].id)
    root = post_as(world, "bob", "root from bob")
    world["clock"].advance(1)
    sb.discourse.reply(scope_of(world, "ada"), root.id, "ada comments")
    world["clock"].advance(1)
    repost = sb.discourse.repost(scope_of(world, "ada"), root.id)
    page = sb.feeds.home_feed(scope_of(world, "cira"))
    assert [v.post.id for v in page.items] == [repost.id]


# -- explore ---------------------------------------------------------------------------------


def test_explore_shows_all_members_posts(world):
    a = post_as(world, "ada", "one")
    b = post_as(world, "bob", "two")
    page = world["sandbox"].feeds.explore_feed(scope_of(world, "cira"))
    assert [v.post.id for v in page.items] == [b.id, a.id]


def test_explore_hides_deleted(world):
    sb = world["sandbox"]
    keep = post_as(world, "ada", "keep")
    drop = post_as(world, "ada", "drop")
    sb.discourse.delete_post(scope_of(world, "ada"), drop.id)
    page = sb.feeds.explore_feed(scope_of(world, "bob"))
    assert [v.post.id for v in page.items] == [keep.id]


def test_explore_matches_oracle_ordering(world):
    sb = world["sandbox"]
    rng = random.Random(7)
    for i in range(37):
        who = rng.choice(["ada", "bob", "cira"])
        # occasionally no clock advance, forcing (created_at, id) ties
        if rng.random() < 0.7:
            world["clock"].advance(rng.randint(1, 60))
        sb.discourse.create_post(scope_of(world, who), f"post {i}")
    scope = scope_of(world, "owner")
    assert collect_pages(sb.feeds.explore_feed, scope) == oracle_feed(
        scope, lambda p: p.kind in (PostKind.ORIGINAL, PostKind.REPOST))


# -- hashtag / search --------------------------------------------------------------------------


def test_hashtag_feed_case_folds(world):
    tagged = post_as(world, "ada", "news about #AI today")
    post_as(world, "bob", "nothing here")
    page = world["sandbox"].feeds.hashtag_feed(scope_of(world, "cira"), "ai")
    assert [v.post.id for v in page.items] == [tagged.id]


def test_hashtag_feed_unknown_tag(world):
    post_as(world, "ada", "#something")
    page = world["sandbox"].feeds.hashtag_feed(scope_of(world, "cira"), "other")
    assert page.items == []


def test_hashtag_feed_includes_comments(world):
    sb = world["sandbox"]
    root = post_as(world, "ada", "root")
    world["clock"].advance(1)
    comment = sb.discourse.reply(scope_of(world, "bob"), root.id, "reply with #ai")
    page = sb.feeds.hashtag_feed(scope_of(world, "cira"), "ai")
    assert [v.post.id for v in page.items] == [comment.id]


def test_search_substring_case_insensitive(world):
    hit = post_as(world, "ada", "Climate action now")
    post_as(world, "bob", "unrelated")
    result = world["sandbox"].feeds.search(scope_of(world, "cira"), "climate")
    assert [v.post.id for v in result["posts"].items] == [hit.id]


def test_search_matches_accounts(world, build):
    build.member(world["experiment"], "climate_bot")
    result = world["sandbox"].feeds.search(scope_of(world, "cira"), "climate")
    assert [u.handle for u in result["accounts"]] == ["climate_bot"]


def test_search_query_bounds(world):
    scope = scope_of(world, "ada")
    with pytest.raises(errors.QueryTooLong):
        world["sandbox"].feeds.search(scope, "x" * 101)
    with pytest.raises(errors.ValidationError):
        world["sandbox"].feeds.search(scope, "")


def test_search_equals_linear_scan(world):
    sb = world["sandbox"]
    rng = random.Random(11)
    words = ["alpha", "beta", "Gamma", "delta gamma", "epsilon"]
    for i in range(30):
        world["clock"].advance(1)
        sb.discourse.create_post(scope_of(world, rng.choice(["ada", "bob"])),
                                 f"{rng.choice(words)} item {i}")
    scope = scope_of(world, "cira")
    found = collect_pages(
        lambda s, c: sb.feeds.search(s, "gamma", c)["posts"], scope)
    assert found == oracle_feed(scope, lambda p: "gamma" in p.body.casefold())


# -- trending ------------------------------------------------------------------------------------


def test_trending_empty_without_hashtags(world):
    post_as(world, "ada", "no tags at all")
    assert world["sandbox"].feeds.trending(scope_of(world, "bob")) == []


def test_trending_counts_unique_posts_not_occurrences(world):
    post_as(world, "ada", "#a #a")
    post_as(world, "bob", "#b")
    entries = world["sandbox"].feeds.trending(scope_of(world, "cira"))
    assert {e.tag: e.unique_post_count for e in entries} == {"a": 1, "b": 1}


def test_trending_derived_tiebreaks(world):
    # counts x:3 y:2 z:2 w:1 v:1 u:1, z used more recently than y;
    # expected order: x, z, y, then u,v,w by recency (w oldest... v, u newest)
    for _ in range(3):
        post_as(world, "ada", "#x")
    post_as(world, "ada", "#y")
    post_as(world, "bob", "#y")
    post_as(world, "ada", "#z")
    post_as(world, "ada", "#w")
    post_as(world, "ada", "#v")
    post_as(world, "bob", "#z")      # z's latest use is now newer than y's
    post_as(world, "ada", "#u")      # u newest among the singles
    entries = world["sandbox"].feeds.trending(scope_of(world, "cira"))
    assert [e.tag for e in entries] == ["x", "z", "y", "u", "v"]
    assert [e.unique_post_count for e in entries] == [3, 2, 2, 1, 1]


def test_trending_limit_five(world):
    for i, tag in enumerate("abcdefg"):
        post_as(world, "ada", f"##{tag} no wait #{tag}{i}")
    entries = world["sandbox"].feeds.trending(scope_of(world, "bob"))
    assert len(entries) == 5


def test_trending_excludes_deleted_and_hidden(world):
    sb = world["sandbox"]
    root = post_as(world, "ada", "#gone root")
    world["clock"].advance(1)
    sb.discourse.reply(scope_of(world, "bob"), root.id, "#gone reply")
    post_as(world, "cira", "#stays")
    sb.discourse.delete_post(scope_of(world, "ada"), root.id)   # hides subtree
    entries = sb.feeds.trending(scope_of(world, "bob"))
    assert [e.tag for e in entries] == ["stays"]


# -- pagination robustness -------------------------------------------------------------------------


def test_pages_stable_under_mid_pagination_inserts(world):
    sb = world["sandbox"]
    first_batch = [post_as(world, "ada", f"early {i}").id for i in range(30)]
    scope = scope_of(world, "bob")
    page_one = sb.feeds.explore_feed(scope)
    snapshot_top = [v.post.id for v in page_one.items]

    # newer posts land before the cursor; the next page must not duplicate or skip
    inserted = [post_as(world, "ada", f"late {i}").id for i in range(5)]
    page_two = sb.feeds.explore_feed(scope, page_one.next_cursor)
    combined = snapshot_top + [v.post.id for v in page_two.items]
    assert combined == list(reversed(first_batch))
    assert not set(inserted) & set(combined)


def test_cursor_roundtrip_is_opaque_but_stable(world):
    from discourse_sandbox.feeds import decode_cursor, encode_cursor
    post = post_as(world, "ada", "anchor")
    cursor = encode_cursor(post.created_at, post.id)
    assert decode_cursor(cursor) == (post.created_at, post.id)
    with pytest.raises(errors.ValidationError):
        decode_cursor("not-base64!!")


# -- notifications -----------------------------------------------------------------------------------


def test_notification_filters(world):
    sb = world["sandbox"]
    post = post_as(world, "ada", "popular")
    sb.discourse.like(scope_of(world, "bob"), post.id)
    sb.discourse.like(scope_of(world, "cira"), post.id)
    sb.discourse.follow(scope_of(world, "bob"), world["ada"].id)

    likes = sb.feeds.notifications(world["ada"].id, "likes")["items"]
    assert len(likes) == 2
    follows = sb.feeds.notifications(world["ada"].id, "follows")["items"]
    assert len(follows) == 1
    everything = sb.feeds.notifications(world["ada"].id, "all")["items"]
    assert len(everything) == 3


def test_unknown_filter(world):
    with pytest.raises(errors.UnknownFilter):
        world["sandbox"].feeds.notifications(world["ada"].id, "mentions")


def test_unseen_count_and_mark_seen(world):
    sb = world["sandbox"]
    post = post_as(world, "ada", "popular")
    sb.discourse.like(scope_of(world, "bob"), post.id)
    sb.discourse.follow(scope_of(world, "cira"), world["ada"].id)
    assert sb.feeds.unseen_count(world["ada"].id) == 2

    notes = sb.feeds.notifications(world["ada"].id)["items"]
    top_id = max(n.id for n in notes)
    marked = sb.feeds.mark_seen(world["ada"].id, top_id)
    assert marked == 2
    assert sb.feeds.unseen_count(world["ada"].id) == 0
    assert sb.feeds.mark_seen(world["ada"].id, top_id) == 0   # idempotent


def test_unseen_count_matches_recount(world):
    sb = world["sandbox"]
    rng = random.Random(3)
    post = post_as(world, "ada", "subject")
    for i in range(10):
        actor = rng.choice(["bob", "cira"])
        try:
            sb.discourse.like(scope_of(world, actor), post.id)
        except errors.AlreadyLiked:
            sb.discourse.undo_like(scope_of(world, actor), post.id)
    recount = sum(1 for n in sb.store.notifications_for(world["ada"].id) if not n.seen)
    assert sb.feeds.unseen_count(world["ada"].id) == recount


def test_notification_conservation_small(world):
    sb = world["sandbox"]
    post = post_as(world, "ada", "subject")
    sb.discourse.like(scope_of(world, "bob"), post.id)
    sb.discourse.repost(scope_of(world, "cira"), post.id)
    world["clock"].advance(1)
    sb.discourse.reply(scope_of(world, "bob"), post.id, "reply")
    sb.discourse.follow(scope_of(world, "cira"), world["ada"].id)
    kinds = sorted(n.kind.value for n in sb.store.notifications_for(world["ada"].id))
    assert kinds == ["comment", "follow", "like", "repost"]


def test_counts_match_brute_force(world):
    sb = world["sandbox"]
    post = post_as(world, "ada", "counted")
    sb.discourse.like(scope_of(world, "bob"), post.id)
    sb.discourse.like(scope_of(world, "cira"), post.id)
    world["clock"].advance(1)
    sb.discourse.reply(scope_of(world, "bob"), post.id, "one comment")
    sb.discourse.repost(scope_of(world, "cira"), post.id)
    scope = scope_of(world, "owner")
    view = sb.feeds.post_view(scope, scope.get_post(post.id), world["owner"].id)
    assert view.like_count == 2
    assert view.comment_count == 1
    assert view.repost_count == 1
    assert view.liked_by_caller is False
