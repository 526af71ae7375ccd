"""Walkthrough: the discourse write path (posts, replies, likes, reposts,
follows, hashtags, the moderation gate) and the read path (home/explore
feeds, hashtag pages, search, trending, notifications).

    python demos/03_discourse_and_feeds.py
"""

import time

from discourse_sandbox import Sandbox, SandboxConfig
from discourse_sandbox.errors import BodyTooLong, ModerationRejected

sandbox = Sandbox(SandboxConfig(email_sink_dir="/tmp/sandbox-demo-outbox"))
admin = sandbox.seed_admin("root_admin", "admin@demo.test", "deploy-time-secret-1")
consents = ["platform_rules", "research_participation"]

request = sandbox.identity.request_researcher_access(
    "meera", "meera@lab.test", "a-long-password-1", "Meera", consents,
    "Professor", "Demo University", "Sociology", "Discourse dynamics.")
sandbox.identity.decide_researcher_request(admin, request.id, approve=True)
meera = sandbox.store.get_user(request.user_id)
experiment = sandbox.experiments.create_experiment(
    meera, "Feeds Demo", "Read-path walkthrough.",
    (b"%PDF-1.4 demo", "application/pdf"))

members = {}
for handle in ("ada", "bob", "cira"):
    user = sandbox.identity.register(handle, f"{handle}@demo.test",
                                     "participant-pass-1", handle.title(), consents)
    invitation = sandbox.experiments.invite(meera, experiment.id,
                                            f"{handle}@demo.test", "regular")
    sandbox.experiments.accept_invitation(invitation.token, user)
    members[handle] = user

def scope(handle):
    user = members.get(handle, meera)
    return sandbox.store.scoped(experiment.id, user.id)

print("== the write path ==")
p1 = sandbox.discourse.create_post(scope("ada"), "Kicking off! #Welcome #research")
print(f"ada posts #{p1.id}, extracted hashtags: {sorted(p1.hashtags)}")
time.sleep(0.01)
p2 = sandbox.discourse.create_post(scope("bob"), "Counterpoint incoming #research")
r1 = sandbox.discourse.reply(scope("cira"), p2.id, "Source? #Research")
sandbox.discourse.like(scope("ada"), r1.id)
repost = sandbox.discourse.repost(scope("cira"), p1.id)
print(f"cira reposts ada's post -> repost #{repost.id} of #{repost.repost_of}")

try:
    sandbox.discourse.create_post(scope("ada"), "x" * 281)
except BodyTooLong as exc:
    print(f"281 characters -> {exc.code}")
try:
    sandbox.discourse.create_post(scope("ada"), "that's bullshit, frankly")
except ModerationRejected as exc:
    print(f"lexicon term -> {exc.code} (matched {exc.matched_terms})")

print("\n== the read path ==")
sandbox.discourse.follow(scope("ada"), members["bob"].id)
home = sandbox.feeds.home_feed(scope("ada"))
print("ada's home feed (followees only):",
      [f"@{v.author_handle}#{v.post.id}" for v in home.items])
explore = sandbox.feeds.explore_feed(scope("ada"))
print("explore feed (everyone):    ",
      [f"@{v.author_handle}#{v.post.id}" for v in explore.items])
tagged = sandbox.feeds.hashtag_feed(scope("bob"), "research")
print(f"#research page has {len(tagged.items)} posts (case-folded, includes comments)")
found = sandbox.feeds.search(scope("bob"), "counterpoint")
print(f"search 'counterpoint': {len(found['posts'].items)} post(s)")
trending = sandbox.feeds.trending(scope("cira"))
print("trending:", [(t.tag, t.unique_post_count) for t in trending])

print("\n== notifications ==")
for handle in ("ada", "bob", "cira"):
    user = members[handle]
    notes = sandbox.feeds.notifications(user.id)["items"]
    unseen = sandbox.feeds.unseen_count(user.id)
    print(f"@{handle}: {[n.kind.value for n in notes]} ({unseen} unseen)")
ada = members["ada"]
top = max((n.id for n in sandbox.feeds.notifications(ada.id)["items"]), default=0)
sandbox.feeds.mark_seen(ada.id, top)
print(f"after mark_seen, ada's unseen count: {sandbox.feeds.unseen_count(ada.id)}")
