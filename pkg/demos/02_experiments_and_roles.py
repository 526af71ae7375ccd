"""Walkthrough: experiment lifecycle, email invitations, the four permission
levels, and participant moderation (remove / ban / report).

    python demos/02_experiments_and_roles.py
"""

from pathlib import Path

from discourse_sandbox import Sandbox, SandboxConfig
from discourse_sandbox.errors import Forbidden
from discourse_sandbox.models import Role
from discourse_sandbox.permissions import ALL_ACTIONS, can

OUTBOX = "/tmp/sandbox-demo-outbox"
sandbox = Sandbox(SandboxConfig(email_sink_dir=OUTBOX))
admin = sandbox.seed_admin("root_admin", "admin@demo.test", "deploy-time-secret-1")
consents = ["platform_rules", "research_participation"]

request = sandbox.identity.request_researcher_access(
    "meera", "meera@lab.test", "a-long-password-1", "Meera", consents,
    "Professor", "Demo University", "Sociology", "Echo chamber study.")
sandbox.identity.decide_researcher_request(admin, request.id, approve=True)
meera = sandbox.store.get_user(request.user_id)

print("== creating a private experiment (IRB document required) ==")
experiment = sandbox.experiments.create_experiment(
    meera, "Echo Chambers 2026",
    "How newsfeed homogeneity shapes replies.",
    irb_document=(b"%PDF-1.4 demo irb", "application/pdf"))
print(f"experiment {experiment.id}: {experiment.title!r}, visibility={experiment.visibility.value}")

print("\n== the permission matrix, row by row ==")
for role in Role:
    allowed = [a for a in ALL_ACTIONS if can(role, a)]
    print(f"{role.value:>17}: {', '.join(allowed)}")

print("\n== inviting participants by email ==")
for handle, role in [("coco", "collaborator"), ("momo", "content_moderator"),
                     ("ravi", "regular")]:
    user = sandbox.identity.register(handle, f"{handle}@demo.test",
                                     "participant-pass-1", handle.title(), consents)
    invitation = sandbox.experiments.invite(meera, experiment.id,
                                            f"{handle}@demo.test", role)
    membership = sandbox.experiments.accept_invitation(invitation.token, user)
    print(f"@{handle} joined as {membership.role.value}")

newest_email = sorted(Path(OUTBOX).glob("*invitation*"))[-1]
print(f"\ninvitation emails land in the dev sink, e.g. {newest_email.name}:")
print("  " + "\n  ".join(newest_email.read_text().splitlines()[:6]))

print("\n== role boundaries in action ==")
coco = sandbox.store.find_user("coco")
momo = sandbox.store.find_user("momo")
ravi = sandbox.store.find_user("ravi")
try:
    sandbox.experiments.invite(coco, experiment.id, "friend@demo.test", "collaborator")
except Forbidden as exc:
    print(f"collaborator inviting a collaborator -> {exc.code}")

banned = sandbox.experiments.ban_member(momo, experiment.id, ravi.id)
print(f"content moderator bans @ravi -> status={banned.status.value}")
try:
    sandbox.experiments.invite(coco, experiment.id, "ravi@demo.test", "regular")
except Forbidden as exc:
    print(f"collaborator re-inviting the banned user -> {exc.code} (owner only)")

report = sandbox.experiments.report_user(coco, experiment.id, momo.id,
                                         "overzealous moderation")
print(f"user report filed: #{report.id} ({report.reason!r})")
