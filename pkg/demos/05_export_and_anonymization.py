"""Walkthrough: experiment data export — NDJSON record streams plus manifest,
zipped; optionally pseudonymized with a discarded per-export key.

    python demos/05_export_and_anonymization.py
"""

import io
import json
import zipfile

from discourse_sandbox import Sandbox, SandboxConfig
from discourse_sandbox.exports import read_bundle

sandbox = Sandbox(SandboxConfig(email_sink_dir="/tmp/sandbox-demo-outbox"))
admin = sandbox.seed_admin("root_admin", "admin@demo.test", "deploy-secret-1")
consents = ["platform_rules", "research_participation"]
request = sandbox.identity.request_researcher_access(
    "meera", "meera@lab.test", "a-long-password-1", "Meera", consents,
    "Professor", "Demo University", "Sociology", "Export demo.")
sandbox.identity.decide_researcher_request(admin, request.id, approve=True)
meera = sandbox.store.get_user(request.user_id)
experiment = sandbox.experiments.create_experiment(
    meera, "Export Demo", "What leaves the sandbox.",
    (b"%PDF-1.4 demo", "application/pdf"))

people = {}
for handle in ("ada", "bob"):
    user = sandbox.identity.register(handle, f"{handle}@demo.test",
                                     "participant-pass-1", handle.title(), consents)
    invitation = sandbox.experiments.invite(meera, experiment.id,
                                            f"{handle}@demo.test", "regular")
    sandbox.experiments.accept_invitation(invitation.token, user)
    people[handle] = user

ada_scope = sandbox.store.scoped(experiment.id, people["ada"].id)
bob_scope = sandbox.store.scoped(experiment.id, people["bob"].id)
p1 = sandbox.discourse.create_post(ada_scope, "ada waves at bob #hello")
sandbox.discourse.like(bob_scope, p1.id)
sandbox.discourse.reply(bob_scope, p1.id, "bob waves back at ada")
sandbox.discourse.follow(bob_scope, people["ada"].id)

print("== plain export ==")
raw = sandbox.exports.export_experiment(meera, experiment.id, anonymize=False)
with zipfile.ZipFile(io.BytesIO(raw)) as archive:
    print("bundle files:", ", ".join(archive.namelist()))
bundle = read_bundle(raw)
print("manifest:", json.dumps(bundle["manifest"], indent=2)[:400])
print("first post record:", json.dumps(bundle["posts"][0]))

print("\n== anonymized export ==")
anonymized = read_bundle(sandbox.exports.export_experiment(
    meera, experiment.id, anonymize=True))
print("first post record:", json.dumps(anonymized["posts"][0]))
print("membership identities:",
      [m["user"] for m in anonymized["memberships"]])
author = anonymized["posts"][0]["author"]
same_author_posts = [p["id"] for p in anonymized["posts"] if p["author"] == author]
print(f"pseudonym {author} is stable across records (posts {same_author_posts});")
print("the keyed-hash key is discarded after export, so the mapping is not recoverable.")
print("note: handles inside post bodies were scrubbed too:",
      json.dumps(anonymized["posts"][1]["body"]))
