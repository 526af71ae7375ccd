"""Walkthrough: account registration, consent capture, researcher vetting,
and the mandatory two-factor login flow.

    python demos/01_accounts_and_2fa.py
"""

from discourse_sandbox import Sandbox, SandboxConfig, totp

sandbox = Sandbox(SandboxConfig(email_sink_dir="/tmp/sandbox-demo-outbox"))
admin = sandbox.seed_admin("root_admin", "admin@demo.test", "deploy-time-secret-1")

# -- a regular participant registers, accepting both consent documents --------
print("== registration ==")
ada = sandbox.identity.register(
    "ada", "ada@demo.test", "a-sufficiently-long-password", "Ada",
    consents=["platform_rules", "research_participation"])
print(f"registered @{ada.handle} (kind={ada.kind.value}, created {ada.created_at:%Y-%m-%d})")
for record in sandbox.store.consents_for(ada.id):
    print(f"  consent on file: {record.document_kind} v{record.document_version}")

# -- a researcher asks for elevated access; a platform admin vets it -----------
print("\n== researcher vetting ==")
request = sandbox.identity.request_researcher_access(
    "meera", "meera@lab.test", "another-long-password", "Meera",
    ["platform_rules", "research_participation"],
    position_title="Assistant Professor", institution="Demo University",
    department="Communication", intent="Study counterspeech dynamics.")
print(f"request from @meera is {request.state.value}")
sandbox.identity.decide_researcher_request(admin, request.id, approve=True)
meera = sandbox.store.get_user(request.user_id)
print(f"after approval @meera kind={meera.kind.value}")

# -- two-factor enrollment and login -------------------------------------------
print("\n== two-factor login ==")
device, uri = sandbox.identity.enroll_totp(ada, "ada's phone")
print(f"provisioning URI: {uri[:48]}...")
code = totp.totp_at(device.secret, sandbox.clock.unix())
sandbox.identity.confirm_totp(ada, device.id, code)
print("device confirmed with a current code")

session = sandbox.identity.login("ada", "a-sufficiently-long-password")
print(f"password login alone: second_factor_passed={session.second_factor_passed}")
full = sandbox.identity.verify_second_factor(
    session, totp.totp_at(device.secret, sandbox.clock.unix()))
print(f"after TOTP: second_factor_passed={full.second_factor_passed}")
print("only now can the account reach experiment content")
