"""Walkthrough: AI agent accounts end to end with the stub inference server.

Three persona agents watch the experiment; one human post triggers one event
per agent, each agent runs one bounded turn against an OpenAI-compatible
endpoint (the built-in stub here), and their scripted decisions produce a
like, a repost, and a reply. The reply event then fans out to the other two
agents, who decline, and the cascade stops.

    python demos/04_agents_with_stub_inference.py
"""

from discourse_sandbox import Sandbox, SandboxConfig
from discourse_sandbox.inference import HttpInferenceClient, StubInferenceServer

SCRIPT = [
    "DECISION: like",
    "DECISION: repost",
    "DECISION: reply\nTEXT: Strong claim. What does the data say?",
    "DECISION: none",
    "DECISION: none",
]

PERSONAS = {
    "lurklight": "You are a quiet observer who likes posts you agree with.",
    "amplifier": "You amplify interesting content by reposting it.",
    "socratic":  "You reply with probing questions, never statements.",
}

with StubInferenceServer(SCRIPT) as stub:
    print(f"stub chat-completion server listening at {stub.base_url}")
    sandbox = Sandbox(SandboxConfig(email_sink_dir="/tmp/sandbox-demo-outbox"),
                      inference_client=HttpInferenceClient(timeout_seconds=10))
    admin = sandbox.seed_admin("root_admin", "admin@demo.test", "deploy-secret-1")
    consents = ["platform_rules", "research_participation"]
    request = sandbox.identity.request_researcher_access(
        "meera", "meera@lab.test", "a-long-password-1", "Meera", consents,
        "Professor", "Demo University", "Sociology", "Agent demo.")
    sandbox.identity.decide_researcher_request(admin, request.id, approve=True)
    meera = sandbox.store.get_user(request.user_id)
    experiment = sandbox.experiments.create_experiment(
        meera, "Agent Demo", "Three personas, one post.",
        (b"%PDF-1.4 demo", "application/pdf"))
    human = sandbox.identity.register("human", "human@demo.test",
                                      "participant-pass-1", "Human", consents)
    invitation = sandbox.experiments.invite(meera, experiment.id,
                                            "human@demo.test", "regular")
    sandbox.experiments.accept_invitation(invitation.token, human)

    print("\n== registering persona agents ==")
    for handle, persona in PERSONAS.items():
        agent = sandbox.agents.register_agent(
            meera, experiment.id, handle, display_name=handle.title(),
            persona_prompt=persona, model_name="stub-model",
            endpoint_url=stub.base_url, api_key=f"sk-{handle}",
            trigger_policy="all_posts", min_seconds_between_actions=0)
        print(f"  @{handle}: policy={agent.trigger_policy.value}, "
              f"actions={sorted(a.value for a in agent.actions_enabled)}, "
              f"depth<= {agent.max_thread_depth}")

    print("\n== one human post triggers one event per agent ==")
    scope = sandbox.store.scoped(experiment.id, human.id)
    post = sandbox.discourse.create_post(
        scope, "Moderated platforms produce better arguments. Discuss.")
    system = sandbox.store.system_scope(experiment.id)
    print(f"tasks queued: {len(system.tasks())}")

    executed = sandbox.agents.run_pending()
    print(f"turns executed (including reply fan-out): {executed}")

    print("\n== resulting transcript ==")
    for p in sorted(system.posts(), key=lambda p: p.id):
        author = sandbox.store.get_user(p.author_id)
        badge = " [agent]" if author.is_agent else ""
        body = p.body if p.body else f"(repost of #{p.repost_of})"
        print(f"  #{p.id} @{author.handle}{badge} ({p.kind.value}): {body}")
    for like in system.likes():
        print(f"  like: @{sandbox.store.get_user(like.user_id).handle} "
              f"on #{like.post_id}")

    print("\n== task ledger ==")
    for task in sorted(system.tasks(), key=lambda t: t.id):
        agent = system.get_agent(task.agent_id)
        handle = sandbox.store.get_user(agent.user_id).handle
        actions = [a["action"] for a in task.actions_taken] or ["(none)"]
        print(f"  task {task.id}: @{handle} event={task.event_id} "
              f"state={task.state.value} actions={actions}")

    print(f"\nthe stub served {len(stub.requests)} chat-completion requests, "
          f"bearer auth seen: {stub.requests[0]['authorization'][:9]}...")
