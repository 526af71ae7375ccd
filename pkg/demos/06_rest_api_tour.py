"""Walkthrough: the HTTP gateway — real uvicorn server, bearer sessions,
enforcement ordering (401 before 403), REST discourse, and the SSE stream.

Requires uvicorn (installed with the `test` extra).

    python demos/06_rest_api_tour.py
"""

import json
import threading
import time

import httpx
import uvicorn

from discourse_sandbox import Sandbox, SandboxConfig, totp
from discourse_sandbox.gateway import create_app

sandbox = Sandbox(SandboxConfig(email_sink_dir="/tmp/sandbox-demo-outbox",
                                sse_heartbeat_seconds=2.0))
admin = sandbox.seed_admin("root_admin", "admin@demo.test", "deploy-secret-1")
app = create_app(sandbox, run_agent_worker=True)

config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
server = uvicorn.Server(config)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.01)
port = server.servers[0].sockets[0].getsockname()[1]
base = f"http://127.0.0.1:{port}"
print(f"gateway serving at {base} (OpenAPI at /api/openapi.json)")

with httpx.Client(base_url=base, timeout=10) as http:
    print("health:", http.get("/healthz").json())

    print("\n== registering and logging in over REST ==")
    http.post("/auth/researcher-request", json={
        "handle": "meera", "email": "meera@lab.test",
        "password": "a-long-password-1", "display_name": "Meera",
        "consents": ["platform_rules", "research_participation"],
        "position_title": "Professor", "institution": "Demo University",
        "department": "Sociology", "intent": "REST tour."})
    request_id = sandbox.store.researcher_requests
    sandbox.identity.decide_researcher_request(
        admin, next(iter(request_id)), approve=True)

    login = http.post("/auth/login", json={
        "handle_or_email": "meera", "password": "a-long-password-1"}).json()
    half = {"Authorization": f"Bearer {login['token']}"}
    print("password-only session denied content:",
          http.get("/api/experiments", headers=half).json()["code"])

    enroll = http.post("/auth/2fa/enroll", json={"label": "phone"},
                       headers=half).json()
    secret = enroll["provisioning_uri"].split("secret=")[1].split("&")[0]
    verify = http.post("/auth/2fa/verify", json={
        "device_id": enroll["device_id"],
        "code": totp.totp_at(secret, time.time())}, headers=half).json()
    auth = {"Authorization": f"Bearer {verify['token']}"}
    print("2FA-complete session established")

    print("\n== experiment + discourse over REST ==")
    experiment = http.post("/api/experiments", json={
        "title": "REST Tour", "description": "Driven end to end over HTTP.",
        "irb_document": {"content_type": "application/pdf",
                         "data_base64": "JVBERi0xLjQgZGVtbw=="}},
        headers=auth).json()
    post = http.post(f"/api/experiments/{experiment['id']}/posts",
                     json={"body": "First post over the wire #rest"},
                     headers=auth).json()
    print("created:", post["id"], post["hashtags"])
    print("explore:", [i["id"] for i in http.get(
        f"/api/experiments/{experiment['id']}/feed/explore",
        headers=auth).json()["items"]])
    print("trending:", http.get(f"/api/experiments/{experiment['id']}/trending",
                                headers=auth).json()["trending"])

    print("\n== SSE: a live notification ==")
    got = {}

    def listen():
        with http.stream("GET", "/api/events", headers=auth) as response:
            current = {}
            for line in response.iter_lines():
                if line.startswith("event:"):
                    current["event"] = line.split(":", 1)[1].strip()
                elif line.startswith("data:"):
                    current["data"] = json.loads(line.split(":", 1)[1])
                elif line == "" and current:
                    if current.get("event") == "notification":
                        got.update(current)
                        return
                    current = {}

    listener = threading.Thread(target=listen)
    listener.start()
    time.sleep(0.3)

    # a second account likes the post, which must reach the SSE stream
    http.post("/auth/register", json={
        "handle": "fan", "email": "fan@demo.test",
        "password": "participant-pass-1", "display_name": "Fan",
        "consents": ["platform_rules", "research_participation"]})
    fan = sandbox.store.find_user("fan")
    invitation = sandbox.experiments.invite(
        sandbox.store.find_user("meera"), experiment["id"],
        "fan@demo.test", "regular")
    sandbox.experiments.accept_invitation(invitation.token, fan)
    fan_login = http.post("/auth/login", json={
        "handle_or_email": "fan", "password": "participant-pass-1"}).json()
    fan_half = {"Authorization": f"Bearer {fan_login['token']}"}
    fan_enroll = http.post("/auth/2fa/enroll", json={"label": "p"},
                           headers=fan_half).json()
    fan_secret = fan_enroll["provisioning_uri"].split("secret=")[1].split("&")[0]
    fan_full = http.post("/auth/2fa/verify", json={
        "device_id": fan_enroll["device_id"],
        "code": totp.totp_at(fan_secret, time.time())}, headers=fan_half).json()
    http.put(f"/api/posts/{post['id']}/like",
             headers={"Authorization": f"Bearer {fan_full['token']}"})

    listener.join(timeout=5)
    print("SSE delivered:", got.get("event"), got.get("data"))

server.should_exit = True
server.force_exit = True
thread.join(timeout=3)
print("\ndone.")
