"""HTTP surface: REST routes, session enforcement and the SSE stream.

Enforcement order on every protected route: session, then second factor,
then membership, then the permission matrix; the first failing layer answers
(401 before 403). Errors serialize as ``{code, message, details}`` where the
code is the error class name.

Post and flag identifiers are experiment-local sequence numbers, so their
public form is ``{experiment_id}:{seq}``.
"""

from __future__ import annotations

import base64
import binascii
import json
import threading
import time
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from . import errors
from .models import (
    AgentProfile, Experiment, Invitation, Membership, Notification, PostView,
    Session, UserAccount,
)
from .service import Sandbox


# -- wire helpers ---------------------------------------------------------------

def post_ref(experiment_id: str, post_id: int) -> str:
    return f"{experiment_id}:{post_id}"


def parse_ref(ref: str) -> tuple[str, int]:
    experiment_id, _, seq = ref.partition(":")
    try:
        return experiment_id, int(seq)
    except ValueError:
        raise errors.NotFound(f"malformed id '{ref}'")


def decode_media(payload: "MediaPayload") -> tuple[bytes, str]:
    try:
        return base64.b64decode(payload.data_base64, validate=True), payload.content_type
    except (binascii.Error, ValueError):
        raise errors.ValidationError("media payload is not valid base64")


def user_json(user: UserAccount) -> dict:
    return {
        "id": user.id, "handle": user.handle, "display_name": user.display_name,
        "bio": user.bio, "kind": user.kind.value,
        "created_at": user.created_at.isoformat(),
        "is_agent": user.is_agent,
        "profile_photo": user.profile_photo, "banner_photo": user.banner_photo,
    }


def experiment_json(experiment: Experiment) -> dict:
    return {
        "id": experiment.id, "title": experiment.title,
        "description": experiment.description,
        "visibility": experiment.visibility.value,
        "owner": experiment.owner,
        "created_at": experiment.created_at.isoformat(),
        "irb_document": experiment.irb_document,
        "agent_badge_visible": experiment.agent_badge_visible,
    }


def membership_json(membership: Membership) -> dict:
    return {
        "user_id": membership.user_id, "experiment_id": membership.experiment_id,
        "role": membership.role.value, "status": membership.status.value,
        "joined_at": membership.joined_at.isoformat() if membership.joined_at else None,
    }


def invitation_json(invitation: Invitation) -> dict:
    return {
        "token": invitation.token, "experiment_id": invitation.experiment_id,
        "email": invitation.email, "role": invitation.role.value,
        "state": invitation.state.value,
        "expires_at": invitation.expires_at.isoformat(),
    }


def post_view_json(view: PostView) -> dict:
    post = view.post
    return {
        "id": post_ref(post.experiment_id, post.id),
        "experiment_id": post.experiment_id,
        "author": {"id": post.author_id, "handle": view.author_handle,
                   "display_name": view.author_display_name,
                   "is_agent": view.author_is_agent},
        "kind": post.kind.value,
        "body": post.body,
        "parent_id": (post_ref(post.experiment_id, post.parent_id)
                      if post.parent_id else None),
        "repost_of": (post_ref(post.experiment_id, post.repost_of)
                      if post.repost_of else None),
        "hashtags": sorted(post.hashtags),
        "created_at": post.created_at.isoformat(),
        "like_count": view.like_count,
        "repost_count": view.repost_count,
        "comment_count": view.comment_count,
        "liked_by_caller": view.liked_by_caller,
    }


def notification_json(note: Notification) -> dict:
    return {
        "id": note.id, "kind": note.kind.value, "actor_id": note.actor_id,
        "subject_post_id": (post_ref(note.experiment_id, note.subject_post_id)
                            if note.subject_post_id else None),
        "experiment_id": note.experiment_id,
        "created_at": note.created_at.isoformat(), "seen": note.seen,
    }


def agent_json(agent: AgentProfile, handle: str = "") -> dict:
    return {
        "id": agent.id, "experiment_id": agent.experiment_id,
        "user_id": agent.user_id, "handle": handle,
        "persona_prompt": agent.persona_prompt,
        "endpoint_url": agent.endpoint_url, "model_name": agent.model_name,
        "has_api_key": agent.api_key_ref is not None,
        "trigger_policy": agent.trigger_policy.value,
        "actions_enabled": sorted(a.value for a in agent.actions_enabled),
        "max_thread_depth": agent.max_thread_depth,
        "min_seconds_between_actions": agent.min_seconds_between_actions,
        "active": agent.active,
    }


# -- request bodies -----------------------------------------------------------------

class MediaPayload(BaseModel):
    content_type: str
    data_base64: str


class RegisterBody(BaseModel):
    handle: str
    email: str
    password: str
    display_name: str = ""
    consents: list[str] = []


class ResearcherRequestBody(RegisterBody):
    position_title: str = ""
    institution: str = ""
    department: str = ""
    intent: str = ""


class LoginBody(BaseModel):
    handle_or_email: str
    password: str


class EnrollBody(BaseModel):
    label: str = "authenticator"


class VerifyBody(BaseModel):
    code: str
    device_id: Optional[str] = None


class ResetRequestBody(BaseModel):
    email: str


class ResetConfirmBody(BaseModel):
    token: str
    new_password: str


class ProfilePatch(BaseModel):
    display_name: Optional[str] = None
    bio: Optional[str] = None
    profile_photo: Optional[MediaPayload] = None
    banner_photo: Optional[MediaPayload] = None


class ExperimentBody(BaseModel):
    title: str
    description: str = ""
    visibility: str = "private"
    irb_document: Optional[MediaPayload] = None


class ExperimentPatch(BaseModel):
    title: Optional[str] = None
    description: Optional[str] = None
    agent_badge_visible: Optional[bool] = None


class InviteBody(BaseModel):
    email: str
    role: str = "regular"


class ReportBody(BaseModel):
    user_id: str
    reason: str


class BanBody(BaseModel):
    user_id: str


class PostBody(BaseModel):
    body: str


class FlagBody(BaseModel):
    reason: str = ""


class ResolveBody(BaseModel):
    action: str


class SeenBody(BaseModel):
    up_to_id: int


class AgentBody(BaseModel):
    handle: str
    display_name: str = ""
    bio: str = ""
    persona_prompt: str = ""
    model_name: str = ""
    endpoint_url: Optional[str] = None
    api_key: Optional[str] = None
    trigger_policy: str = "all_posts"
    actions_enabled: Optional[list[str]] = None
    max_thread_depth: int = 4
    min_seconds_between_actions: int = 30


class AgentPatch(BaseModel):
    persona_prompt: Optional[str] = None
    endpoint_url: Optional[str] = None
    api_key: Optional[str] = None
    model_name: Optional[str] = None
    trigger_policy: Optional[str] = None
    actions_enabled: Optional[list[str]] = None
    max_thread_depth: Optional[int] = None
    min_seconds_between_actions: Optional[int] = None
    active: Optional[bool] = None


# -- app factory ------------------------------------------------------------------------

def create_app(sandbox: Sandbox, run_agent_worker: bool = False,
               static_dir: str | None = None) -> FastAPI:
    worker_stop = threading.Event()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        worker = None
        if run_agent_worker:
            def drain():
                while not worker_stop.is_set():
                    if sandbox.agents.pending_count():
                        sandbox.agents.run_pending()
                    worker_stop.wait(0.05)
            worker = threading.Thread(target=drain, daemon=True)
            worker.start()
        yield
        worker_stop.set()
        if worker is not None:
            worker.join(timeout=2)

    app = FastAPI(title="discourse-sandbox", openapi_url="/api/openapi.json",
                  docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.sandbox = sandbox

    @app.exception_handler(errors.SandboxError)
    async def sandbox_error_handler(request: Request, exc: errors.SandboxError):
        return JSONResponse(status_code=exc.http_status, content=exc.to_payload())

    # -- session dependencies -----------------------------------------------------

    def first_factor_session(authorization: Optional[str] = Header(None)) -> Session:
        if not authorization or not authorization.startswith("Bearer "):
            raise errors.Unauthorized("missing bearer token")
        session = sandbox.identity.resolve_session(authorization.removeprefix("Bearer "))
        if session is None:
            raise errors.Unauthorized("unknown or expired session")
        return session

    def full_session(session: Session = Depends(first_factor_session)) -> Session:
        if not session.second_factor_passed:
            raise errors.SecondFactorRequired("complete two-factor authentication first")
        return session

    def current_user(session: Session = Depends(full_session)) -> UserAccount:
        user = sandbox.store.get_user(session.user_id)
        if user is None:
            raise errors.Unauthorized("account gone")
        return user

    # -- health / auth ----------------------------------------------------------------

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/auth/register", status_code=201)
    def register(body: RegisterBody):
        user = sandbox.identity.register(
            body.handle, body.email, body.password, body.display_name, body.consents)
        return user_json(user)

    @app.post("/auth/researcher-request", status_code=201)
    def researcher_request(body: ResearcherRequestBody):
        request = sandbox.identity.request_researcher_access(
            body.handle, body.email, body.password, body.display_name, body.consents,
            body.position_title, body.institution, body.department, body.intent)
        return {"request_id": request.id, "state": request.state.value,
                "user_id": request.user_id}

    @app.post("/auth/login")
    def login(body: LoginBody):
        session = sandbox.identity.login(body.handle_or_email, body.password)
        has_device = sandbox.identity.has_confirmed_device(session.user_id)
        return {"token": session.token,
                "second_factor_passed": session.second_factor_passed,
                "second_factor_enrolled": has_device}

    @app.post("/auth/2fa/enroll", status_code=201)
    def enroll_2fa(body: EnrollBody, session: Session = Depends(first_factor_session)):
        user = sandbox.store.get_user(session.user_id)
        device, uri = sandbox.identity.enroll_totp(user, body.label)
        return {"device_id": device.id, "provisioning_uri": uri}

    @app.post("/auth/2fa/verify")
    def verify_2fa(body: VerifyBody, session: Session = Depends(first_factor_session)):
        user = sandbox.store.get_user(session.user_id)
        if body.device_id is not None:
            sandbox.identity.confirm_totp(user, body.device_id, body.code)
        upgraded = sandbox.identity.verify_second_factor(session, body.code)
        return {"token": upgraded.token, "second_factor_passed": True}

    @app.post("/auth/password-reset/request")
    def password_reset_request(body: ResetRequestBody):
        sandbox.identity.request_password_reset(body.email)
        return {"status": "accepted"}   # same answer for unknown addresses

    @app.post("/auth/password-reset/confirm")
    def password_reset_confirm(body: ResetConfirmBody):
        user = sandbox.identity.reset_password(body.token, body.new_password)
        return {"status": "ok", "user_id": user.id}

    @app.get("/account")
    def get_account(user: UserAccount = Depends(current_user)):
        return user_json(user)

    @app.patch("/account")
    def patch_account(body: ProfilePatch, user: UserAccount = Depends(current_user)):
        updated = sandbox.identity.update_profile(
            user,
            display_name=body.display_name,
            bio=body.bio,
            profile_photo=decode_media(body.profile_photo) if body.profile_photo else None,
            banner_photo=decode_media(body.banner_photo) if body.banner_photo else None)
        return user_json(updated)

    @app.get("/api/media/{media_id}")
    def get_media(media_id: str, user: UserAccount = Depends(current_user)):
        blob = sandbox.store.get_media(media_id)
        if blob is None:
            raise errors.NotFound("no such media")
        return Response(content=blob.data, media_type=blob.content_type)

    # -- experiments ---------------------------------------------------------------------

    @app.post("/api/experiments", status_code=201)
    def create_experiment(body: ExperimentBody, user: UserAccount = Depends(current_user)):
        if body.irb_document is None:
            raise errors.MissingIrbDocument("an IRB document is required at creation")
        experiment = sandbox.experiments.create_experiment(
            user, body.title, body.description,
            decode_media(body.irb_document), body.visibility)
        return experiment_json(experiment)

    @app.get("/api/experiments")
    def list_experiments(user: UserAccount = Depends(current_user)):
        listing = sandbox.experiments.list_for(user)
        return {
            "mine": [{"experiment": experiment_json(row["experiment"]),
                      "membership": membership_json(row["membership"])}
                     for row in listing["mine"]],
            "potential": [{"experiment": experiment_json(row["experiment"]),
                           "invitation": invitation_json(row["invitation"])}
                          for row in listing["potential"]],
        }

    @app.patch("/api/experiments/{experiment_id}")
    def patch_experiment(experiment_id: str, body: ExperimentPatch,
                         user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        experiment = sandbox.experiments.update_experiment(
            scope.membership, title=body.title, description=body.description,
            agent_badge_visible=body.agent_badge_visible)
        return experiment_json(experiment)

    @app.get("/api/experiments/{experiment_id}/members")
    def list_members(experiment_id: str, user: UserAccount = Depends(current_user)):
        sandbox.scope_for(user, experiment_id)
        rows = []
        for membership in sandbox.store.members_of(experiment_id):
            member = sandbox.store.get_user(membership.user_id)
            row = membership_json(membership)
            row["handle"] = member.handle if member else ""
            row["display_name"] = member.display_name if member else ""
            row["is_agent"] = bool(member and member.is_agent)
            rows.append(row)
        return {"members": rows}

    @app.post("/api/experiments/{experiment_id}/invitations", status_code=201)
    def invite(experiment_id: str, body: InviteBody,
               user: UserAccount = Depends(current_user)):
        invitation = sandbox.experiments.invite(user, experiment_id, body.email, body.role)
        return invitation_json(invitation)

    @app.post("/api/invitations/{token}/accept")
    def accept_invitation(token: str, user: UserAccount = Depends(current_user)):
        membership = sandbox.experiments.accept_invitation(token, user)
        return membership_json(membership)

    @app.delete("/api/experiments/{experiment_id}/members/{user_id}")
    def remove_member(experiment_id: str, user_id: str,
                      user: UserAccount = Depends(current_user)):
        membership = sandbox.experiments.remove_member(user, experiment_id, user_id)
        return membership_json(membership)

    @app.post("/api/experiments/{experiment_id}/bans")
    def ban_member(experiment_id: str, body: BanBody,
                   user: UserAccount = Depends(current_user)):
        membership = sandbox.experiments.ban_member(user, experiment_id, body.user_id)
        return membership_json(membership)

    @app.post("/api/experiments/{experiment_id}/reports", status_code=201)
    def report_user(experiment_id: str, body: ReportBody,
                    user: UserAccount = Depends(current_user)):
        report = sandbox.experiments.report_user(
            user, experiment_id, body.user_id, body.reason)
        return {"id": report.id, "experiment_id": report.experiment_id,
                "reporter_id": report.reporter_id, "target_id": report.target_id,
                "reason": report.reason, "resolved": report.resolved}

    # -- discourse ------------------------------------------------------------------------

    @app.post("/api/experiments/{experiment_id}/posts", status_code=201)
    def create_post(experiment_id: str, body: PostBody,
                    user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        post = sandbox.discourse.create_post(scope, body.body)
        return post_view_json(sandbox.feeds.post_view(scope, post, user.id))

    @app.post("/api/posts/{ref}/replies", status_code=201)
    def reply(ref: str, body: PostBody, user: UserAccount = Depends(current_user)):
        experiment_id, post_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        post = sandbox.discourse.reply(scope, post_id, body.body)
        return post_view_json(sandbox.feeds.post_view(scope, post, user.id))

    @app.put("/api/posts/{ref}/like")
    def like(ref: str, user: UserAccount = Depends(current_user)):
        experiment_id, post_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        sandbox.discourse.like(scope, post_id)
        return {"status": "liked"}

    @app.delete("/api/posts/{ref}/like")
    def undo_like(ref: str, user: UserAccount = Depends(current_user)):
        experiment_id, post_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        sandbox.discourse.undo_like(scope, post_id)
        return {"status": "unliked"}

    @app.post("/api/posts/{ref}/repost", status_code=201)
    def repost(ref: str, user: UserAccount = Depends(current_user)):
        experiment_id, post_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        post = sandbox.discourse.repost(scope, post_id)
        return post_view_json(sandbox.feeds.post_view(scope, post, user.id))

    @app.put("/api/users/{user_id}/follow")
    def follow(user_id: str, experiment: str = Query(...),
               user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment)
        sandbox.discourse.follow(scope, user_id)
        return {"status": "following"}

    @app.delete("/api/users/{user_id}/follow")
    def unfollow(user_id: str, experiment: str = Query(...),
                 user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment)
        sandbox.discourse.unfollow(scope, user_id)
        return {"status": "unfollowed"}

    @app.delete("/api/posts/{ref}")
    def delete_post(ref: str, user: UserAccount = Depends(current_user)):
        experiment_id, post_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        post = sandbox.discourse.delete_post(scope, post_id)
        return {"status": "deleted", "id": post_ref(experiment_id, post.id)}

    # -- moderation -------------------------------------------------------------------------

    @app.post("/api/posts/{ref}/flags", status_code=201)
    def flag_post(ref: str, body: FlagBody, user: UserAccount = Depends(current_user)):
        experiment_id, post_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        flag = sandbox.moderation.flag_post(scope, post_id, body.reason)
        return {"id": post_ref(experiment_id, flag.id), "post_id": ref,
                "state": flag.state.value, "reason": flag.reason}

    @app.post("/api/flags/{ref}/resolve")
    def resolve_flag(ref: str, body: ResolveBody,
                     user: UserAccount = Depends(current_user)):
        experiment_id, flag_id = parse_ref(ref)
        scope = sandbox.scope_for(user, experiment_id)
        flag = sandbox.moderation.resolve_flag(scope, flag_id, body.action)
        return {"id": ref, "state": flag.state.value, "resolution": flag.resolution}

    # -- feeds ------------------------------------------------------------------------------

    def _feed_json(page) -> dict:
        return {"items": [post_view_json(v) for v in page.items],
                "next_cursor": page.next_cursor}

    @app.get("/api/experiments/{experiment_id}/feed/home")
    def home_feed(experiment_id: str, cursor: Optional[str] = None,
                  user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        return _feed_json(sandbox.feeds.home_feed(scope, cursor))

    @app.get("/api/experiments/{experiment_id}/feed/explore")
    def explore_feed(experiment_id: str, cursor: Optional[str] = None,
                     user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        return _feed_json(sandbox.feeds.explore_feed(scope, cursor))

    @app.get("/api/experiments/{experiment_id}/hashtags/{tag}")
    def hashtag_feed(experiment_id: str, tag: str, cursor: Optional[str] = None,
                     user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        return _feed_json(sandbox.feeds.hashtag_feed(scope, tag, cursor))

    @app.get("/api/experiments/{experiment_id}/search")
    def search(experiment_id: str, q: str = Query(""), cursor: Optional[str] = None,
               user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        result = sandbox.feeds.search(scope, q, cursor)
        return {"posts": _feed_json(result["posts"]),
                "accounts": [user_json(u) for u in result["accounts"]]}

    @app.get("/api/experiments/{experiment_id}/trending")
    def trending(experiment_id: str, user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        return {"trending": [{"tag": entry.tag,
                              "unique_post_count": entry.unique_post_count}
                             for entry in sandbox.feeds.trending(scope)]}

    @app.get("/api/experiments/{experiment_id}/threads/{post_id}")
    def thread(experiment_id: str, post_id: int,
               user: UserAccount = Depends(current_user)):
        scope = sandbox.scope_for(user, experiment_id)
        views = sandbox.feeds.thread(scope, post_id)
        return {"items": [post_view_json(v) for v in views]}

    @app.get("/api/notifications")
    def notifications(filter: str = Query("all"), cursor: Optional[str] = None,
                      user: UserAccount = Depends(current_user)):
        result = sandbox.feeds.notifications(user.id, filter, cursor)
        return {"items": [notification_json(n) for n in result["items"]],
                "next_cursor": result["next_cursor"],
                "unseen_count": sandbox.feeds.unseen_count(user.id)}

    @app.post("/api/notifications/seen")
    def mark_seen(body: SeenBody, user: UserAccount = Depends(current_user)):
        marked = sandbox.feeds.mark_seen(user.id, body.up_to_id)
        return {"marked": marked, "unseen_count": sandbox.feeds.unseen_count(user.id)}

    # -- agents ------------------------------------------------------------------------------

    @app.post("/api/experiments/{experiment_id}/agents", status_code=201)
    def register_agent(experiment_id: str, body: AgentBody,
                       user: UserAccount = Depends(current_user)):
        agent = sandbox.agents.register_agent(
            user, experiment_id, body.handle, body.display_name,
            body.persona_prompt, body.model_name, endpoint_url=body.endpoint_url,
            api_key=body.api_key, bio=body.bio, trigger_policy=body.trigger_policy,
            actions_enabled=body.actions_enabled,
            max_thread_depth=body.max_thread_depth,
            min_seconds_between_actions=body.min_seconds_between_actions)
        account = sandbox.store.get_user(agent.user_id)
        return agent_json(agent, handle=account.handle if account else "")

    def _find_agent(agent_id: str) -> tuple[str, AgentProfile]:
        for experiment_id in sandbox.store.experiment_ids():
            agent = sandbox.store.system_scope(experiment_id).get_agent(agent_id)
            if agent is not None:
                return experiment_id, agent
        raise errors.NotFound("no such agent")

    @app.patch("/api/agents/{agent_id}")
    def patch_agent(agent_id: str, body: AgentPatch,
                    user: UserAccount = Depends(current_user)):
        experiment_id, _ = _find_agent(agent_id)
        agent = sandbox.agents.update_agent(
            user, experiment_id, agent_id,
            **body.model_dump(exclude_unset=True))
        account = sandbox.store.get_user(agent.user_id)
        return agent_json(agent, handle=account.handle if account else "")

    @app.get("/api/agents/{agent_id}/tasks")
    def agent_tasks(agent_id: str, user: UserAccount = Depends(current_user)):
        experiment_id, agent = _find_agent(agent_id)
        scope = sandbox.scope_for(user, experiment_id)
        tasks = [t for t in scope.tasks() if t.agent_id == agent_id]
        return {"tasks": [{
            "id": t.id, "event_id": t.event_id, "state": t.state.value,
            "attempts": t.attempts, "actions_taken": t.actions_taken,
            "notes": t.notes,
            "created_at": t.created_at.isoformat() if t.created_at else None,
        } for t in sorted(tasks, key=lambda t: t.id)]}

    # -- export -------------------------------------------------------------------------------

    @app.get("/api/experiments/{experiment_id}/export")
    def export_experiment(experiment_id: str, anonymize: bool = Query(False),
                          user: UserAccount = Depends(current_user)):
        bundle = sandbox.exports.export_experiment(user, experiment_id, anonymize)
        return Response(
            content=bundle, media_type="application/zip",
            headers={"Content-Disposition":
                     f'attachment; filename="experiment-{experiment_id}.zip"'})

    # -- server-sent events ----------------------------------------------------------------------

    @app.get("/api/events")
    def subscribe_events(request: Request,
                         last_event_id: Optional[str] = Header(None),
                         resume: Optional[int] = Query(None, alias="last_event_id"),
                         token: Optional[str] = Query(None),
                         authorization: Optional[str] = Header(None)):
        # browsers' EventSource cannot set headers, so the token may arrive as
        # a query parameter instead of a bearer header
        if authorization is None and token:
            authorization = f"Bearer {token}"
        session = full_session(first_factor_session(authorization))
        user = sandbox.store.get_user(session.user_id)
        if user is None:
            raise errors.Unauthorized("account gone")
        try:
            resume_after = int(last_event_id) if last_event_id else (resume or 0)
        except ValueError:
            resume_after = resume or 0

        def frames():
            stream = sandbox.bus.stream(
                user.id, last_event_id=resume_after,
                heartbeat_seconds=sandbox.config.sse_heartbeat_seconds)
            for event in stream:
                if event is None:
                    yield ": heartbeat\n\n"
                    continue
                yield (f"event: {event.name}\n"
                       f"id: {event.seq}\n"
                       f"data: {json.dumps(event.payload)}\n\n")

        return StreamingResponse(frames(), media_type="text/event-stream", headers={
            "Cache-Control": "no-cache, no-store, must-revalidate",
            "X-Accel-Buffering": "no",
        })

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")

    return app


def create_default_app() -> FastAPI:
    """App from environment configuration, for `uvicorn discourse_sandbox.gateway:...`."""
    from .config import SandboxConfig
    return create_app(Sandbox(SandboxConfig.from_env()), run_agent_worker=True)
