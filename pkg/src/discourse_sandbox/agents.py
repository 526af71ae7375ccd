"""AI agent accounts: registry, event dispatch and bounded response turns.

A committed post or reply produces one event; the dispatcher selects agents
by trigger policy, never the event's own author, and records a task per
(event, agent). A turn asks the configured inference endpoint for a decision,
parses it fail-safe, and performs any enabled subset of {like, repost, reply}
through the ordinary discourse operations, so moderation and the 280-character
limit apply to agents exactly as to humans.

Loop safety: agents never act on their own posts, replies stop at the agent's
thread-depth bound, and action batches are rate limited, so agent-to-agent
conversations terminate.
"""

from __future__ import annotations

import re
import secrets
import threading
import time as _time
from collections import deque
from typing import Callable, Optional
from urllib.parse import urlparse

from . import errors
from .clock import Clock
from .config import SandboxConfig
from .discourse import DiscourseService, MAX_BODY_SCALARS
from .identity import HANDLE_RE
from .models import (
    AccountKind, AgentAction, AgentProfile, AgentTask, DiscourseEvent,
    EventKind, Membership, MembershipStatus, PromptPayload, Role, TaskState,
    TriggerPolicy, UserAccount,
)
from .permissions import Action, can
from .store import ExperimentScope, InMemoryStore

DEFAULT_PROMPT_TEMPLATE = """\
You are an automated participant in a private, invite-only research discourse
experiment. You read the conversation below and decide how to react in
character. Stay concise, write like a social-media participant, and never
break character or mention that you are automated unless your persona says
otherwise.

Persona:
"""

INSTRUCTION_TEMPLATE = """\
Decide how to react to the most recent message above. You may take any
combination of these actions: {actions}. You may also do nothing.

Answer in exactly this format:
DECISION: <comma-separated subset of: {actions}, or none>
TEXT: <your reply text, only when reply is chosen, at most {limit} characters>
"""

DECISION_VOCAB = {"like", "repost", "reply", "none"}
_DECISION_LINE = re.compile(r"^\s*decision\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)
_TEXT_BLOCK = re.compile(r"^\s*text\s*:\s*(.*)$", re.IGNORECASE | re.MULTILINE | re.DOTALL)

MAX_PAYLOAD_CHARS = 16_000
MAX_CONTEXT_POSTS = 12
MAX_PERSONA = 8000
RETRY_BACKOFF_SECONDS = (2.0, 4.0, 8.0)
MAX_ATTEMPTS = 3


def parse_decision(raw: str) -> dict:
    """Actions and optional reply text from a completion; anything that fails
    to parse degrades to no action."""
    nothing = {"actions": set(), "reply_text": None}
    if not raw:
        return nothing
    match = _DECISION_LINE.search(raw)
    if match is None:
        return nothing
    tokens = {t.strip().lower() for t in match.group(1).split(",")}
    actions = {t for t in tokens if t in DECISION_VOCAB}
    if not actions or "none" in actions:
        return nothing
    reply_text = None
    if "reply" in actions:
        text_match = _TEXT_BLOCK.search(raw[match.end():])
        if text_match is None or not text_match.group(1).strip():
            return nothing  # reply without text: fail-safe to no action
        reply_text = text_match.group(1).strip()
    return {"actions": {AgentAction(a) for a in actions if a != "none"},
            "reply_text": reply_text}


class AgentService:
    def __init__(self, store: InMemoryStore, clock: Clock, config: SandboxConfig,
                 discourse: DiscourseService, inference_client,
                 sleep: Callable[[float], None] | None = None):
        self._store = store
        self._clock = clock
        self._config = config
        self._discourse = discourse
        self._inference = inference_client
        self._sleep = sleep if sleep is not None else _time.sleep
        self._queue: deque[tuple[str, int]] = deque()   # (experiment_id, task_id)
        self._queue_lock = threading.Lock()

    # -- registry -----------------------------------------------------------------

    def register_agent(self, actor: UserAccount, experiment_id: str, handle: str,
                       display_name: str, persona_prompt: str,
                       model_name: str, endpoint_url: str | None = None,
                       api_key: str | None = None, bio: str = "",
                       trigger_policy: str = "all_posts",
                       actions_enabled: list[str] | None = None,
                       max_thread_depth: int = 4,
                       min_seconds_between_actions: int = 30) -> AgentProfile:
        membership = self._store.get_membership(actor.id, experiment_id)
        if (membership is None or membership.status is not MembershipStatus.ACTIVE
                or not can(membership.role, Action.INVITE_REGULAR_OR_MODERATOR)):
            raise errors.Forbidden("only the owner or collaborators deploy agents",
                                   action="register_agent")
        if not HANDLE_RE.match(handle):
            raise errors.InvalidHandle("handle must be 3-32 characters of [a-z0-9_]")
        if len(persona_prompt) > MAX_PERSONA:
            raise errors.ValidationError(
                f"persona prompt exceeds {MAX_PERSONA} characters")
        if endpoint_url is not None:
            parsed = urlparse(endpoint_url)
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise errors.InvalidEndpoint(f"not an HTTP(S) URL: {endpoint_url!r}")
        enabled = frozenset(AgentAction(a) for a in (
            actions_enabled if actions_enabled is not None
            else [a.value for a in AgentAction]))
        account = self._store.create_user(
            handle=handle, email=f"{handle}@agents.invalid",
            password_digest="!", kind=AccountKind.REGULAR,
            display_name=display_name, now=self._clock.now(), is_agent=True)
        account.bio = bio
        self._store.set_membership(Membership(
            user_id=account.id, experiment_id=experiment_id, role=Role.REGULAR,
            status=MembershipStatus.ACTIVE, invited_by=actor.id,
            joined_at=self._clock.now()))
        profile = AgentProfile(
            id=secrets.token_hex(8), experiment_id=experiment_id,
            user_id=account.id, persona_prompt=persona_prompt,
            endpoint_url=endpoint_url, model_name=model_name,
            api_key_ref=self._store.vault.put(api_key) if api_key else None,
            trigger_policy=TriggerPolicy(trigger_policy),
            actions_enabled=enabled,
            max_thread_depth=max_thread_depth,
            min_seconds_between_actions=min_seconds_between_actions)
        return self._store.system_scope(experiment_id).add_agent(profile)

    def update_agent(self, actor: UserAccount, experiment_id: str, agent_id: str,
                     **changes) -> AgentProfile:
        membership = self._store.get_membership(actor.id, experiment_id)
        if (membership is None or membership.status is not MembershipStatus.ACTIVE
                or not can(membership.role, Action.INVITE_REGULAR_OR_MODERATOR)):
            raise errors.Forbidden("only the owner or collaborators configure agents",
                                   action="update_agent")
        scope = self._store.system_scope(experiment_id)
        profile = scope.get_agent(agent_id)
        if profile is None:
            raise errors.NotFound("no such agent")
        if "persona_prompt" in changes and changes["persona_prompt"] is not None:
            if len(changes["persona_prompt"]) > MAX_PERSONA:
                raise errors.ValidationError("persona prompt too long")
            profile.persona_prompt = changes["persona_prompt"]
        if "endpoint_url" in changes and changes["endpoint_url"] is not None:
            parsed = urlparse(changes["endpoint_url"])
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise errors.InvalidEndpoint("not an HTTP(S) URL")
            profile.endpoint_url = changes["endpoint_url"]
        if "model_name" in changes and changes["model_name"] is not None:
            profile.model_name = changes["model_name"]
        if "api_key" in changes and changes["api_key"] is not None:
            profile.api_key_ref = self._store.vault.put(changes["api_key"])
        if "trigger_policy" in changes and changes["trigger_policy"] is not None:
            profile.trigger_policy = TriggerPolicy(changes["trigger_policy"])
        if "actions_enabled" in changes and changes["actions_enabled"] is not None:
            profile.actions_enabled = frozenset(
                AgentAction(a) for a in changes["actions_enabled"])
        if "max_thread_depth" in changes and changes["max_thread_depth"] is not None:
            profile.max_thread_depth = int(changes["max_thread_depth"])
        if ("min_seconds_between_actions" in changes
                and changes["min_seconds_between_actions"] is not None):
            profile.min_seconds_between_actions = int(changes["min_seconds_between_actions"])
        if "active" in changes and changes["active"] is not None:
            profile.active = bool(changes["active"])
        return profile

    # -- dispatch --------------------------------------------------------------------

    def _policy_matches(self, scope: ExperimentScope, agent: AgentProfile,
                        event: DiscourseEvent) -> bool:
        if agent.trigger_policy is TriggerPolicy.ALL_POSTS:
            return True
        if agent.trigger_policy is TriggerPolicy.REPLIES_TO_SELF_THREAD:
            if event.kind is not EventKind.NEW_REPLY:
                return False
            return any(a.author_id == agent.user_id
                       for a in scope.ancestors(event.post_id))
        if agent.trigger_policy is TriggerPolicy.MENTIONS_ONLY:
            post = scope.get_post(event.post_id)
            account = self._store.get_user(agent.user_id)
            if post is None or account is None:
                return False
            return re.search(rf"@{re.escape(account.handle)}\b", post.body,
                             re.IGNORECASE) is not None
        return False

    def _rate_limited(self, scope: ExperimentScope, agent: AgentProfile) -> bool:
        last = scope.agent_last_action(agent.id)
        if last is None:
            return False
        elapsed = (self._clock.now() - last).total_seconds()
        return elapsed < agent.min_seconds_between_actions

    def dispatch(self, event: DiscourseEvent) -> list[AgentTask]:
        """One task per selected agent; depth/rate violations record a skipped
        task, the event's own author is never selected."""
        scope = self._store.system_scope(event.experiment_id)
        now = self._clock.now()
        reply_depth = scope.thread_depth(event.post_id) + 1
        tasks: list[AgentTask] = []
        for agent in scope.agents():
            if not agent.active or agent.user_id == event.author_id:
                continue
            if not self._policy_matches(scope, agent, event):
                continue
            if reply_depth > agent.max_thread_depth:
                task = scope.add_task(event.id, agent.id, now, state=TaskState.SKIPPED)
                task.notes.append("skipped: thread depth limit")
                tasks.append(task)
                continue
            if self._rate_limited(scope, agent):
                task = scope.add_task(event.id, agent.id, now, state=TaskState.SKIPPED)
                task.notes.append("skipped: rate limited")
                tasks.append(task)
                continue
            task = scope.add_task(event.id, agent.id, now)
            if task.state is TaskState.QUEUED:
                with self._queue_lock:
                    self._queue.append((event.experiment_id, task.id))
            tasks.append(task)
        return tasks

    # -- prompting ----------------------------------------------------------------------

    def build_prompt(self, scope: ExperimentScope, agent: AgentProfile,
                     event: DiscourseEvent) -> PromptPayload:
        post = scope.get_post(event.post_id)
        chain = scope.ancestors(event.post_id) + [post]
        chain = chain[-MAX_CONTEXT_POSTS:]
        context = []
        for item in chain:
            author = self._store.get_user(item.author_id)
            handle = author.handle if author else "unknown"
            role = "assistant" if item.author_id == agent.user_id else "user"
            context.append({"role": role, "content": f"@{handle}: {item.body}"})
        enabled = ", ".join(sorted(a.value for a in agent.actions_enabled)) or "none"
        payload = PromptPayload(
            system_text=DEFAULT_PROMPT_TEMPLATE + agent.persona_prompt,
            context_messages=context,
            instruction_text=INSTRUCTION_TEMPLATE.format(
                actions=enabled, limit=MAX_BODY_SCALARS))
        while payload.total_chars() > MAX_PAYLOAD_CHARS and len(payload.context_messages) > 1:
            payload.context_messages.pop(0)   # oldest context goes first
        return payload

    def invoke_inference(self, agent: AgentProfile, payload: PromptPayload) -> str:
        endpoint = agent.endpoint_url or self._config.inference_default_url
        if not endpoint:
            raise errors.InvalidEndpoint(
                "agent has no endpoint and no default is configured")
        api_key = (self._store.vault.get(agent.api_key_ref)
                   if agent.api_key_ref else self._config.inference_default_key)
        messages = ([{"role": "system", "content": payload.system_text}]
                    + payload.context_messages
                    + [{"role": "user", "content": payload.instruction_text}])
        return self._inference.complete(
            endpoint_url=endpoint, api_key=api_key, model=agent.model_name,
            messages=messages)

    # -- turns ---------------------------------------------------------------------------

    def run_turn(self, experiment_id: str, task_id: int) -> AgentTask:
        """Execute exactly one bounded turn for a queued task."""
        scope = self._store.system_scope(experiment_id)
        task = scope.get_task(task_id)
        if task is None:
            raise errors.NotFound("no such task")
        if not scope.claim_task(task_id):
            return task
        agent = scope.get_agent(task.agent_id)
        event = scope.get_event(task.event_id)
        if agent is None or event is None or not agent.active:
            task.notes.append("skipped: agent unavailable")
            return scope.finish_task(task_id, TaskState.SKIPPED)
        post = scope.get_post(event.post_id)
        if post is None or not scope.is_visible(post):
            task.notes.append("skipped: subject post gone")
            return scope.finish_task(task_id, TaskState.SKIPPED)
        if self._rate_limited(scope, agent):
            task.notes.append("skipped: rate limited")
            return scope.finish_task(task_id, TaskState.SKIPPED)

        payload = self.build_prompt(scope, agent, event)
        raw = None
        for attempt in range(MAX_ATTEMPTS):
            task.attempts = attempt + 1
            try:
                raw = self.invoke_inference(agent, payload)
                break
            except (errors.InferenceTimeout, errors.InferenceHttpError) as exc:
                retryable = (isinstance(exc, errors.InferenceTimeout)
                             or exc.details.get("status", 0) >= 500)
                if not retryable or task.attempts >= MAX_ATTEMPTS:
                    task.notes.append(f"inference failed: {exc.code}")
                    return scope.finish_task(task_id, TaskState.FAILED)
                self._sleep(RETRY_BACKOFF_SECONDS[attempt])
            except errors.SandboxError as exc:
                task.notes.append(f"inference failed: {exc.code}")
                return scope.finish_task(task_id, TaskState.FAILED)
        if raw is None:
            task.notes.append("inference failed: no completion")
            return scope.finish_task(task_id, TaskState.FAILED)

        decision = parse_decision(raw)
        actions = decision["actions"] & agent.actions_enabled
        agent_scope = self._store.scoped(experiment_id, agent.user_id)
        acted = False
        if AgentAction.LIKE in actions:
            try:
                self._discourse.like(agent_scope, event.post_id)
                task.actions_taken.append({"action": "like", "post_id": event.post_id})
                acted = True
            except errors.SandboxError as exc:
                task.notes.append(f"like dropped: {exc.code}")
        if AgentAction.REPOST in actions:
            try:
                repost = self._discourse.repost(agent_scope, event.post_id)
                task.actions_taken.append({"action": "repost", "post_id": repost.id})
                acted = True
            except errors.SandboxError as exc:
                task.notes.append(f"repost dropped: {exc.code}")
        if AgentAction.REPLY in actions:
            text = decision["reply_text"] or ""
            if len(text) > MAX_BODY_SCALARS:
                task.notes.append(f"reply truncated from {len(text)} characters")
                text = text[:MAX_BODY_SCALARS]
            try:
                reply = self._discourse.reply(agent_scope, event.post_id, text)
                task.actions_taken.append({"action": "reply", "post_id": reply.id})
                acted = True
            except errors.ModerationRejected as exc:
                # the reply is dropped; any other action stands and the task completes
                task.notes.append(f"reply dropped: moderation ({exc.matched_terms})")
            except errors.SandboxError as exc:
                task.notes.append(f"reply dropped: {exc.code}")
        if acted:
            scope.record_agent_action(agent.id, self._clock.now())
        return scope.finish_task(task_id, TaskState.DONE)

    # -- queue draining -------------------------------------------------------------------

    def pending_count(self) -> int:
        with self._queue_lock:
            return len(self._queue)

    def run_pending(self, max_turns: int = 50_000) -> int:
        """Synchronously drain the task queue in FIFO order; turns may enqueue
        follow-up tasks (agent replies trigger other agents)."""
        executed = 0
        while True:
            with self._queue_lock:
                if not self._queue:
                    return executed
                experiment_id, task_id = self._queue.popleft()
            self.run_turn(experiment_id, task_id)
            executed += 1
            if executed >= max_turns:
                raise RuntimeError(
                    f"agent queue did not drain within {max_turns} turns")

    def run_workers(self, worker_count: int = 4, drain: bool = True) -> int:
        """Drain the queue with a pool of threads (parallel turns)."""
        executed = 0
        counter_lock = threading.Lock()

        def worker():
            nonlocal executed
            while True:
                with self._queue_lock:
                    if not self._queue:
                        return
                    experiment_id, task_id = self._queue.popleft()
                self.run_turn(experiment_id, task_id)
                with counter_lock:
                    executed += 1

        while True:
            threads = [threading.Thread(target=worker) for _ in range(worker_count)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            if not drain or self.pending_count() == 0:
                return executed
