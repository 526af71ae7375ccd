"""Experiment export: NDJSON record streams plus a manifest, zipped.

Exactly one experiment per bundle. Anonymized bundles replace every identity
(user id, handle, display name, email) with a stable pseudonym derived from a
keyed hash whose key is random per export and discarded afterwards, so the
mapping is not recoverable; handles and display names are also scrubbed out
of free-text fields (bodies, reasons, personas).

``import_bundle`` is the matching dev tool: loading a non-anonymized bundle
into a fresh instance reproduces the experiment record-for-record.
"""

from __future__ import annotations

import hashlib
import hmac
import io
import json
import re
import secrets
import zipfile
from datetime import datetime

from . import errors
from .models import (
    AccountKind, AgentAction, AgentProfile, Experiment, FlagState, MediaBlob,
    Membership, MembershipStatus, NotificationKind, PostKind, Role,
    TriggerPolicy, UserAccount, Visibility,
)
from .permissions import EXPORT_ROLES

SCHEMA_VERSION = 1
RECORD_FILES = ("posts", "likes", "follows", "memberships", "notifications",
                "agents", "moderation_events")


def _iso(moment: datetime | None) -> str | None:
    return moment.isoformat() if moment else None


class Pseudonymizer:
    """Stable one-way identity replacement with a throwaway key."""

    def __init__(self):
        self._key = secrets.token_bytes(32)
        self._cache: dict[str, str] = {}

    def pseudonym(self, user_id: str) -> str:
        if user_id not in self._cache:
            digest = hmac.new(self._key, user_id.encode("utf-8"), hashlib.sha256)
            self._cache[user_id] = "anon_" + digest.hexdigest()[:16]
        return self._cache[user_id]


class _TextScrubber:
    """Replaces member handles, display names and emails inside free text."""

    def __init__(self, members: list[tuple[UserAccount, str]]):
        self._subs: list[tuple[re.Pattern, str]] = []
        for user, pseudonym in members:
            for term in (user.handle, user.display_name):
                if term and term.strip():
                    self._subs.append((
                        re.compile(rf"(?<!\w){re.escape(term)}(?!\w)", re.IGNORECASE),
                        pseudonym))
            if user.email:
                self._subs.append((re.compile(re.escape(user.email), re.IGNORECASE),
                                   pseudonym))

    def scrub(self, text: str) -> str:
        for pattern, replacement in self._subs:
            text = pattern.sub(replacement, text)
        return text


class ExportService:
    def __init__(self, store, clock, classifier_version: str = ""):
        self._store = store
        self._clock = clock
        self._classifier_version = classifier_version

    def export_experiment(self, actor: UserAccount, experiment_id: str,
                          anonymize: bool) -> bytes:
        experiment = self._store.get_experiment(experiment_id)
        if experiment is None:
            raise errors.ExperimentNotFound("no such experiment")
        membership = self._store.get_membership(actor.id, experiment_id)
        if (membership is None or membership.status is not MembershipStatus.ACTIVE
                or membership.role not in EXPORT_ROLES):
            raise errors.Forbidden("only the owner or collaborators export data",
                                   action="export")
        scope = self._store.system_scope(experiment_id)
        memberships = self._store.members_of(experiment_id)

        anon = Pseudonymizer()
        ident: dict[str, str] = {}
        removed_authors: set[str] = set()
        members_with_names: list[tuple[UserAccount, str]] = []
        for m in memberships:
            user = self._store.get_user(m.user_id)
            name = anon.pseudonym(m.user_id) if anonymize else m.user_id
            ident[m.user_id] = name
            if m.status is MembershipStatus.REMOVED:
                removed_authors.add(m.user_id)
            if user is not None:
                members_with_names.append((user, name))
        scrubber = _TextScrubber(members_with_names) if anonymize else None

        def who(user_id: str | None) -> str | None:
            if user_id is None:
                return None
            if user_id in ident:
                return ident[user_id]
            return anon.pseudonym(user_id) if anonymize else user_id

        def text(value: str) -> str:
            return scrubber.scrub(value) if scrubber else value

        posts = sorted(scope.posts(), key=lambda p: p.id)
        post_records = []
        for p in posts:
            record = {
                "id": p.id,
                "author": who(p.author_id),
                "kind": p.kind.value,
                "parent_id": p.parent_id,
                "repost_of": p.repost_of,
                "body": text(p.body),
                "hashtags": sorted(p.hashtags),
                "created_at": _iso(p.created_at),
                "deleted": p.deleted,
                "deleted_by": who(p.deleted_by),
            }
            if anonymize and p.author_id in removed_authors:
                record["author_removed"] = True   # removed-member marker
            post_records.append(record)

        like_records = [{
            "user": who(like.user_id), "post_id": like.post_id,
            "created_at": _iso(like.created_at),
        } for like in sorted(scope.likes(), key=lambda x: (_iso(x.created_at), x.post_id))]

        follow_records = [{
            "follower": who(f.follower_id), "followee": who(f.followee_id),
            "created_at": _iso(f.created_at),
        } for f in scope.follows()]

        membership_records = []
        for m in memberships:
            user = self._store.get_user(m.user_id)
            record = {
                "user": who(m.user_id),
                "role": m.role.value,
                "status": m.status.value,
                "joined_at": _iso(m.joined_at),
                "is_agent": bool(user and user.is_agent),
            }
            if anonymize:
                record["handle"] = ident[m.user_id]
                record["display_name"] = ident[m.user_id]
            else:
                record["handle"] = user.handle if user else ""
                record["display_name"] = user.display_name if user else ""
                record["email"] = user.email if user else ""
                record["kind"] = user.kind.value if user else "regular"
            membership_records.append(record)

        note_records = []
        for m in memberships:
            for n in self._store.notifications_for(m.user_id):
                if n.experiment_id != experiment_id:
                    continue   # notifications earned in other experiments stay there
                note_records.append({
                    "id": n.id, "recipient": who(n.recipient_id),
                    "kind": n.kind.value, "actor": who(n.actor_id),
                    "subject_post_id": n.subject_post_id,
                    "created_at": _iso(n.created_at), "seen": n.seen,
                })

        agent_records = []
        for a in scope.agents():
            agent_user = self._store.get_user(a.user_id)
            agent_records.append({
                "id": a.id,
                "user": who(a.user_id),
                "handle": ident.get(a.user_id) if anonymize else (
                    agent_user.handle if agent_user else ""),
                "persona_prompt": text(a.persona_prompt),
                "endpoint_url": a.endpoint_url,
                "model_name": a.model_name,
                "trigger_policy": a.trigger_policy.value,
                "actions_enabled": sorted(x.value for x in a.actions_enabled),
                "max_thread_depth": a.max_thread_depth,
                "min_seconds_between_actions": a.min_seconds_between_actions,
                "active": a.active,
                # api keys never leave the vault
            })

        moderation_records = [{
            "type": "flag", "id": f.id, "post_id": f.post_id,
            "raised_by": who(f.raised_by), "reason": text(f.reason),
            "state": f.state.value, "resolved_by": who(f.resolved_by),
            "resolution": f.resolution,
        } for f in scope.flags_list()]
        moderation_records.extend({
            "type": "user_report", "id": r.id, "reporter": who(r.reporter_id),
            "target": who(r.target_id), "reason": text(r.reason),
            "created_at": _iso(r.created_at), "resolved": r.resolved,
        } for r in scope.reports())

        records = {
            "posts": post_records,
            "likes": like_records,
            "follows": follow_records,
            "memberships": membership_records,
            "notifications": note_records,
            "agents": agent_records,
            "moderation_events": moderation_records,
        }
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "experiment_id": experiment_id,
            "title": experiment.title,
            "exported_at": _iso(self._clock.now()),
            "counts": {name: len(rows) for name, rows in records.items()},
            "classifier_version": self._classifier_version,
            "anonymized": anonymize,
        }

        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
            archive.writestr("manifest.json", json.dumps(manifest, indent=2))
            for name in RECORD_FILES:
                lines = "".join(json.dumps(row) + "\n" for row in records[name])
                archive.writestr(f"{name}.ndjson", lines)
        return buffer.getvalue()


def read_bundle(bundle: bytes) -> dict:
    """Manifest plus parsed record lists from an export zip."""
    out: dict = {}
    with zipfile.ZipFile(io.BytesIO(bundle)) as archive:
        out["manifest"] = json.loads(archive.read("manifest.json"))
        for name in RECORD_FILES:
            raw = archive.read(f"{name}.ndjson").decode("utf-8")
            out[name] = [json.loads(line) for line in raw.splitlines() if line]
    return out


def import_bundle(sandbox, bundle: bytes) -> str:
    """Dev tool: replay a (non-anonymized) bundle into a fresh instance."""
    data = read_bundle(bundle)
    store = sandbox.store
    now = sandbox.clock.now()

    owner_record = next(m for m in data["memberships"] if m["role"] == "owner")
    users: dict[str, UserAccount] = {}
    for m in data["memberships"]:
        researcher = m["role"] == "owner" or m.get("kind") == "researcher"
        account = store.create_user(
            handle=m["handle"], email=m.get("email") or f"{m['handle']}@import.invalid",
            password_digest="!",
            kind=AccountKind.RESEARCHER if researcher else AccountKind.REGULAR,
            display_name=m.get("display_name", m["handle"]), now=now,
            is_agent=m.get("is_agent", False))
        users[m["user"]] = account

    blob = store.put_media(MediaBlob(id=secrets.token_hex(8),
                                     content_type="application/pdf",
                                     size=0, data=b""))
    experiment = Experiment(
        id=secrets.token_hex(8), title=data["manifest"]["title"],
        description="(imported)", visibility=Visibility.PRIVATE,
        irb_document=blob.id, owner=users[owner_record["user"]].id, created_at=now)
    owner_membership = Membership(
        user_id=users[owner_record["user"]].id, experiment_id=experiment.id,
        role=Role.OWNER, status=MembershipStatus.ACTIVE,
        invited_by=users[owner_record["user"]].id,
        joined_at=_parse(owner_record.get("joined_at")) or now)
    store.create_experiment(experiment, owner_membership)
    for m in data["memberships"]:
        if m["role"] == "owner":
            continue
        store.set_membership(Membership(
            user_id=users[m["user"]].id, experiment_id=experiment.id,
            role=Role(m["role"]), status=MembershipStatus(m["status"]),
            invited_by=owner_membership.user_id,
            joined_at=_parse(m.get("joined_at"))))

    def user_id_for(exported: str | None) -> str:
        if exported is not None and exported in users:
            return users[exported].id
        return owner_membership.user_id

    scope = store.system_scope(experiment.id)
    for p in sorted(data["posts"], key=lambda r: r["id"]):
        post = scope.add_post(
            author_id=users[p["author"]].id, body=p["body"],
            kind=PostKind(p["kind"]), hashtags=frozenset(p["hashtags"]),
            now=_parse(p["created_at"]), parent_id=p["parent_id"],
            repost_of=p["repost_of"])
        assert post.id == p["id"], "bundle post ids must be contiguous from 1"
        if p["deleted"]:
            scope.mark_deleted(post.id, user_id_for(p["deleted_by"]))
    for like in data["likes"]:
        scope.add_like(users[like["user"]].id, like["post_id"], _parse(like["created_at"]))
    for f in data["follows"]:
        scope.add_follow(users[f["follower"]].id, users[f["followee"]].id,
                         _parse(f["created_at"]))
    for n in sorted(data["notifications"], key=lambda r: (r["recipient"], r["id"])):
        note = store.add_notification(
            users[n["recipient"]].id, NotificationKind(n["kind"]),
            users[n["actor"]].id, n["subject_post_id"], experiment.id,
            _parse(n["created_at"]))
        if n["seen"]:
            store.mark_seen(users[n["recipient"]].id, note.id)
    for a in data["agents"]:
        scope.add_agent(AgentProfile(
            id=a["id"], experiment_id=experiment.id, user_id=users[a["user"]].id,
            persona_prompt=a["persona_prompt"], endpoint_url=a["endpoint_url"],
            model_name=a["model_name"], api_key_ref=None,
            trigger_policy=TriggerPolicy(a["trigger_policy"]),
            actions_enabled=frozenset(AgentAction(x) for x in a["actions_enabled"]),
            max_thread_depth=a["max_thread_depth"],
            min_seconds_between_actions=a["min_seconds_between_actions"],
            active=a["active"]))
    for event in data["moderation_events"]:
        if event["type"] == "flag":
            flag = scope.add_flag(event["post_id"], user_id_for(event["raised_by"]),
                                  event["reason"])
            if FlagState(event["state"]) is not FlagState.OPEN:
                scope.resolve_flag(flag.id, user_id_for(event["resolved_by"]),
                                   event["resolution"])
        else:
            scope.add_report(users[event["reporter"]].id, users[event["target"]].id,
                             event["reason"], _parse(event["created_at"]))
    return experiment.id


def _parse(value: str | None) -> datetime | None:
    return datetime.fromisoformat(value) if value else None
