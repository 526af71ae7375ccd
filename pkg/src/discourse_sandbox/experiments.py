"""Experiment lifecycle: creation, invitations, membership and participant
moderation (remove, ban, report) under the four-level permission model."""

from __future__ import annotations

import secrets
from datetime import timedelta

from . import errors
from .clock import Clock
from .config import SandboxConfig
from .emailer import Emailer
from .models import (
    AccountKind, Experiment, Invitation, MediaBlob, Membership,
    MembershipStatus, Role, UserAccount, UserReport, Visibility,
)
from .permissions import Action, can
from .store import InMemoryStore

MAX_TITLE = 120
MAX_DESCRIPTION = 4000
MAX_REPORT_REASON = 1000


class ExperimentService:
    def __init__(self, store: InMemoryStore, clock: Clock, config: SandboxConfig,
                 emailer: Emailer):
        self._store = store
        self._clock = clock
        self._config = config
        self._emailer = emailer

    # -- creation -------------------------------------------------------------

    def create_experiment(self, researcher: UserAccount, title: str,
                          description: str, irb_document: tuple[bytes, str],
                          visibility: str = "private") -> Experiment:
        if researcher.kind is not AccountKind.RESEARCHER:
            raise errors.NotResearcher("only researcher accounts create experiments")
        if visibility != Visibility.PRIVATE.value:
            raise errors.PublicNotSupported("only private experiments are supported")
        if irb_document is None:
            raise errors.MissingIrbDocument("an IRB document is required at creation")
        data, content_type = irb_document
        if content_type != "application/pdf":
            raise errors.UnsupportedMediaType("IRB document must be a PDF",
                                              content_type=content_type)
        if not title or len(title) > MAX_TITLE:
            raise errors.ValidationError(f"title must be 1-{MAX_TITLE} characters")
        if len(description) > MAX_DESCRIPTION:
            raise errors.ValidationError(f"description exceeds {MAX_DESCRIPTION} characters")
        blob = self._store.put_media(MediaBlob(
            id=secrets.token_hex(8), content_type=content_type,
            size=len(data), data=data))
        now = self._clock.now()
        experiment = Experiment(
            id=secrets.token_hex(8), title=title, description=description,
            visibility=Visibility.PRIVATE, irb_document=blob.id,
            owner=researcher.id, created_at=now)
        owner_membership = Membership(
            user_id=researcher.id, experiment_id=experiment.id,
            role=Role.OWNER, status=MembershipStatus.ACTIVE,
            invited_by=researcher.id, joined_at=now)
        return self._store.create_experiment(experiment, owner_membership)

    def update_experiment(self, actor: Membership, title: str | None = None,
                          description: str | None = None,
                          agent_badge_visible: bool | None = None) -> Experiment:
        if not can(actor.role, Action.CONFIGURE_EXPERIMENT):
            raise errors.Forbidden("role may not configure the experiment",
                                   role=actor.role.value, action=Action.CONFIGURE_EXPERIMENT)
        experiment = self._store.get_experiment(actor.experiment_id)
        if title is not None:
            if not title or len(title) > MAX_TITLE:
                raise errors.ValidationError(f"title must be 1-{MAX_TITLE} characters")
            experiment.title = title
        if description is not None:
            if len(description) > MAX_DESCRIPTION:
                raise errors.ValidationError(
                    f"description exceeds {MAX_DESCRIPTION} characters")
            experiment.description = description
        if agent_badge_visible is not None:
            experiment.agent_badge_visible = agent_badge_visible
        return experiment

    # -- invitations -----------------------------------------------------------

    def invite(self, actor: UserAccount, experiment_id: str, email: str,
               role: str) -> Invitation:
        membership = self._require_active(actor.id, experiment_id)
        invited_role = Role(role)
        if invited_role is Role.OWNER:
            raise errors.ValidationError("experiments have exactly one owner")
        needed = (Action.INVITE_ANY_ROLE if invited_role is Role.COLLABORATOR
                  else Action.INVITE_REGULAR_OR_MODERATOR)
        if not can(membership.role, needed):
            raise errors.Forbidden("role may not issue this invitation",
                                   role=membership.role.value, action=needed)
        email = email.lower()
        target = self._store.user_by_email(email)
        if target is not None:
            existing = self._store.get_membership(target.id, experiment_id)
            if existing is not None:
                if existing.status is MembershipStatus.ACTIVE:
                    raise errors.AlreadyMember("that account is already a member")
                if (existing.status is MembershipStatus.BANNED
                        and membership.role is not Role.OWNER):
                    raise errors.Forbidden(
                        "banned participants may only be re-invited by the owner",
                        role=membership.role.value, action="reinvite_banned")
        experiment = self._store.get_experiment(experiment_id)
        invitation = self._store.add_invitation(Invitation(
            token=secrets.token_hex(16), experiment_id=experiment_id,
            email=email, role=invited_role,
            expires_at=self._clock.now() + timedelta(days=self._config.invitation_expiry_days),
            invited_by=actor.id))
        accept_url = f"{self._config.base_url}/api/invitations/{invitation.token}/accept"
        self._emailer.send(
            to=email,
            subject=f"Invitation to join \"{experiment.title}\"",
            body=(f"{actor.handle} invited you to the experiment \"{experiment.title}\".\n\n"
                  f"About the experiment:\n{experiment.description}\n\n"
                  f"Role: {invited_role.value}\n"
                  f"Accept here: {accept_url}\n"
                  f"The invitation expires in {self._config.invitation_expiry_days} days.\n"),
            kind="invitation")
        return invitation

    def accept_invitation(self, token: str, user: UserAccount) -> Membership:
        invitation = self._store.get_invitation(token)
        if invitation is None:
            raise errors.NotFound("unknown invitation token")
        if user.email.lower() != invitation.email:
            raise errors.EmailMismatch("invitation was issued to a different address")
        existing = self._store.get_membership(user.id, invitation.experiment_id)
        if existing is not None and existing.status is MembershipStatus.ACTIVE:
            raise errors.AlreadyMember("already an active member")
        invitation = self._store.consume_invitation(token, self._clock.now())
        membership = Membership(
            user_id=user.id, experiment_id=invitation.experiment_id,
            role=invitation.role, status=MembershipStatus.ACTIVE,
            invited_by=invitation.invited_by, joined_at=self._clock.now())
        return self._store.set_membership(membership)

    # -- participant moderation ---------------------------------------------------

    def _require_active(self, user_id: str, experiment_id: str) -> Membership:
        if self._store.get_experiment(experiment_id) is None:
            raise errors.ExperimentNotFound("no such experiment")
        membership = self._store.get_membership(user_id, experiment_id)
        if membership is None or membership.status is not MembershipStatus.ACTIVE:
            raise errors.NotAMember("not an active member of this experiment")
        return membership

    def remove_member(self, actor: UserAccount, experiment_id: str,
                      target_user_id: str) -> Membership:
        actor_membership = self._require_active(actor.id, experiment_id)
        target = self._store.get_membership(target_user_id, experiment_id)
        if target is None:
            raise errors.NotAMember("target is not a member")
        if target.role is Role.OWNER:
            raise errors.CannotRemoveOwner("the owner cannot be removed")
        if actor_membership.role is not Role.OWNER:
            # collaborators may remove regular users only; moderators ban, not remove
            if not (can(actor_membership.role, Action.REMOVE_REGULAR)
                    and target.role is Role.REGULAR):
                raise errors.Forbidden("role may not remove this member",
                                       role=actor_membership.role.value,
                                       action=Action.REMOVE_REGULAR)
        target.status = MembershipStatus.REMOVED
        return target

    def ban_member(self, actor: UserAccount, experiment_id: str,
                   target_user_id: str) -> Membership:
        actor_membership = self._require_active(actor.id, experiment_id)
        target = self._store.get_membership(target_user_id, experiment_id)
        if target is None:
            raise errors.NotAMember("target is not a member")
        if not can(actor_membership.role, Action.BAN_REGULAR):
            raise errors.Forbidden("role may not ban",
                                   role=actor_membership.role.value, action=Action.BAN_REGULAR)
        if target.role is not Role.REGULAR:
            raise errors.Forbidden("only regular members can be banned",
                                   role=actor_membership.role.value, action=Action.BAN_REGULAR)
        target.status = MembershipStatus.BANNED
        return target

    def report_user(self, actor: UserAccount, experiment_id: str,
                    target_user_id: str, reason: str) -> UserReport:
        actor_membership = self._require_active(actor.id, experiment_id)
        if not can(actor_membership.role, Action.REPORT_USER):
            raise errors.Forbidden("role may not report users",
                                   role=actor_membership.role.value, action=Action.REPORT_USER)
        if target_user_id == actor.id:
            raise errors.SelfReport("you cannot report yourself")
        self._require_active(target_user_id, experiment_id)
        if not reason or not reason.strip():
            raise errors.ValidationError("a report needs a reason")
        if len(reason) > MAX_REPORT_REASON:
            raise errors.ValidationError(
                f"reason exceeds {MAX_REPORT_REASON} characters")
        scope = self._store.system_scope(experiment_id)
        return scope.add_report(actor.id, target_user_id, reason, self._clock.now())

    # -- listings ---------------------------------------------------------------

    def list_for(self, user: UserAccount) -> dict:
        """Caller's memberships plus experiments with a pending invitation."""
        mine = []
        for membership in self._store.memberships_of(user.id):
            experiment = self._store.get_experiment(membership.experiment_id)
            mine.append({"experiment": experiment, "membership": membership})
        potential = []
        for invitation in self._store.invitations.values():
            if (invitation.email == user.email.lower()
                    and invitation.state.value == "pending"
                    and self._clock.now() < invitation.expires_at):
                experiment = self._store.get_experiment(invitation.experiment_id)
                potential.append({"experiment": experiment, "invitation": invitation})
        return {"mine": mine, "potential": potential}
