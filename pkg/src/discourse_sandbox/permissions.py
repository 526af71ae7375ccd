"""Static role/permission matrix for the four membership levels.

The table is data, not logic: owner holds every permission, collaborators
manage regular users and moderate, content moderators moderate and ban,
regular members post, interact and report. Everything else is denied.
"""

from __future__ import annotations

from .models import Role


class Action:
    CONFIGURE_EXPERIMENT = "configure_experiment"
    INVITE_ANY_ROLE = "invite_any_role"
    INVITE_REGULAR_OR_MODERATOR = "invite_regular_or_moderator"
    REMOVE_REGULAR = "remove_regular"
    DELETE_THREAD = "delete_thread"
    DELETE_COMMENT = "delete_comment"
    BAN_REGULAR = "ban_regular"
    REPORT_USER = "report_user"
    POST = "post"
    INTERACT = "interact"


ALL_ACTIONS = (
    Action.CONFIGURE_EXPERIMENT,
    Action.INVITE_ANY_ROLE,
    Action.INVITE_REGULAR_OR_MODERATOR,
    Action.REMOVE_REGULAR,
    Action.DELETE_THREAD,
    Action.DELETE_COMMENT,
    Action.BAN_REGULAR,
    Action.REPORT_USER,
    Action.POST,
    Action.INTERACT,
)

PERMISSION_MATRIX: dict[Role, frozenset] = {
    Role.OWNER: frozenset(ALL_ACTIONS),
    Role.COLLABORATOR: frozenset({
        Action.INVITE_REGULAR_OR_MODERATOR,
        Action.REMOVE_REGULAR,
        Action.DELETE_THREAD,
        Action.DELETE_COMMENT,
        Action.REPORT_USER,
        Action.POST,
        Action.INTERACT,
    }),
    Role.CONTENT_MODERATOR: frozenset({
        Action.DELETE_THREAD,
        Action.DELETE_COMMENT,
        Action.BAN_REGULAR,
        Action.REPORT_USER,
        Action.POST,
        Action.INTERACT,
    }),
    Role.REGULAR: frozenset({
        Action.REPORT_USER,
        Action.POST,
        Action.INTERACT,
    }),
}

# May raise post flags for moderator review (distinct from the report_user action
# regular members hold).
FLAGGING_ROLES = frozenset({Role.OWNER, Role.COLLABORATOR, Role.CONTENT_MODERATOR})

# May export experiment data and register or reconfigure agents.
EXPORT_ROLES = frozenset({Role.OWNER, Role.COLLABORATOR})


def can(actor_role: Role, action: str) -> bool:
    """Pure lookup; unknown actions are denied."""
    return action in PERMISSION_MATRIX.get(actor_role, frozenset())
