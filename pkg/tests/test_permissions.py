"""Exhaustive 4x10 role/action table."""

from __future__ import annotations

import pytest

from discourse_sandbox.models import Role
from discourse_sandbox.permissions import ALL_ACTIONS, Action, can

# the full expected matrix, spelled out cell by cell
EXPECTED = {
    Role.OWNER: {
        Action.CONFIGURE_EXPERIMENT: True,
        Action.INVITE_ANY_ROLE: True,
        Action.INVITE_REGULAR_OR_MODERATOR: True,
        Action.REMOVE_REGULAR: True,
        Action.DELETE_THREAD: True,
        Action.DELETE_COMMENT: True,
        Action.BAN_REGULAR: True,
        Action.REPORT_USER: True,
        Action.POST: True,
        Action.INTERACT: True,
    },
    Role.COLLABORATOR: {
        Action.CONFIGURE_EXPERIMENT: False,
        Action.INVITE_ANY_ROLE: False,
        Action.INVITE_REGULAR_OR_MODERATOR: True,
        Action.REMOVE_REGULAR: True,
        Action.DELETE_THREAD: True,
        Action.DELETE_COMMENT: True,
        Action.BAN_REGULAR: False,
        Action.REPORT_USER: True,
        Action.POST: True,
        Action.INTERACT: True,
    },
    Role.CONTENT_MODERATOR: {
        Action.CONFIGURE_EXPERIMENT: False,
        Action.INVITE_ANY_ROLE: False,
        Action.INVITE_REGULAR_OR_MODERATOR: False,
        Action.REMOVE_REGULAR: False,
        Action.DELETE_THREAD: True,
        Action.DELETE_COMMENT: True,
        Action.BAN_REGULAR: True,
        Action.REPORT_USER: True,
        Action.POST: True,
        Action.INTERACT: True,
    },
    Role.REGULAR: {
        Action.CONFIGURE_EXPERIMENT: False,
        Action.INVITE_ANY_ROLE: False,
        Action.INVITE_REGULAR_OR_MODERATOR: False,
        Action.REMOVE_REGULAR: False,
        Action.DELETE_THREAD: False,
        Action.DELETE_COMMENT: False,
        Action.BAN_REGULAR: False,
        Action.REPORT_USER: True,
        Action.POST: True,
        Action.INTERACT: True,
    },
}


@pytest.mark.parametrize("role", list(Role))
@pytest.mark.parametrize("action", ALL_ACTIONS)
def test_matrix_cell(role, action):
    assert can(role, action) is EXPECTED[role][action]


def test_matrix_is_exactly_four_by_ten():
    assert len(EXPECTED) == 4
    assert all(len(row) == 10 for row in EXPECTED.values())
    assert len(ALL_ACTIONS) == 10


def test_owner_allows_everything():
    assert all(can(Role.OWNER, action) for action in ALL_ACTIONS)


def test_unknown_action_denied():
    assert can(Role.OWNER, "launch_missiles") is False
