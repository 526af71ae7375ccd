/**
 * Client-side mirror of the server's role/permission matrix, used only to
 * decide which controls render. The server re-checks every call; this layer
 * exists so the UI never offers a button that would 403.
 */

import type { Role } from "./types";

export type Action =
  | "configure_experiment"
  | "invite_any_role"
  | "invite_regular_or_moderator"
  | "remove_regular"
  | "delete_thread"
  | "delete_comment"
  | "ban_regular"
  | "report_user"
  | "post"
  | "interact";

const MATRIX: Record<Role, ReadonlySet<Action>> = {
  owner: new Set<Action>([
    "configure_experiment", "invite_any_role", "invite_regular_or_moderator",
    "remove_regular", "delete_thread", "delete_comment", "ban_regular",
    "report_user", "post", "interact",
  ]),
  collaborator: new Set<Action>([
    "invite_regular_or_moderator", "remove_regular", "delete_thread",
    "delete_comment", "report_user", "post", "interact",
  ]),
  content_moderator: new Set<Action>([
    "delete_thread", "delete_comment", "ban_regular", "report_user",
    "post", "interact",
  ]),
  regular: new Set<Action>(["report_user", "post", "interact"]),
};

export function can(role: Role, action: Action): boolean {
  return MATRIX[role]?.has(action) ?? false;
}

/** Roles the actor may hand out in an invitation (never owner). */
export function invitableRoles(role: Role): Role[] {
  if (can(role, "invite_any_role")) {
    return ["collaborator", "content_moderator", "regular"];
  }
  if (can(role, "invite_regular_or_moderator")) {
    return ["content_moderator", "regular"];
  }
  return [];
}

/** Raising post flags is a moderation-side ability, not a matrix action. */
export function canFlagPosts(role: Role): boolean {
  return role === "owner" || role === "collaborator" || role === "content_moderator";
}

export function canManageAgents(role: Role): boolean {
  return can(role, "invite_regular_or_moderator");
}

export function canExport(role: Role): boolean {
  return role === "owner" || role === "collaborator";
}
