/**
 * Experiment administration panel. Every control renders only when the
 * permission matrix allows the session's role to use it; the server still
 * re-checks each call.
 */

import { ApiError, type ApiClient } from "../api";
import {
  can, canExport, canFlagPosts, canManageAgents, invitableRoles,
} from "../permissions";
import type { ExperimentSummary, MembershipSummary, Role } from "../types";

export interface AdminPanelOptions {
  api: ApiClient;
  experiment: ExperimentSummary;
  role: Role;
  currentUserId: string;
}

function fieldError(element: HTMLElement, failure: unknown) {
  element.textContent = failure instanceof ApiError
    ? `${failure.code}: ${failure.message}`
    : String(failure);
  element.classList.remove("hidden");
}

function inviteForm(options: AdminPanelOptions): HTMLElement {
  const form = document.createElement("form");
  form.className = "invite-form";
  form.dataset.control = "invite";

  const email = document.createElement("input");
  email.type = "email";
  email.placeholder = "participant@example.org";
  email.required = true;

  const roleSelect = document.createElement("select");
  roleSelect.dataset.control = "invite-role";
  for (const role of invitableRoles(options.role)) {
    const option = document.createElement("option");
    option.value = role;
    option.textContent = role;
    roleSelect.appendChild(option);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.dataset.action = "send-invitation";
  submit.textContent = "invite";
  const error = document.createElement("p");
  error.className = "form-error hidden";

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    error.classList.add("hidden");
    options.api.invite(options.experiment.id, email.value, roleSelect.value)
      .then(() => { email.value = ""; })
      .catch((failure) => fieldError(error, failure));
  });

  form.append(email, roleSelect, submit, error);
  return form;
}

function memberRow(member: MembershipSummary, options: AdminPanelOptions): HTMLElement {
  const row = document.createElement("li");
  row.className = `member status-${member.status}`;
  const label = document.createElement("span");
  label.textContent = `@${member.handle ?? member.user_id} (${member.role}`
    + `${member.is_agent ? ", agent" : ""}) — ${member.status}`;
  row.appendChild(label);

  const isSelf = member.user_id === options.currentUserId;
  const removable = member.role !== "owner" && !isSelf && member.status === "active"
    && (options.role === "owner"
        || (can(options.role, "remove_regular") && member.role === "regular"));
  if (removable) {
    const remove = document.createElement("button");
    remove.dataset.action = "remove-member";
    remove.textContent = "remove";
    remove.addEventListener("click", () =>
      options.api.removeMember(options.experiment.id, member.user_id));
    row.appendChild(remove);
  }

  if (can(options.role, "ban_regular") && member.role === "regular" && !isSelf
      && member.status === "active") {
    const ban = document.createElement("button");
    ban.dataset.action = "ban-member";
    ban.textContent = "ban";
    ban.addEventListener("click", () =>
      options.api.banMember(options.experiment.id, member.user_id));
    row.appendChild(ban);
  }

  if (can(options.role, "report_user") && !isSelf && member.status === "active") {
    const report = document.createElement("button");
    report.dataset.action = "report-member";
    report.textContent = "report";
    report.addEventListener("click", () =>
      options.api.reportUser(options.experiment.id, member.user_id,
                             "reported from the admin panel"));
    row.appendChild(report);
  }
  return row;
}

function agentForm(options: AdminPanelOptions): HTMLElement {
  const form = document.createElement("form");
  form.className = "agent-form";
  form.dataset.control = "register-agent";

  const fields = {
    handle: Object.assign(document.createElement("input"),
                          { placeholder: "agent_handle", required: true }),
    display_name: Object.assign(document.createElement("input"),
                                { placeholder: "display name" }),
    persona_prompt: Object.assign(document.createElement("textarea"),
                                  { placeholder: "persona prompt" }),
    endpoint_url: Object.assign(document.createElement("input"),
                                { placeholder: "https://inference.example/v1 (optional)" }),
    model_name: Object.assign(document.createElement("input"),
                              { placeholder: "model name" }),
    api_key: Object.assign(document.createElement("input"),
                           { placeholder: "api key (optional)", type: "password" }),
  };
  const trigger = document.createElement("select");
  trigger.dataset.control = "trigger-policy";
  for (const policy of ["all_posts", "replies_to_self_thread", "mentions_only"]) {
    const option = document.createElement("option");
    option.value = policy;
    option.textContent = policy;
    trigger.appendChild(option);
  }
  const toggles: Record<string, HTMLInputElement> = {};
  const toggleWrap = document.createElement("div");
  toggleWrap.className = "agent-actions";
  for (const action of ["like", "repost", "reply"]) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = true;
    box.dataset.control = `agent-action-${action}`;
    toggles[action] = box;
    label.append(box, document.createTextNode(action));
    toggleWrap.appendChild(label);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.dataset.action = "register-agent";
  submit.textContent = "deploy agent";
  const error = document.createElement("p");
  error.className = "form-error hidden";

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    error.classList.add("hidden");
    options.api.registerAgent(options.experiment.id, {
      handle: fields.handle.value,
      display_name: fields.display_name.value,
      persona_prompt: fields.persona_prompt.value,
      endpoint_url: fields.endpoint_url.value || null,
      model_name: fields.model_name.value,
      api_key: fields.api_key.value || null,
      trigger_policy: trigger.value,
      actions_enabled: Object.entries(toggles)
        .filter(([, box]) => box.checked).map(([name]) => name),
    }).then(() => form.reset()).catch((failure) => fieldError(error, failure));
  });

  form.append(fields.handle, fields.display_name, fields.persona_prompt,
              fields.endpoint_url, fields.model_name, fields.api_key,
              trigger, toggleWrap, submit, error);
  return form;
}

export function createAdminPanel(options: AdminPanelOptions): HTMLElement {
  const root = document.createElement("section");
  root.className = "admin-panel";

  const heading = document.createElement("h2");
  heading.textContent = options.experiment.title;
  root.appendChild(heading);

  const irb = document.createElement("p");
  irb.className = "irb-link";
  const irbAnchor = document.createElement("a");
  irbAnchor.href = `${options.api.baseUrl}/api/media/${options.experiment.irb_document}`;
  irbAnchor.textContent = "IRB document on file";
  irb.appendChild(irbAnchor);
  root.appendChild(irb);

  if (can(options.role, "configure_experiment")) {
    const configure = document.createElement("form");
    configure.dataset.control = "configure-experiment";
    const title = Object.assign(document.createElement("input"),
                                { value: options.experiment.title });
    const description = Object.assign(document.createElement("textarea"),
                                      { value: options.experiment.description });
    const badge = document.createElement("input");
    badge.type = "checkbox";
    badge.checked = options.experiment.agent_badge_visible;
    badge.dataset.control = "agent-badge-visible";
    const badgeLabel = document.createElement("label");
    badgeLabel.append(badge, document.createTextNode(" show agent badges"));
    const save = document.createElement("button");
    save.type = "submit";
    save.dataset.action = "save-experiment";
    save.textContent = "save";
    configure.addEventListener("submit", (event) => {
      event.preventDefault();
      void options.api.updateExperiment(options.experiment.id, {
        title: title.value, description: description.value,
        agent_badge_visible: badge.checked,
      });
    });
    configure.append(title, description, badgeLabel, save);
    root.appendChild(configure);
  }

  if (invitableRoles(options.role).length > 0) {
    root.appendChild(inviteForm(options));
  }

  const members = document.createElement("ul");
  members.className = "member-list";
  members.dataset.control = "member-list";
  root.appendChild(members);
  void options.api.members(options.experiment.id).then((result) => {
    for (const member of result.members) {
      members.appendChild(memberRow(member, options));
    }
  });

  if (canManageAgents(options.role)) {
    root.appendChild(agentForm(options));
  }

  if (canExport(options.role)) {
    const exports = document.createElement("div");
    exports.className = "export-controls";
    for (const anonymize of [false, true]) {
      const link = document.createElement("a");
      link.dataset.action = anonymize ? "export-anonymized" : "export-plain";
      link.href = options.api.exportUrl(options.experiment.id, anonymize);
      link.textContent = anonymize ? "export (anonymized)" : "export (full)";
      exports.appendChild(link);
    }
    root.appendChild(exports);
  }

  if (canFlagPosts(options.role)) {
    const note = document.createElement("p");
    note.className = "moderation-note";
    note.dataset.control = "moderation-tools";
    note.textContent = "moderation tools (flag, delete) appear on each post";
    root.appendChild(note);
  }

  return root;
}
