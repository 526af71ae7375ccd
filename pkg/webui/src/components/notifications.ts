/**
 * Notification center: exactly the five filters (all, likes, comments,
 * reposts, follows), a badge fed by unseen_count and SSE, mark-seen on open.
 */

import type { ApiClient } from "../api";
import type { ClientSession } from "../session";
import type { NotificationItem } from "../types";

export const NOTIFICATION_FILTERS = ["all", "likes", "comments", "reposts", "follows"] as const;

export function createBadge(session: ClientSession): HTMLElement {
  const badge = document.createElement("span");
  badge.className = "notification-badge";
  const sync = () => {
    badge.textContent = session.unseenCount > 0 ? String(session.unseenCount) : "";
    badge.classList.toggle("hidden", session.unseenCount === 0);
  };
  session.subscribe(sync);
  sync();
  return badge;
}

export function createNotificationCenter(
  api: ApiClient, session: ClientSession, initialFilter = "all",
): HTMLElement {
  const root = document.createElement("section");
  root.className = "notification-center";

  const tabs = document.createElement("nav");
  tabs.className = "notification-filters";
  const list = document.createElement("ul");
  list.className = "notification-list";
  root.append(tabs, list);

  let active = (NOTIFICATION_FILTERS as readonly string[]).includes(initialFilter)
    ? initialFilter : "all";

  function renderItem(note: NotificationItem): HTMLElement {
    const item = document.createElement("li");
    item.className = note.seen ? "notification seen" : "notification unseen";
    item.dataset.kind = note.kind;
    const verbs: Record<string, string> = {
      like: "liked your post", comment: "replied to your post",
      repost: "reposted your post", follow: "followed you",
    };
    item.textContent = `${verbs[note.kind]}${note.subject_post_id ? ` (${note.subject_post_id})` : ""}`;
    return item;
  }

  async function load() {
    const page = await api.notifications(active);
    list.textContent = "";
    for (const note of page.items) list.appendChild(renderItem(note));
    session.setUnseen(page.unseen_count);
    // opening the page marks the visible items seen
    const top = page.items.reduce((max, n) => Math.max(max, n.id), 0);
    if (top > 0 && page.items.some((n) => !n.seen)) {
      const result = await api.markSeen(top);
      session.setUnseen(result.unseen_count);
    }
    for (const tab of tabs.querySelectorAll("button")) {
      tab.classList.toggle("active", tab.dataset.filter === active);
    }
  }

  for (const name of NOTIFICATION_FILTERS) {
    const tab = document.createElement("button");
    tab.dataset.filter = name;
    tab.textContent = name;
    tab.addEventListener("click", () => {
      active = name;
      void load();
    });
    tabs.appendChild(tab);
  }

  void load();
  return root;
}
