/**
 * Timeline view: server-ordered items, cursor-driven infinite scroll, and an
 * unobtrusive "new posts" pill when SSE announces arrivals while reading.
 */

import type { ApiClient } from "../api";
import type { FeedPage, PostItem, Role } from "../types";
import { can, canFlagPosts } from "../permissions";

export type PageFetcher = (cursor: string | null) => Promise<FeedPage>;

export interface FeedOptions {
  api: ApiClient;
  role: Role | null;
  currentUserId: string;
  emptyText?: string;
  agentBadgeVisible?: boolean;
  onOpenThread?: (post: PostItem) => void;
}

export interface FeedController {
  element: HTMLElement;
  loadMore(): Promise<void>;
  refresh(): Promise<void>;
  showNewPostsPill(): void;
  postIds(): string[];
}

function describe(post: PostItem): string {
  if (post.kind === "repost") return `reposted ${post.repost_of ?? ""}`;
  return post.body;
}

export function renderPost(post: PostItem, options: FeedOptions): HTMLElement {
  const article = document.createElement("article");
  article.className = "post";
  article.dataset.postId = post.id;

  const head = document.createElement("header");
  const author = document.createElement("span");
  author.className = "post-author";
  author.textContent = `@${post.author.handle}`;
  head.appendChild(author);
  if (post.author.is_agent && options.agentBadgeVisible !== false) {
    const badge = document.createElement("span");
    badge.className = "agent-badge";
    badge.textContent = "agent";
    head.appendChild(badge);
  }
  const stamp = document.createElement("time");
  stamp.textContent = new Date(post.created_at).toLocaleString();
  head.appendChild(stamp);
  article.appendChild(head);

  const body = document.createElement("p");
  body.className = "post-body";
  body.textContent = describe(post);
  article.appendChild(body);

  const actions = document.createElement("div");
  actions.className = "post-actions";

  if (options.role && can(options.role, "interact")) {
    const like = document.createElement("button");
    like.dataset.action = "like";
    like.textContent = `${post.liked_by_caller ? "♥" : "♡"} ${post.like_count}`;
    like.addEventListener("click", async () => {
      try {
        if (post.liked_by_caller) {
          await options.api.undoLike(post.id);
          post.liked_by_caller = false;
          post.like_count -= 1;
        } else {
          await options.api.like(post.id);
          post.liked_by_caller = true;
          post.like_count += 1;
        }
        like.textContent = `${post.liked_by_caller ? "♥" : "♡"} ${post.like_count}`;
      } catch { /* server refused; leave the rendered count untouched */ }
    });
    actions.appendChild(like);

    const repost = document.createElement("button");
    repost.dataset.action = "repost";
    repost.textContent = `⟳ ${post.repost_count}`;
    repost.addEventListener("click", () => options.api.repost(post.id));
    actions.appendChild(repost);
  }

  const replies = document.createElement("button");
  replies.dataset.action = "open-thread";
  replies.textContent = `💬 ${post.comment_count}`;
  replies.addEventListener("click", () => options.onOpenThread?.(post));
  actions.appendChild(replies);

  const mayDelete = options.role && (
    post.author.id === options.currentUserId ||
    can(options.role, post.kind === "comment" ? "delete_comment" : "delete_thread"));
  if (mayDelete) {
    const remove = document.createElement("button");
    remove.dataset.action = "delete-post";
    remove.textContent = "delete";
    remove.addEventListener("click", async () => {
      await options.api.deletePost(post.id);
      article.remove();
    });
    actions.appendChild(remove);
  }

  if (options.role && canFlagPosts(options.role)) {
    const flag = document.createElement("button");
    flag.dataset.action = "flag-post";
    flag.textContent = "flag";
    flag.addEventListener("click", () => options.api.flagPost(post.id, "flagged from timeline"));
    actions.appendChild(flag);
  }

  article.appendChild(actions);
  return article;
}

export function createFeed(fetcher: PageFetcher, options: FeedOptions): FeedController {
  const element = document.createElement("section");
  element.className = "feed";

  const pill = document.createElement("button");
  pill.className = "new-posts-pill hidden";
  pill.dataset.action = "show-new-posts";
  pill.textContent = "new posts";

  const list = document.createElement("div");
  list.className = "feed-items";
  const empty = document.createElement("p");
  empty.className = "feed-empty hidden";
  empty.textContent = options.emptyText ?? "nothing here yet";
  const more = document.createElement("button");
  more.className = "feed-more hidden";
  more.dataset.action = "load-more";
  more.textContent = "load more";

  element.append(pill, list, empty, more);

  let cursor: string | null = null;
  let exhausted = false;
  const seen = new Set<string>();

  async function loadPage(): Promise<void> {
    if (exhausted && cursor === null && seen.size > 0) return;
    const page = await fetcher(cursor);
    for (const post of page.items) {
      if (seen.has(post.id)) continue; // dedup guard for reconnect races
      seen.add(post.id);
      list.appendChild(renderPost(post, options));
    }
    cursor = page.next_cursor;
    exhausted = page.next_cursor === null;
    more.classList.toggle("hidden", exhausted);
    empty.classList.toggle("hidden", seen.size > 0);
  }

  async function refresh(): Promise<void> {
    cursor = null;
    exhausted = false;
    seen.clear();
    list.textContent = "";
    pill.classList.add("hidden");
    await loadPage();
  }

  more.addEventListener("click", () => void loadPage());
  pill.addEventListener("click", () => void refresh());

  // infinite scroll where the environment provides it; the button stays as
  // the universal fallback
  if (typeof IntersectionObserver !== "undefined") {
    const watcher = new IntersectionObserver((entries) => {
      if (entries.some((entry) => entry.isIntersecting) && !exhausted) {
        void loadPage();
      }
    });
    watcher.observe(more);
  }

  return {
    element,
    loadMore: loadPage,
    refresh,
    showNewPostsPill: () => pill.classList.remove("hidden"),
    postIds: () => [...seen],
  };
}
