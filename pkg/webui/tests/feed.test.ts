// The timeline: server ordering preserved, pages concatenate without
// duplicates, empty states, and the new-posts pill.

import { createFeed } from "../src/components/feed";
import type { ApiClient } from "../src/api";
import type { FeedPage, PostItem } from "../src/types";

function post(seq: number): PostItem {
  return {
    id: `e1:${seq}`, experiment_id: "e1",
    author: { id: "u1", handle: "ada", display_name: "Ada", is_agent: false },
    kind: "original", body: `post ${seq}`, parent_id: null, repost_of: null,
    hashtags: [], created_at: "2026-01-01T00:00:00+00:00",
    like_count: 0, repost_count: 0, comment_count: 0, liked_by_caller: false,
  };
}

function pagedFetcher(pages: FeedPage[]) {
  const calls: (string | null)[] = [];
  const fetcher = async (cursor: string | null) => {
    calls.push(cursor);
    const index = cursor === null ? 0 : Number(cursor);
    return pages[index];
  };
  return { fetcher, calls };
}

const API = {} as ApiClient;

afterEach(() => { document.body.textContent = ""; });

test("three pages concatenate seamlessly with no duplicates", async () => {
  const seqs = Array.from({ length: 45 }, (_, i) => 45 - i);  // newest first
  const pages: FeedPage[] = [
    { items: seqs.slice(0, 20).map(post), next_cursor: "1" },
    { items: seqs.slice(20, 40).map(post), next_cursor: "2" },
    { items: seqs.slice(40).map(post), next_cursor: null },
  ];
  const { fetcher, calls } = pagedFetcher(pages);
  const feed = createFeed(fetcher, { api: API, role: "regular", currentUserId: "u1" });
  document.body.appendChild(feed.element);

  await feed.loadMore();
  await feed.loadMore();
  await feed.loadMore();

  const rendered = [...feed.element.querySelectorAll<HTMLElement>(".post")]
    .map((node) => node.dataset.postId);
  expect(rendered).toEqual(seqs.map((s) => `e1:${s}`));
  expect(new Set(rendered).size).toBe(45);
  expect(calls).toEqual([null, "1", "2"]);

  const more = feed.element.querySelector(".feed-more")!;
  expect(more.classList.contains("hidden")).toBe(true);  // exhausted
});

test("empty feed shows its empty state", async () => {
  const feed = createFeed(async () => ({ items: [], next_cursor: null }), {
    api: API, role: "regular", currentUserId: "u1",
    emptyText: "follow people to see posts",
  });
  document.body.appendChild(feed.element);
  await feed.loadMore();
  const empty = feed.element.querySelector(".feed-empty")!;
  expect(empty.classList.contains("hidden")).toBe(false);
  expect(empty.textContent).toBe("follow people to see posts");
});

test("new-posts pill appears on demand and refresh consumes it", async () => {
  let version = 0;
  const feed = createFeed(async () => {
    version += 1;
    return { items: [post(version)], next_cursor: null };
  }, { api: API, role: "regular", currentUserId: "u1" });
  document.body.appendChild(feed.element);
  await feed.loadMore();

  const pill = feed.element.querySelector<HTMLButtonElement>(".new-posts-pill")!;
  expect(pill.classList.contains("hidden")).toBe(true);
  feed.showNewPostsPill();
  expect(pill.classList.contains("hidden")).toBe(false);

  await feed.refresh();
  expect(pill.classList.contains("hidden")).toBe(true);
  expect(feed.postIds()).toEqual(["e1:2"]);
});

test("agent badge renders unless the experiment hides it", async () => {
  const agentPost = {
    ...post(1),
    author: { id: "u9", handle: "botty", display_name: "B", is_agent: true },
  };
  const visible = createFeed(async () => ({ items: [agentPost], next_cursor: null }),
                             { api: API, role: "regular", currentUserId: "u1" });
  document.body.appendChild(visible.element);
  await visible.loadMore();
  expect(visible.element.querySelector(".agent-badge")).not.toBeNull();

  const hidden = createFeed(async () => ({ items: [{ ...agentPost }], next_cursor: null }),
                            { api: API, role: "regular", currentUserId: "u1",
                              agentBadgeVisible: false });
  document.body.appendChild(hidden.element);
  await hidden.loadMore();
  expect(hidden.element.querySelector(".agent-badge")).toBeNull();
});
