/**
 * Application shell: wires config, API client, session, SSE and the router;
 * renders one view per route.
 */

import { ApiClient } from "./api";
import { readConfig } from "./config";
import { parseRoute, routeHash, type ViewRoute } from "./router";
import { ClientSession } from "./session";
import { EventStream } from "./sse";
import { createAdminPanel } from "./components/admin";
import { createComposer } from "./components/composer";
import { createFeed, renderPost, type FeedController } from "./components/feed";
import { createLoginView } from "./components/login";
import { createBadge, createNotificationCenter } from "./components/notifications";
import type { PostItem } from "./types";

export class App {
  api: ApiClient;
  session: ClientSession;
  stream: EventStream;
  private outlet: HTMLElement;
  private feed: FeedController | null = null;

  constructor(private root: HTMLElement, baseUrl?: string,
              eventSourceCtor?: ConstructorParameters<typeof EventStream>[1]) {
    const config = readConfig();
    this.api = new ApiClient(baseUrl ?? config.baseUrl);
    this.session = new ClientSession(this.api);
    this.stream = new EventStream(this.api.baseUrl, eventSourceCtor);
    this.outlet = document.createElement("main");
  }

  start(): void {
    this.root.textContent = "";
    this.root.append(this.buildChrome(), this.outlet);
    window.addEventListener("hashchange", () => this.renderRoute());
    window.addEventListener("focus", () => {
      // refetch-on-focus keeps the session mirror honest
      if (this.session.token) void this.session.refreshUnseen();
    });
    this.renderRoute();
  }

  private buildChrome(): HTMLElement {
    const bar = document.createElement("nav");
    bar.className = "top-bar";
    const brand = document.createElement("a");
    brand.href = "#/";
    brand.className = "brand";
    brand.textContent = "discourse sandbox";
    const notifications = document.createElement("a");
    notifications.href = routeHash({ name: "notifications", filter: "all" });
    notifications.className = "nav-notifications";
    notifications.append(document.createTextNode("notifications"),
                         createBadge(this.session));
    const account = document.createElement("a");
    account.href = routeHash({ name: "account_settings" });
    account.textContent = "account";
    bar.append(brand, notifications, account);
    return bar;
  }

  private connectStream(): void {
    if (!this.session.token) return;
    this.stream.connect(this.session.token, {
      notification: () => {
        this.session.bumpUnseen();
      },
      post_created: (payload) => {
        if (payload.experiment_id === this.session.activeExperimentId) {
          this.feed?.showNewPostsPill();
        }
      },
    });
  }

  onAuthenticated(token: string): void {
    void this.session.adopt(token).then(() => {
      this.connectStream();
      const experimentId = this.session.activeExperimentId;
      window.location.hash = experimentId
        ? routeHash({ name: "home", experimentId })
        : routeHash({ name: "account_settings" });
    });
  }

  renderRoute(): void {
    const route = parseRoute(window.location.hash);
    this.outlet.textContent = "";
    this.feed = null;
    if (!this.session.token && route.name !== "login") {
      window.location.hash = "#/login";
      if (route.name !== ("login" as never)) {
        this.outlet.appendChild(createLoginView({
          api: this.api, onAuthenticated: (token) => this.onAuthenticated(token),
        }));
      }
      return;
    }
    this.outlet.appendChild(this.viewFor(route));
  }

  private timelineView(route: ViewRoute & { experimentId: string },
                       fetcher: (cursor: string | null) => Promise<{ items: PostItem[]; next_cursor: string | null }>,
                       withComposer: boolean): HTMLElement {
    const wrap = document.createElement("div");
    this.session.activeExperimentId = route.experimentId;
    const role = this.session.roleIn(route.experimentId);
    const feed = createFeed(fetcher, {
      api: this.api,
      role,
      currentUserId: this.session.user?.id ?? "",
      emptyText: route.name === "home"
        ? "follow people to see posts" : "nothing here yet",
      onOpenThread: (post) => {
        const seq = Number(post.id.split(":")[1]);
        window.location.hash = routeHash({
          name: "thread", experimentId: route.experimentId, postSeq: seq });
      },
    });
    this.feed = feed;
    if (withComposer && role) {
      wrap.appendChild(createComposer({
        submit: (body) => this.api.createPost(route.experimentId, body),
        onPosted: () => void feed.refresh(),
      }));
    }
    wrap.appendChild(feed.element);
    void feed.loadMore();
    return wrap;
  }

  private viewFor(route: ViewRoute): HTMLElement {
    switch (route.name) {
      case "login":
        return createLoginView({
          api: this.api, onAuthenticated: (token) => this.onAuthenticated(token),
        });
      case "home":
        return this.timelineView(route,
          (cursor) => this.api.homeFeed(route.experimentId, cursor), true);
      case "explore":
        return this.timelineView(route,
          (cursor) => this.api.exploreFeed(route.experimentId, cursor), true);
      case "hashtag":
        return this.timelineView(route,
          (cursor) => this.api.hashtagFeed(route.experimentId, route.tag, cursor),
          false);
      case "search":
        return this.timelineView(route,
          async (cursor) => (await this.api.search(
            route.experimentId, route.query, cursor)).posts, false);
      case "thread":
        return this.threadView(route.experimentId, route.postSeq);
      case "notifications":
        return createNotificationCenter(this.api, this.session, route.filter);
      case "account_settings":
        return this.accountView();
      case "experiment_admin":
      case "agent_admin":
        return this.adminView(route.experimentId);
    }
  }

  private threadView(experimentId: string, postSeq: number): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "thread-view";
    this.session.activeExperimentId = experimentId;
    const role = this.session.roleIn(experimentId);
    void this.api.thread(experimentId, postSeq).then((result) => {
      for (const post of result.items) {
        wrap.appendChild(renderPost(post, {
          api: this.api, role, currentUserId: this.session.user?.id ?? "",
        }));
      }
      if (role) {
        const rootId = `${experimentId}:${postSeq}`;
        wrap.appendChild(createComposer({
          placeholder: "reply to this thread",
          submit: (body) => this.api.reply(rootId, body),
        }));
      }
    });
    return wrap;
  }

  private accountView(): HTMLElement {
    const wrap = document.createElement("section");
    wrap.className = "account-view";
    const user = this.session.user;
    if (!user) return wrap;
    const heading = document.createElement("h2");
    heading.textContent = `@${user.handle}`;
    const created = document.createElement("p");
    created.textContent = `account created ${user.created_at}`;
    wrap.append(heading, created);

    const experiments = document.createElement("ul");
    experiments.className = "experiment-list";
    void this.session.refreshExperiments().then((listing) => {
      for (const row of listing.mine) {
        const item = document.createElement("li");
        const open = document.createElement("a");
        open.href = routeHash({ name: "home", experimentId: row.experiment.id });
        open.textContent = `${row.experiment.title} (${row.membership.role})`;
        item.appendChild(open);
        if (row.membership.role === "owner" || row.membership.role === "collaborator"
            || row.membership.role === "content_moderator") {
          const adminLink = document.createElement("a");
          adminLink.href = routeHash({
            name: "experiment_admin", experimentId: row.experiment.id });
          adminLink.textContent = " [manage]";
          item.appendChild(adminLink);
        }
        experiments.appendChild(item);
      }
    });
    wrap.appendChild(experiments);
    return wrap;
  }

  private adminView(experimentId: string): HTMLElement {
    const wrap = document.createElement("div");
    this.session.activeExperimentId = experimentId;
    const role = this.session.roleIn(experimentId);
    if (!role) {
      wrap.textContent = "not a member of this experiment";
      return wrap;
    }
    void this.session.refreshExperiments().then((listing) => {
      const row = listing.mine.find((r) => r.experiment.id === experimentId);
      if (row) {
        wrap.appendChild(createAdminPanel({
          api: this.api, experiment: row.experiment, role,
          currentUserId: this.session.user?.id ?? "",
        }));
      }
    });
    return wrap;
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (root) new App(root).start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
