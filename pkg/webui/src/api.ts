/**
 * Typed fetch wrapper for the gateway REST API. Errors arrive as
 * `{code, message, details}`; they surface as ApiError so views can render
 * the code verbatim next to the offending field.
 */

import type {
  AccountSummary, AgentSummary, ApiErrorPayload, ExperimentListing,
  ExperimentSummary, FeedPage, MembershipSummary, NotificationsPage, PostItem,
} from "./types";

export class ApiError extends Error {
  code: string;
  status: number;
  details: Record<string, unknown>;

  constructor(status: number, payload: ApiErrorPayload) {
    super(payload.message || payload.code);
    this.code = payload.code;
    this.status = status;
    this.details = payload.details ?? {};
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  baseUrl: string;
  token: string | null = null;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch.bind(globalThis)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let payload: ApiErrorPayload;
      try {
        payload = (await response.json()) as ApiErrorPayload;
      } catch {
        payload = { code: `HTTP${response.status}`, message: response.statusText, details: {} };
      }
      throw new ApiError(response.status, payload);
    }
    return (await response.json()) as T;
  }

  // -- auth -----------------------------------------------------------------

  register(body: { handle: string; email: string; password: string;
                   display_name: string; consents: string[] }) {
    return this.request<AccountSummary>("POST", "/auth/register", body);
  }

  login(handleOrEmail: string, password: string) {
    return this.request<{ token: string; second_factor_passed: boolean;
                          second_factor_enrolled: boolean }>(
      "POST", "/auth/login", { handle_or_email: handleOrEmail, password });
  }

  enroll2fa(label: string) {
    return this.request<{ device_id: string; provisioning_uri: string }>(
      "POST", "/auth/2fa/enroll", { label });
  }

  verify2fa(code: string, deviceId?: string) {
    return this.request<{ token: string; second_factor_passed: boolean }>(
      "POST", "/auth/2fa/verify", { code, device_id: deviceId ?? null });
  }

  account() {
    return this.request<AccountSummary>("GET", "/account");
  }

  updateAccount(patch: Record<string, unknown>) {
    return this.request<AccountSummary>("PATCH", "/account", patch);
  }

  // -- experiments ------------------------------------------------------------

  experiments() {
    return this.request<ExperimentListing>("GET", "/api/experiments");
  }

  createExperiment(body: Record<string, unknown>) {
    return this.request<ExperimentSummary>("POST", "/api/experiments", body);
  }

  updateExperiment(experimentId: string, patch: Record<string, unknown>) {
    return this.request<ExperimentSummary>(
      "PATCH", `/api/experiments/${experimentId}`, patch);
  }

  members(experimentId: string) {
    return this.request<{ members: MembershipSummary[] }>(
      "GET", `/api/experiments/${experimentId}/members`);
  }

  invite(experimentId: string, email: string, role: string) {
    return this.request<{ token: string }>(
      "POST", `/api/experiments/${experimentId}/invitations`, { email, role });
  }

  acceptInvitation(token: string) {
    return this.request<MembershipSummary>("POST", `/api/invitations/${token}/accept`);
  }

  removeMember(experimentId: string, userId: string) {
    return this.request<MembershipSummary>(
      "DELETE", `/api/experiments/${experimentId}/members/${userId}`);
  }

  banMember(experimentId: string, userId: string) {
    return this.request<MembershipSummary>(
      "POST", `/api/experiments/${experimentId}/bans`, { user_id: userId });
  }

  reportUser(experimentId: string, userId: string, reason: string) {
    return this.request<{ id: number }>(
      "POST", `/api/experiments/${experimentId}/reports`,
      { user_id: userId, reason });
  }

  // -- discourse ----------------------------------------------------------------

  createPost(experimentId: string, body: string) {
    return this.request<PostItem>(
      "POST", `/api/experiments/${experimentId}/posts`, { body });
  }

  reply(postId: string, body: string) {
    return this.request<PostItem>("POST", `/api/posts/${postId}/replies`, { body });
  }

  like(postId: string) {
    return this.request<{ status: string }>("PUT", `/api/posts/${postId}/like`);
  }

  undoLike(postId: string) {
    return this.request<{ status: string }>("DELETE", `/api/posts/${postId}/like`);
  }

  repost(postId: string) {
    return this.request<PostItem>("POST", `/api/posts/${postId}/repost`);
  }

  follow(userId: string, experimentId: string) {
    return this.request<{ status: string }>(
      "PUT", `/api/users/${userId}/follow?experiment=${experimentId}`);
  }

  unfollow(userId: string, experimentId: string) {
    return this.request<{ status: string }>(
      "DELETE", `/api/users/${userId}/follow?experiment=${experimentId}`);
  }

  deletePost(postId: string) {
    return this.request<{ status: string }>("DELETE", `/api/posts/${postId}`);
  }

  flagPost(postId: string, reason: string) {
    return this.request<{ id: string }>(
      "POST", `/api/posts/${postId}/flags`, { reason });
  }

  // -- feeds ---------------------------------------------------------------------

  private feedPath(experimentId: string, which: string, cursor?: string | null) {
    const suffix = cursor ? `?cursor=${encodeURIComponent(cursor)}` : "";
    return `/api/experiments/${experimentId}/${which}${suffix}`;
  }

  homeFeed(experimentId: string, cursor?: string | null) {
    return this.request<FeedPage>("GET", this.feedPath(experimentId, "feed/home", cursor));
  }

  exploreFeed(experimentId: string, cursor?: string | null) {
    return this.request<FeedPage>("GET", this.feedPath(experimentId, "feed/explore", cursor));
  }

  hashtagFeed(experimentId: string, tag: string, cursor?: string | null) {
    return this.request<FeedPage>(
      "GET", this.feedPath(experimentId, `hashtags/${encodeURIComponent(tag)}`, cursor));
  }

  search(experimentId: string, query: string, cursor?: string | null) {
    const extra = cursor ? `&cursor=${encodeURIComponent(cursor)}` : "";
    return this.request<{ posts: FeedPage; accounts: AccountSummary[] }>(
      "GET", `/api/experiments/${experimentId}/search?q=${encodeURIComponent(query)}${extra}`);
  }

  trending(experimentId: string) {
    return this.request<{ trending: { tag: string; unique_post_count: number }[] }>(
      "GET", `/api/experiments/${experimentId}/trending`);
  }

  thread(experimentId: string, postSeq: number) {
    return this.request<{ items: PostItem[] }>(
      "GET", `/api/experiments/${experimentId}/threads/${postSeq}`);
  }

  notifications(filter: string, cursor?: string | null) {
    const extra = cursor ? `&cursor=${encodeURIComponent(cursor)}` : "";
    return this.request<NotificationsPage>(
      "GET", `/api/notifications?filter=${filter}${extra}`);
  }

  markSeen(upToId: number) {
    return this.request<{ marked: number; unseen_count: number }>(
      "POST", "/api/notifications/seen", { up_to_id: upToId });
  }

  // -- agents -----------------------------------------------------------------------

  registerAgent(experimentId: string, body: Record<string, unknown>) {
    return this.request<AgentSummary>(
      "POST", `/api/experiments/${experimentId}/agents`, body);
  }

  updateAgent(agentId: string, patch: Record<string, unknown>) {
    return this.request<AgentSummary>("PATCH", `/api/agents/${agentId}`, patch);
  }

  exportUrl(experimentId: string, anonymize: boolean): string {
    return `${this.baseUrl}/api/experiments/${experimentId}/export?anonymize=${anonymize}`;
  }
}
