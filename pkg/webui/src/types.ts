// Wire shapes of the gateway REST API (see /api/openapi.json).

export type Role = "owner" | "collaborator" | "content_moderator" | "regular";

export interface AccountSummary {
  id: string;
  handle: string;
  display_name: string;
  bio: string;
  kind: "regular" | "researcher";
  created_at: string;
  is_agent: boolean;
  profile_photo: string | null;
  banner_photo: string | null;
}

export interface ExperimentSummary {
  id: string;
  title: string;
  description: string;
  visibility: string;
  owner: string;
  created_at: string;
  irb_document: string;
  agent_badge_visible: boolean;
}

export interface MembershipSummary {
  user_id: string;
  experiment_id: string;
  role: Role;
  status: "invited" | "active" | "removed" | "banned";
  joined_at: string | null;
  handle?: string;
  display_name?: string;
  is_agent?: boolean;
}

export interface PostItem {
  id: string; // "{experiment_id}:{seq}"
  experiment_id: string;
  author: { id: string; handle: string; display_name: string; is_agent: boolean };
  kind: "original" | "comment" | "repost";
  body: string;
  parent_id: string | null;
  repost_of: string | null;
  hashtags: string[];
  created_at: string;
  like_count: number;
  repost_count: number;
  comment_count: number;
  liked_by_caller: boolean;
}

export interface FeedPage {
  items: PostItem[];
  next_cursor: string | null;
}

export type NotificationKind = "like" | "comment" | "repost" | "follow";

export interface NotificationItem {
  id: number;
  kind: NotificationKind;
  actor_id: string;
  subject_post_id: string | null;
  experiment_id: string;
  created_at: string;
  seen: boolean;
}

export interface NotificationsPage {
  items: NotificationItem[];
  next_cursor: string | null;
  unseen_count: number;
}

export interface AgentSummary {
  id: string;
  experiment_id: string;
  user_id: string;
  handle: string;
  persona_prompt: string;
  endpoint_url: string | null;
  model_name: string;
  has_api_key: boolean;
  trigger_policy: string;
  actions_enabled: string[];
  max_thread_depth: number;
  min_seconds_between_actions: number;
  active: boolean;
}

export interface ExperimentListing {
  mine: { experiment: ExperimentSummary; membership: MembershipSummary }[];
  potential: { experiment: ExperimentSummary; invitation: { token: string } }[];
}

export interface ApiErrorPayload {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
