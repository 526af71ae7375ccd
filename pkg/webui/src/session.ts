/**
 * The client session: token, current user, active experiment, unseen badge
 * count. Mirrors server truth by refetching; SSE events and refetch-on-focus
 * nudge it. Nothing here survives a user switch.
 */

import type { ApiClient } from "./api";
import type { AccountSummary, ExperimentListing, Role } from "./types";

type Listener = () => void;

export class ClientSession {
  token: string | null = null;
  user: AccountSummary | null = null;
  activeExperimentId: string | null = null;
  roleByExperiment = new Map<string, Role>();
  unseenCount = 0;
  lastEventId = 0;

  private listeners = new Set<Listener>();

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit() {
    for (const listener of this.listeners) listener();
  }

  async adopt(token: string) {
    // a new token means a (possibly) new user: drop every cached fact first
    this.token = token;
    this.api.token = token;
    this.user = null;
    this.activeExperimentId = null;
    this.roleByExperiment.clear();
    this.unseenCount = 0;
    this.lastEventId = 0;
    this.user = await this.api.account();
    await this.refreshExperiments();
    await this.refreshUnseen();
    this.emit();
  }

  clear() {
    this.token = null;
    this.api.token = null;
    this.user = null;
    this.activeExperimentId = null;
    this.roleByExperiment.clear();
    this.unseenCount = 0;
    this.lastEventId = 0;
    this.emit();
  }

  async refreshExperiments(): Promise<ExperimentListing> {
    const listing = await this.api.experiments();
    this.roleByExperiment.clear();
    for (const row of listing.mine) {
      if (row.membership.status === "active") {
        this.roleByExperiment.set(row.experiment.id, row.membership.role);
      }
    }
    if (!this.activeExperimentId && listing.mine.length > 0) {
      this.activeExperimentId = listing.mine[0].experiment.id;
    }
    this.emit();
    return listing;
  }

  async refreshUnseen() {
    const page = await this.api.notifications("all");
    this.setUnseen(page.unseen_count);
  }

  setUnseen(count: number) {
    if (count !== this.unseenCount) {
      this.unseenCount = count;
      this.emit();
    }
  }

  bumpUnseen() {
    this.unseenCount += 1;
    this.emit();
  }

  roleIn(experimentId: string): Role | null {
    return this.roleByExperiment.get(experimentId) ?? null;
  }
}
