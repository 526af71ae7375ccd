/**
 * Server-sent events client. EventSource cannot set headers, so the session
 * token travels as a query parameter; resume state rides `last_event_id`.
 * The constructor is injectable so tests can feed a fake EventSource.
 */

export interface SsePayloads {
  notification: { id: number; kind: string; experiment_id: string };
  post_created: { experiment_id: string; post_id: number };
}

export type SseHandlers = {
  [K in keyof SsePayloads]?: (payload: SsePayloads[K], eventId: number) => void;
};

interface EventSourceLike {
  addEventListener(name: string, cb: (event: MessageEvent) => void): void;
  close(): void;
}

type EventSourceCtor = new (url: string) => EventSourceLike;

export class EventStream {
  private source: EventSourceLike | null = null;
  lastEventId = 0;

  constructor(
    private baseUrl: string,
    private ctor: EventSourceCtor =
      (globalThis as { EventSource?: EventSourceCtor }).EventSource!,
  ) {}

  connect(token: string, handlers: SseHandlers): void {
    this.close();
    const params = new URLSearchParams({ token });
    if (this.lastEventId > 0) params.set("last_event_id", String(this.lastEventId));
    const source = new this.ctor(`${this.baseUrl}/api/events?${params}`);
    for (const name of ["notification", "post_created"] as const) {
      const handler = handlers[name];
      if (!handler) continue;
      source.addEventListener(name, (event: MessageEvent) => {
        const id = Number((event as MessageEvent & { lastEventId?: string }).lastEventId ?? 0);
        if (id > 0) {
          if (id <= this.lastEventId) return; // at-least-once delivery: dedup by id
          this.lastEventId = id;
        }
        handler(JSON.parse(event.data), id);
      });
    }
    this.source = source;
  }

  close(): void {
    this.source?.close();
    this.source = null;
  }
}
