"""Per-user realtime event fan-out backing the SSE stream.

Each user owns a bounded ring buffer (oldest dropped; clients refetch on gap)
and a monotonically increasing sequence number, so reconnects can resume with
``Last-Event-ID``. Delivery is at-least-once; clients dedup by id.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional


@dataclass
class BusEvent:
    seq: int
    name: str           # "notification" | "post_created"
    payload: dict


class _UserChannel:
    def __init__(self, buffer_size: int):
        self.buffer: deque[BusEvent] = deque(maxlen=buffer_size)
        self.seq = 0
        self.condition = threading.Condition()


class EventBus:
    def __init__(self, buffer_size: int = 500):
        self._buffer_size = buffer_size
        self._channels: dict[str, _UserChannel] = {}
        self._lock = threading.Lock()

    def _channel(self, user_id: str) -> _UserChannel:
        with self._lock:
            channel = self._channels.get(user_id)
            if channel is None:
                channel = _UserChannel(self._buffer_size)
                self._channels[user_id] = channel
            return channel

    def publish(self, user_id: str, name: str, payload: dict) -> BusEvent:
        channel = self._channel(user_id)
        with channel.condition:
            channel.seq += 1
            event = BusEvent(seq=channel.seq, name=name, payload=payload)
            channel.buffer.append(event)
            channel.condition.notify_all()
            return event

    def pending(self, user_id: str, after: int = 0) -> list[BusEvent]:
        channel = self._channel(user_id)
        with channel.condition:
            return [e for e in channel.buffer if e.seq > after]

    def stream(self, user_id: str, last_event_id: Optional[int] = None,
               heartbeat_seconds: float = 25.0,
               stop: threading.Event | None = None) -> Iterator[Optional[BusEvent]]:
        """Yield buffered then live events; ``None`` marks a heartbeat tick."""
        cursor = last_event_id or 0
        channel = self._channel(user_id)
        while stop is None or not stop.is_set():
            with channel.condition:
                fresh = [e for e in channel.buffer if e.seq > cursor]
                if not fresh:
                    channel.condition.wait(timeout=heartbeat_seconds)
                    fresh = [e for e in channel.buffer if e.seq > cursor]
            if not fresh:
                yield None
                continue
            for event in fresh:
                cursor = event.seq
                yield event
