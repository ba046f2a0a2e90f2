"""Minimal in-process topic broker.

Speaks the same slash-separated topic scheme as an MQTT deployment
(`adt/<session>/gaze/<user>`, `adt/<session>/ctl`) so the pipeline can be
pointed at an external broker later, but ships self-contained: the test
suite and the demo run with no external services.  Callbacks execute
synchronously on the publishing thread.
"""

from __future__ import annotations

import threading
from typing import Callable

Callback = Callable[[str, bytes], None]


def topic_matches(pattern: str, topic: str) -> bool:
    """Match exact segments, `+` for one level, trailing `#` for the rest."""
    p_parts = pattern.split("/")
    t_parts = topic.split("/")
    for i, p in enumerate(p_parts):
        if p == "#":
            return i == len(p_parts) - 1
        if i >= len(t_parts):
            return False
        if p != "+" and p != t_parts[i]:
            return False
    return len(p_parts) == len(t_parts)


class Subscription:
    def __init__(self, broker: "Broker", pattern: str, callback: Callback):
        self.pattern = pattern
        self.callback = callback
        self._broker = broker

    def cancel(self) -> None:
        self._broker._remove(self)


class Broker:
    """Thread-safe publish/subscribe hub for byte payloads."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._subs: list[Subscription] = []

    def subscribe(self, pattern: str, callback: Callback) -> Subscription:
        sub = Subscription(self, pattern, callback)
        with self._lock:
            self._subs.append(sub)
        return sub

    def publish(self, topic: str, payload: bytes) -> int:
        with self._lock:
            targets = [s for s in self._subs if topic_matches(s.pattern, topic)]
        for sub in targets:
            sub.callback(topic, payload)
        return len(targets)

    def _remove(self, sub: Subscription) -> None:
        with self._lock:
            try:
                self._subs.remove(sub)
            except ValueError:
                pass
