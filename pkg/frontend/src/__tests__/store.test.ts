import { describe, expect, it } from "vitest";

import { DashboardStore, SERIES_LIMIT } from "../store";
import { ServerPoint } from "../types";

function point(chan: string, t: number, v: number | null): ServerPoint {
  return { chan, t, v };
}

/** Scripted feed covering every channel kind, with null gap windows. */
function scriptedFeed(): ServerPoint[] {
  const frames: ServerPoint[] = [];
  for (let i = 0; i < 40; i++) {
    const t = 3000 + i * 300;
    frames.push(point("k.user.a", t, i % 7 === 3 ? null : Math.sin(i / 5)));
    frames.push(point("k.user.b", t, i % 5 === 2 ? null : Math.cos(i / 4)));
    frames.push(point("k.group", t, i % 7 === 3 && i % 5 === 2 ? null : 0.1 * i));
    frames.push({ chan: "trad.user.a", t, v: { fixation_ms: 200 + i, saccade_px: 40 } });
  }
  for (let j = 0; j < 12; j++) {
    const t = 1000 * (j + 1);
    frames.push(point("ripa.user.a", t, j % 4 === 1 ? null : j / 12));
    frames.push(point("ripa.group", t, j / 12));
  }
  return frames;
}

describe("DashboardStore point conservation", () => {
  it("applies exactly the delivered points across pause/resume and tab switches", () => {
    const store = new DashboardStore();
    const frames = scriptedFeed();
    const sentPerChannel = new Map<string, ServerPoint[]>();
    for (const f of frames) {
      const list = sentPerChannel.get(f.chan) ?? [];
      list.push(f);
      sentPerChannel.set(f.chan, list);
    }

    frames.forEach((frame, i) => {
      if (i === 30) store.togglePause(); // pause mid-stream
      if (i === 90) {
        store.switchTab("coefficient_k");
        store.togglePause(); // resume: buffered points flush in order
      }
      if (i === 130) store.switchTab("ripa");
      if (i === 150) store.switchTab("coefficient_k"); // and back
      store.ingest(frame);
    });
    if (store.paused) store.togglePause();

    for (const [chan, sent] of sentPerChannel) {
      expect(store.appliedCount(chan)).toBe(sent.length);
      const series = store.series(chan);
      expect(series).toEqual(sent.map((f) => ({ t: f.t, v: f.v })));
    }
  });

  it("keeps null gap values as nulls, never zeros", () => {
    const store = new DashboardStore();
    store.ingest(point("k.user.a", 1, 0.5));
    store.ingest(point("k.user.a", 2, null));
    store.ingest(point("k.user.a", 3, 0.7));
    expect(store.series("k.user.a").map((p) => p.v)).toEqual([0.5, null, 0.7]);
  });

  it("drops reconnect snapshot overlap by timestamp", () => {
    const store = new DashboardStore();
    const frames = [point("k.group", 10, 1), point("k.group", 20, 2)];
    for (const f of frames) store.ingest(f);
    // reconnect: server replays its ring buffer, then continues
    for (const f of frames) store.ingest({ ...f, snapshot: true });
    store.ingest(point("k.group", 30, 3));
    expect(store.appliedCount("k.group")).toBe(3);
    expect(store.droppedCount("k.group")).toBe(2);
    expect(store.series("k.group").map((p) => p.t)).toEqual([10, 20, 30]);
  });

  it("caps each series at the server snapshot depth", () => {
    const store = new DashboardStore();
    for (let i = 0; i < SERIES_LIMIT + 50; i++) {
      store.ingest(point("ripa.user.a", i, i / 1000));
    }
    const series = store.series("ripa.user.a");
    expect(series).toHaveLength(SERIES_LIMIT);
    expect(series[0].t).toBe(50);
    expect(store.appliedCount("ripa.user.a")).toBe(SERIES_LIMIT + 50);
  });
});

describe("DashboardStore pause semantics", () => {
  it("buffers while paused and flushes in timestamp order on resume", () => {
    const store = new DashboardStore();
    store.ingest(point("k.user.a", 1, 0.1));
    store.togglePause();
    // arrive out of order across channels while paused
    store.ingest(point("k.user.b", 3, 0.3));
    store.ingest(point("k.user.a", 2, 0.2));
    expect(store.series("k.user.a")).toHaveLength(1); // frozen
    expect(store.viewState().bufferedWhilePaused).toBe(2);
    store.togglePause();
    expect(store.series("k.user.a").map((p) => p.t)).toEqual([1, 2]);
    expect(store.series("k.user.b").map((p) => p.t)).toEqual([3]);
    expect(store.viewState().bufferedWhilePaused).toBe(0);
  });

  it("pause with no incoming data leaves charts unchanged on resume", () => {
    const store = new DashboardStore();
    store.ingest(point("k.user.a", 1, 0.1));
    const before = store.series("k.user.a").slice();
    store.togglePause();
    store.togglePause();
    expect(store.series("k.user.a")).toEqual(before);
  });

  it("double press is pause then resume (toggle)", () => {
    const store = new DashboardStore();
    expect(store.togglePause().paused).toBe(true);
    expect(store.togglePause().paused).toBe(false);
  });
});

describe("DashboardStore tabs", () => {
  it("switching to the current tab is a no-op", () => {
    const store = new DashboardStore();
    let fired = 0;
    store.onChange(() => fired++);
    store.switchTab("traditional");
    expect(fired).toBe(0);
    store.switchTab("ripa");
    expect(fired).toBe(1);
    expect(store.activeTab).toBe("ripa");
  });

  it("groups channels by tab prefix", () => {
    const store = new DashboardStore();
    store.ingest(point("k.user.a", 1, 0));
    store.ingest(point("k.group", 1, 0));
    store.ingest(point("ripa.user.a", 1, 0));
    store.ingest({ chan: "trad.user.a", t: 1, v: { fixation_ms: 100 } });
    expect(store.channelsFor("coefficient_k")).toEqual(["k.group", "k.user.a"]);
    expect(store.channelsFor("ripa")).toEqual(["ripa.user.a"]);
    expect(store.channelsFor("traditional")).toEqual(["trad.user.a"]);
  });

  it("hidden tabs keep accumulating data", () => {
    const store = new DashboardStore();
    store.switchTab("coefficient_k");
    store.ingest(point("ripa.user.a", 1, 0.5)); // not on the active tab
    store.ingest(point("ripa.user.a", 2, 0.6));
    store.switchTab("ripa");
    expect(store.series("ripa.user.a")).toHaveLength(2);
  });
});
