import { beforeEach, describe, expect, it, vi } from "vitest";

import { DashboardApp, explodeField } from "../app";
import { ServerPoint } from "../types";

class StubSocket {
  static instances: StubSocket[] = [];
  onopen: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;

  constructor(public url: string) {
    StubSocket.instances.push(this);
  }

  send(frame: ServerPoint): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }

  close(): void {
    this.onclose?.({});
  }
}

function mountApp(): { app: DashboardApp; root: HTMLElement; socket: StubSocket } {
  StubSocket.instances = [];
  vi.stubGlobal("WebSocket", StubSocket);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new DashboardApp(root);
  app.mount("duo", ["a", "b"], "ws://test");
  return { app, root, socket: StubSocket.instances[0] };
}

function feed(socket: StubSocket, n = 20, from = 0): Map<string, ServerPoint[]> {
  const sent = new Map<string, ServerPoint[]>();
  const push = (frame: ServerPoint) => {
    socket.send(frame);
    const list = sent.get(frame.chan) ?? [];
    list.push(frame);
    sent.set(frame.chan, list);
  };
  for (let i = from; i < from + n; i++) {
    const t = 3000 + 300 * i;
    push({ chan: "k.user.a", t, v: i % 6 === 2 ? null : Math.sin(i) });
    push({ chan: "k.user.b", t, v: Math.cos(i) });
    push({ chan: "k.group", t, v: i % 6 === 2 ? null : 0.05 * i });
    push({
      chan: "trad.user.a",
      t,
      v: i % 4 === 1 ? null : { fixation_ms: 200 + i, saccade_ms: 30, saccade_px: 50 },
    });
    push({ chan: "ripa.user.a", t, v: 0.9 });
  }
  return sent;
}

beforeEach(() => {
  document.body.innerHTML = "";
  vi.unstubAllGlobals();
});

describe("DashboardApp", () => {
  it("shows only the selected tab's panel", () => {
    const { app, root } = mountApp();
    const panels = [...root.querySelectorAll("section[data-tab]")] as HTMLElement[];
    expect(panels.map((p) => p.dataset.tab)).toEqual([
      "traditional",
      "coefficient_k",
      "ripa",
    ]);
    expect(panels.map((p) => p.style.display)).toEqual(["block", "none", "none"]);
    app.switchTab("coefficient_k");
    expect(panels.map((p) => p.style.display)).toEqual(["none", "block", "none"]);
  });

  it("renders every delivered point exactly once, gaps as breaks", () => {
    const { app, socket } = mountApp();
    app.switchTab("coefficient_k");
    const sent = feed(socket);
    const chart = app.chart("k")!;

    for (const user of ["a", "b"]) {
      const frames = sent.get(`k.user.${user}`)!;
      const nonNull = frames.filter((f) => f.v !== null).length;
      const path = chart.svg.querySelector(`path[data-series="${user}"]`)!;
      const d = path.getAttribute("d")!;
      const vertices = (d.match(/[ML] /g) ?? []).length;
      const dots = chart.svg.querySelectorAll(`circle[data-series="${user}"]`).length;
      expect(vertices + dots).toBe(nonNull);
      expect(app.store.appliedCount(`k.user.${user}`)).toBe(frames.length);
    }
    // the group series renders dashed for visual separation
    const group = chart.svg.querySelector('path[data-series="group"]')!;
    expect(group.getAttribute("stroke-dasharray")).not.toBeNull();
  });

  it("points received while hidden appear after switching back", () => {
    const { app, socket } = mountApp();
    app.switchTab("ripa"); // k charts hidden
    feed(socket, 10);
    app.switchTab("coefficient_k");
    const chart = app.chart("k")!;
    const d = chart.svg.querySelector('path[data-series="b"]')!.getAttribute("d")!;
    expect((d.match(/[ML] /g) ?? []).length).toBe(10);
  });

  it("pause buffers points and resume flushes them without loss", () => {
    const { app, root, socket } = mountApp();
    app.switchTab("coefficient_k");
    const pause = root.querySelector('button[data-role="pause"]') as HTMLButtonElement;
    feed(socket, 5);
    pause.click();
    expect(pause.textContent).toBe("Play");
    const hidden = feed(socket, 8, 5);
    expect(app.store.appliedCount("k.group")).toBe(5);
    pause.click();
    expect(pause.textContent).toBe("Pause");
    expect(app.store.appliedCount("k.group")).toBe(5 + hidden.get("k.group")!.length);
  });

  it("explodes traditional dict values into per-field series with gaps", () => {
    const points = [
      { t: 1, v: { fixation_ms: 200, saccade_px: 40 } },
      { t: 2, v: null },
      { t: 3, v: { saccade_px: 50 } },
    ];
    expect(explodeField(points, "fixation_ms")).toEqual([
      { t: 1, v: 200 },
      { t: 2, v: null },
      { t: 3, v: null },
    ]);
    expect(explodeField(points, "saccade_px")).toEqual([
      { t: 1, v: 40 },
      { t: 2, v: null },
      { t: 3, v: 50 },
    ]);
  });

  it("zoom and reset act on the target chart only", () => {
    const { app, socket } = mountApp();
    feed(socket, 12);
    app.switchTab("coefficient_k");
    const kChart = app.chart("k")!;
    const ripaChart = app.chart("ripa")!;
    const ripaBefore = ripaChart.viewport();
    const auto = kChart.autoViewport();
    kChart.boxZoom(80, 40, 260, 150);
    expect(kChart.isZoomed()).toBe(true);
    expect(ripaChart.isZoomed()).toBe(false);
    expect(ripaChart.viewport()).toEqual(ripaBefore);
    kChart.reset();
    expect(kChart.viewport()).toEqual(auto);
  });
});
