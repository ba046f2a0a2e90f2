import { LineChart } from "./chart";
import { DashboardStore, StoredPoint } from "./store";
import { SessionStream } from "./stream";
import { SessionInfo, TABS, TabId, wsUrl } from "./types";

const TRAD_FIELDS: { key: string; title: string }[] = [
  { key: "fixation_ms", title: "Mean fixation duration (ms)" },
  { key: "saccade_ms", title: "Mean saccade duration (ms)" },
  { key: "saccade_px", title: "Mean saccade amplitude (px)" },
];

/** Proctor dashboard: tabbed measure views over one session stream.
 *
 *  All channels keep filling the store regardless of the visible tab, so
 *  switching back shows everything that arrived while hidden.  Pause is
 *  client-local: it freezes and buffers this view only.
 */
export class DashboardApp {
  readonly store = new DashboardStore();
  private charts = new Map<string, LineChart>();
  private tabPanels = new Map<TabId, HTMLElement>();
  private stream: SessionStream | null = null;
  private root: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.store.onChange(() => this.renderActiveTab());
  }

  mount(sessionId: string, users: string[], wsBase?: string): void {
    this.root.innerHTML = "";
    this.root.appendChild(this.buildToolbar(sessionId));
    const panels = document.createElement("div");
    panels.className = "panels";
    this.root.appendChild(panels);

    for (const tab of TABS) {
      const panel = document.createElement("section");
      panel.dataset.tab = tab.id;
      panel.style.display = tab.id === this.store.activeTab ? "block" : "none";
      panels.appendChild(panel);
      this.tabPanels.set(tab.id, panel);
    }

    for (const field of TRAD_FIELDS) {
      this.addChart("traditional", `trad:${field.key}`, field.title);
    }
    this.addChart("coefficient_k", "k", "Ambient/focal coefficient (per user + group)");
    this.addChart("ripa", "ripa", "Pupillary activity index (per user + group)");
    void users;

    this.stream = new SessionStream({
      url: wsUrl(sessionId, wsBase),
      onPoint: (point) => this.store.ingest(point),
    });
    this.stream.connect();
    this.renderActiveTab();
  }

  private buildToolbar(sessionId: string): HTMLElement {
    const bar = document.createElement("header");
    bar.className = "toolbar";

    const title = document.createElement("span");
    title.className = "session-name";
    title.textContent = `session: ${sessionId}`;
    bar.appendChild(title);

    for (const tab of TABS) {
      const button = document.createElement("button");
      button.textContent = tab.label;
      button.dataset.tabButton = tab.id;
      button.addEventListener("click", () => this.switchTab(tab.id));
      bar.appendChild(button);
    }

    const pause = document.createElement("button");
    pause.textContent = "Pause";
    pause.dataset.role = "pause";
    pause.addEventListener("click", () => {
      const state = this.store.togglePause();
      pause.textContent = state.paused ? "Play" : "Pause";
    });
    bar.appendChild(pause);
    return bar;
  }

  switchTab(tab: TabId): void {
    this.store.switchTab(tab);
    for (const [id, panel] of this.tabPanels) {
      panel.style.display = id === tab ? "block" : "none";
    }
    this.renderActiveTab();
  }

  private addChart(tab: TabId, key: string, title: string): void {
    const panel = this.tabPanels.get(tab);
    if (!panel) return;
    const holder = document.createElement("div");
    holder.className = "chart-holder";
    panel.appendChild(holder);
    const chart = new LineChart(holder, { title });
    this.charts.set(key, chart);
    holder.appendChild(this.buildChartControls(chart, title));
    this.wireZoomGestures(chart);
  }

  private buildChartControls(chart: LineChart, title: string): HTMLElement {
    const controls = document.createElement("div");
    controls.className = "chart-controls";
    const save = document.createElement("button");
    save.textContent = "Save";
    save.addEventListener("click", () => {
      void chart.savePng(`${title.replace(/\W+/g, "_")}.png`).catch((err) => {
        console.warn("png export failed", err);
      });
    });
    const reset = document.createElement("button");
    reset.textContent = "Reset";
    reset.addEventListener("click", () => chart.reset());
    controls.appendChild(save);
    controls.appendChild(reset);
    return controls;
  }

  private wireZoomGestures(chart: LineChart): void {
    let dragStart: { x: number; y: number } | null = null;
    chart.svg.addEventListener("mousedown", (ev) => {
      dragStart = { x: ev.offsetX, y: ev.offsetY };
    });
    chart.svg.addEventListener("mouseup", (ev) => {
      if (!dragStart) return;
      const dx = Math.abs(ev.offsetX - dragStart.x);
      const dy = Math.abs(ev.offsetY - dragStart.y);
      if (dx > 8 && dy > 8) {
        chart.boxZoom(dragStart.x, dragStart.y, ev.offsetX, ev.offsetY);
      }
      dragStart = null;
    });
    chart.svg.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY > 0 ? 1.25 : 0.8;
      chart.wheelZoom(factor, ev.offsetX, ev.offsetY);
    });
  }

  /** Redraw the visible tab's charts from the store. */
  renderActiveTab(): void {
    const tab = this.store.activeTab;
    if (tab === "traditional") {
      for (const field of TRAD_FIELDS) {
        const chart = this.charts.get(`trad:${field.key}`);
        if (!chart) continue;
        for (const chan of this.store.channelsFor("traditional")) {
          const user = chan.split(".").pop() ?? chan;
          chart.setSeries(user, explodeField(this.store.series(chan), field.key));
        }
        chart.render();
      }
      return;
    }
    const key = tab === "coefficient_k" ? "k" : "ripa";
    const chart = this.charts.get(key);
    if (!chart) return;
    for (const chan of this.store.channelsFor(tab)) {
      const label = chan.endsWith(".group") ? "group" : chan.split(".").pop() ?? chan;
      chart.setSeries(label, this.store.series(chan), {
        dashed: chan.endsWith(".group"),
      });
    }
    chart.render();
  }

  chart(key: string): LineChart | undefined {
    return this.charts.get(key);
  }

  disconnect(): void {
    this.stream?.close();
  }
}

/** Pull one numeric field out of a traditional-measures dict series. */
export function explodeField(points: StoredPoint[], key: string): StoredPoint[] {
  return points.map((p) => {
    if (p.v === null || typeof p.v === "number") return { t: p.t, v: null };
    const value = p.v[key];
    return { t: p.t, v: typeof value === "number" ? value : null };
  });
}

export async function bootstrap(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(location.search);
  const wanted = params.get("session");
  const response = await fetch("/sessions");
  const sessions: SessionInfo[] = await response.json();
  const chosen = wanted
    ? sessions.find((s) => s.id === wanted)
    : sessions[0];
  if (!chosen) {
    root.textContent = wanted
      ? `unknown session ${wanted}`
      : "no sessions registered";
    return;
  }
  const app = new DashboardApp(root);
  app.mount(chosen.id, chosen.users);
}
