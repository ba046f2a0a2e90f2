import { ServerPoint, TabId, TABS, tabForChannel } from "./types";

/** Rolling window kept per series; matches the server's snapshot depth so a
 *  reconnect can always rebuild exactly what we would have kept anyway. */
export const SERIES_LIMIT = 200;

export interface StoredPoint {
  t: number;
  v: number | Record<string, number> | null;
}

interface ChannelState {
  points: StoredPoint[];
  lastT: number;
  applied: number; // total points accepted into the series
  dropped: number; // stale/duplicate frames (reconnect snapshot overlap)
}

export interface ViewState {
  activeTab: TabId;
  paused: boolean;
  bufferedWhilePaused: number;
}

type Listener = (state: ViewState) => void;

/** Client-side state: per-channel rolling series, pause buffering, tabs.
 *
 *  Pausing is local to this client: incoming points queue up and charts
 *  freeze; resuming flushes the queue in timestamp order with zero loss.
 *  Tab switches never unsubscribe anything, so hidden views keep filling.
 */
export class DashboardStore {
  private channels = new Map<string, ChannelState>();
  private pending: ServerPoint[] = [];
  private listeners: Listener[] = [];
  activeTab: TabId = "traditional";
  paused = false;

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    const state = this.viewState();
    for (const fn of this.listeners) fn(state);
  }

  viewState(): ViewState {
    return {
      activeTab: this.activeTab,
      paused: this.paused,
      bufferedWhilePaused: this.pending.length,
    };
  }

  ingest(point: ServerPoint): void {
    if (this.paused) {
      this.pending.push(point);
      this.notify();
      return;
    }
    this.apply(point);
    this.notify();
  }

  private apply(point: ServerPoint): void {
    let state = this.channels.get(point.chan);
    if (!state) {
      state = { points: [], lastT: -Infinity, applied: 0, dropped: 0 };
      this.channels.set(point.chan, state);
    }
    if (point.t <= state.lastT) {
      state.dropped += 1; // replayed frame from a reconnect snapshot
      return;
    }
    state.points.push({ t: point.t, v: point.v });
    state.lastT = point.t;
    state.applied += 1;
    if (state.points.length > SERIES_LIMIT) {
      state.points.splice(0, state.points.length - SERIES_LIMIT);
    }
  }

  /** Toggle semantics: first press pauses, the next resumes. */
  togglePause(): ViewState {
    if (!this.paused) {
      this.paused = true;
      this.notify();
      return this.viewState();
    }
    this.paused = false;
    // stable sort keeps per-channel arrival order for equal timestamps
    const queued = this.pending.slice().sort((a, b) => a.t - b.t);
    this.pending = [];
    for (const point of queued) this.apply(point);
    this.notify();
    return this.viewState();
  }

  switchTab(tab: TabId): ViewState {
    if (tab !== this.activeTab) {
      this.activeTab = tab;
      this.notify();
    }
    return this.viewState();
  }

  channelsFor(tab: TabId): string[] {
    const prefix = TABS.find((entry) => entry.id === tab)?.prefix ?? "";
    return [...this.channels.keys()].filter((c) => c.startsWith(prefix)).sort();
  }

  series(chan: string): StoredPoint[] {
    return this.channels.get(chan)?.points ?? [];
  }

  appliedCount(chan: string): number {
    return this.channels.get(chan)?.applied ?? 0;
  }

  droppedCount(chan: string): number {
    return this.channels.get(chan)?.dropped ?? 0;
  }

  knownChannels(): string[] {
    return [...this.channels.keys()].sort();
  }

  /** Channels of the active tab that changed would need a redraw; the app
   *  simply redraws the active tab, so expose the tab of a channel. */
  tabOf(chan: string): TabId | null {
    return tabForChannel(chan);
  }
}
