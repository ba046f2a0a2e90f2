import { ServerPoint } from "./types";

type WebSocketLike = {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
};

export interface StreamOptions {
  url: string;
  onPoint: (point: ServerPoint) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
  /** Injectable for tests; defaults to the browser WebSocket. */
  webSocketFactory?: (url: string) => WebSocketLike;
  reconnectDelayMs?: number;
}

/** Streaming connection with automatic reconnect.
 *
 *  On every (re)connect the server replays its snapshot ring buffer before
 *  the live tail; the store deduplicates by timestamp, so a reconnect can
 *  never double-count or lose points on our side.
 */
export class SessionStream {
  private options: StreamOptions;
  private ws: WebSocketLike | null = null;
  private closedByUser = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(options: StreamOptions) {
    this.options = options;
  }

  connect(): void {
    this.closedByUser = false;
    this.open();
  }

  private open(): void {
    const factory =
      this.options.webSocketFactory ??
      ((url: string) => new WebSocket(url) as unknown as WebSocketLike);
    this.options.onStatus?.("connecting");
    const ws = factory(this.options.url);
    this.ws = ws;
    ws.onopen = () => this.options.onStatus?.("open");
    ws.onmessage = (event) => {
      let point: ServerPoint;
      try {
        point = JSON.parse(String(event.data));
      } catch {
        console.warn("dropping undecodable frame", event.data);
        return;
      }
      if (typeof point?.chan !== "string" || typeof point?.t !== "number") {
        console.warn("dropping malformed frame", point);
        return;
      }
      this.options.onPoint(point);
    };
    ws.onerror = () => undefined; // close handler owns reconnection
    ws.onclose = () => {
      this.options.onStatus?.("closed");
      if (this.closedByUser) return;
      const delay = this.options.reconnectDelayMs ?? 1000;
      this.reconnectTimer = setTimeout(() => this.open(), delay);
    };
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.ws?.close();
  }
}
