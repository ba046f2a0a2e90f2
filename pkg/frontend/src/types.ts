/** Wire types for the session feed (must match the server exactly). */

/** One measure frame: `{"chan": string, "t": number, "v": number|object|null}`.
 *  Frames replayed from the server-side ring buffer carry `snapshot: true`.
 *  A null value marks a data-gap window and renders as a line break. */
export interface ServerPoint {
  chan: string;
  t: number;
  v: number | Record<string, number> | null;
  snapshot?: boolean;
}

export interface SessionInfo {
  id: string;
  users: string[];
  finished: boolean;
  samples: number;
}

export type TabId = "traditional" | "coefficient_k" | "ripa";

export const TABS: { id: TabId; label: string; prefix: string }[] = [
  { id: "traditional", label: "Traditional", prefix: "trad." },
  { id: "coefficient_k", label: "Coefficient K", prefix: "k." },
  { id: "ripa", label: "RIPA", prefix: "ripa." },
];

export function tabForChannel(chan: string): TabId | null {
  for (const tab of TABS) {
    if (chan.startsWith(tab.prefix)) return tab.id;
  }
  return null;
}

export function wsUrl(sessionId: string, base?: string): string {
  if (base) return `${base}/ws/sessions/${sessionId}`;
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws/sessions/${sessionId}`;
}
