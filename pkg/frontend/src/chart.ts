import { StoredPoint } from "./store";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Viewport {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
}

interface SeriesEntry {
  points: StoredPoint[];
  color: string;
  dashed: boolean;
}

const PALETTE = ["#2c7fb8", "#d95f02", "#7570b3", "#1b9e77", "#e7298a", "#66a61e"];
const MARGIN = { left: 46, right: 10, top: 22, bottom: 20 };

function almostEqual(a: number, b: number): boolean {
  return Math.abs(a - b) <= 1e-9 * Math.max(1, Math.abs(a), Math.abs(b));
}

export function viewportsEqual(a: Viewport, b: Viewport): boolean {
  return (
    almostEqual(a.x0, b.x0) &&
    almostEqual(a.x1, b.x1) &&
    almostEqual(a.y0, b.y0) &&
    almostEqual(a.y1, b.y1)
  );
}

/** SVG line chart with per-chart zoom state.
 *
 *  Null values break the line into separate segments (a gap, never a zero).
 *  Box zoom and wheel zoom switch the chart to a manual viewport; reset
 *  returns to the auto-scaling viewport computed from the data.  Zooming
 *  one chart never affects another: viewport state lives on the instance.
 */
export class LineChart {
  readonly svg: SVGSVGElement;
  readonly width: number;
  readonly height: number;
  private title: string;
  private series = new Map<string, SeriesEntry>();
  private manual: Viewport | null = null;

  constructor(container: HTMLElement, options: ChartOptions = {}) {
    this.width = options.width ?? 560;
    this.height = options.height ?? 240;
    this.title = options.title ?? "";
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("width", String(this.width));
    this.svg.setAttribute("height", String(this.height));
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.setAttribute("class", "measure-chart");
    container.appendChild(this.svg);
  }

  setSeries(label: string, points: StoredPoint[], opts: { dashed?: boolean } = {}): void {
    const existing = this.series.get(label);
    const color = existing?.color ?? PALETTE[this.series.size % PALETTE.length];
    this.series.set(label, {
      points,
      color,
      dashed: opts.dashed ?? existing?.dashed ?? false,
    });
  }

  clearSeries(): void {
    this.series.clear();
  }

  /** Viewport derived from the data alone (5% padding, sane fallbacks). */
  autoViewport(): Viewport {
    let xMin = Infinity;
    let xMax = -Infinity;
    let yMin = Infinity;
    let yMax = -Infinity;
    for (const entry of this.series.values()) {
      for (const p of entry.points) {
        if (p.v === null || typeof p.v !== "number" || !Number.isFinite(p.v)) continue;
        xMin = Math.min(xMin, p.t);
        xMax = Math.max(xMax, p.t);
        yMin = Math.min(yMin, p.v);
        yMax = Math.max(yMax, p.v);
      }
    }
    if (xMin > xMax) return { x0: 0, x1: 1, y0: 0, y1: 1 };
    if (xMin === xMax) {
      xMin -= 0.5;
      xMax += 0.5;
    }
    if (yMin === yMax) {
      yMin -= 0.5;
      yMax += 0.5;
    }
    const padX = (xMax - xMin) * 0.05;
    const padY = (yMax - yMin) * 0.05;
    return { x0: xMin - padX, x1: xMax + padX, y0: yMin - padY, y1: yMax + padY };
  }

  viewport(): Viewport {
    return this.manual ?? this.autoViewport();
  }

  isZoomed(): boolean {
    return this.manual !== null;
  }

  /** Pixel-space selection rectangle -> manual data viewport. */
  boxZoom(px0: number, py0: number, px1: number, py1: number): Viewport {
    const vp = this.viewport();
    const [ax, bx] = px0 <= px1 ? [px0, px1] : [px1, px0];
    const [ay, by] = py0 <= py1 ? [py0, py1] : [py1, py0];
    const x0 = this.pxToX(ax, vp);
    const x1 = this.pxToX(bx, vp);
    const y1 = this.pxToY(ay, vp); // pixel y grows downward
    const y0 = this.pxToY(by, vp);
    if (x1 - x0 <= 0 || y1 - y0 <= 0) return vp;
    this.manual = { x0, x1, y0, y1 };
    this.render();
    return this.manual;
  }

  /** Scale the viewport span by `factor` about the point under the cursor. */
  wheelZoom(factor: number, px: number, py: number): Viewport {
    if (factor <= 0) return this.viewport();
    const vp = this.viewport();
    const cx = this.pxToX(px, vp);
    const cy = this.pxToY(py, vp);
    this.manual = {
      x0: cx - (cx - vp.x0) * factor,
      x1: cx + (vp.x1 - cx) * factor,
      y0: cy - (cy - vp.y0) * factor,
      y1: cy + (vp.y1 - cy) * factor,
    };
    this.render();
    return this.manual;
  }

  /** Back to the auto-scaling viewport. */
  reset(): Viewport {
    this.manual = null;
    this.render();
    return this.viewport();
  }

  private xToPx(x: number, vp: Viewport): number {
    const plotW = this.width - MARGIN.left - MARGIN.right;
    return MARGIN.left + ((x - vp.x0) / (vp.x1 - vp.x0)) * plotW;
  }

  private yToPx(y: number, vp: Viewport): number {
    const plotH = this.height - MARGIN.top - MARGIN.bottom;
    return MARGIN.top + (1 - (y - vp.y0) / (vp.y1 - vp.y0)) * plotH;
  }

  private pxToX(px: number, vp: Viewport): number {
    const plotW = this.width - MARGIN.left - MARGIN.right;
    return vp.x0 + ((px - MARGIN.left) / plotW) * (vp.x1 - vp.x0);
  }

  private pxToY(py: number, vp: Viewport): number {
    const plotH = this.height - MARGIN.top - MARGIN.bottom;
    return vp.y0 + (1 - (py - MARGIN.top) / plotH) * (vp.y1 - vp.y0);
  }

  render(): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    const vp = this.viewport();

    const frame = document.createElementNS(SVG_NS, "rect");
    frame.setAttribute("x", String(MARGIN.left));
    frame.setAttribute("y", String(MARGIN.top));
    frame.setAttribute("width", String(this.width - MARGIN.left - MARGIN.right));
    frame.setAttribute("height", String(this.height - MARGIN.top - MARGIN.bottom));
    frame.setAttribute("fill", "none");
    frame.setAttribute("stroke", "#999");
    this.svg.appendChild(frame);

    if (this.title) {
      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", String(MARGIN.left));
      text.setAttribute("y", "14");
      text.setAttribute("class", "chart-title");
      text.setAttribute("font-size", "12");
      text.textContent = this.title;
      this.svg.appendChild(text);
    }

    for (const frac of [0, 0.5, 1]) {
      const yVal = vp.y0 + frac * (vp.y1 - vp.y0);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", "2");
      label.setAttribute("y", String(this.yToPx(yVal, vp) + 4));
      label.setAttribute("font-size", "10");
      label.setAttribute("class", "tick-label");
      label.textContent = formatTick(yVal);
      this.svg.appendChild(label);
    }

    for (const [label, entry] of this.series) {
      const runs: StoredPoint[][] = [];
      let current: StoredPoint[] = [];
      for (const p of entry.points) {
        if (p.v === null || typeof p.v !== "number" || !Number.isFinite(p.v)) {
          if (current.length > 0) runs.push(current);
          current = [];
          continue;
        }
        current.push(p);
      }
      if (current.length > 0) runs.push(current);

      const segments: string[] = [];
      let lonePoints = 0;
      for (const run of runs) {
        if (run.length === 1) {
          // an isolated value between gaps still deserves a visible mark
          const dot = document.createElementNS(SVG_NS, "circle");
          dot.setAttribute("cx", this.xToPx(run[0].t, vp).toFixed(2));
          dot.setAttribute("cy", this.yToPx(run[0].v as number, vp).toFixed(2));
          dot.setAttribute("r", "2");
          dot.setAttribute("fill", entry.color);
          dot.setAttribute("data-series", label);
          this.svg.appendChild(dot);
          lonePoints += 1;
          continue;
        }
        segments.push(
          run
            .map((p, i) => {
              const px = this.xToPx(p.t, vp).toFixed(2);
              const py = this.yToPx(p.v as number, vp).toFixed(2);
              return i === 0 ? `M ${px} ${py}` : `L ${px} ${py}`;
            })
            .join(" ")
        );
      }

      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", segments.join(" "));
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", entry.color);
      path.setAttribute("stroke-width", entry.dashed ? "2.5" : "1.5");
      if (entry.dashed) path.setAttribute("stroke-dasharray", "6 3");
      path.setAttribute("data-series", label);
      path.setAttribute("data-segments", String(segments.length));
      path.setAttribute("data-lone-points", String(lonePoints));
      this.svg.appendChild(path);
    }
  }

  /** Number of disconnected line segments currently drawn for a series. */
  segmentsFor(label: string): number {
    const path = this.svg.querySelector(`path[data-series="${cssEscape(label)}"]`);
    if (!path) return 0;
    return Number(path.getAttribute("data-segments") ?? 0);
  }

  toSvgString(): string {
    return new XMLSerializer().serializeToString(this.svg);
  }

  /** Rasterize the current SVG to a PNG data URL (browser only). */
  async toPngDataUrl(): Promise<string> {
    const blob = new Blob([this.toSvgString()], { type: "image/svg+xml" });
    const url = URL.createObjectURL(blob);
    try {
      const image = new Image(this.width, this.height);
      await new Promise<void>((resolve, reject) => {
        image.onload = () => resolve();
        image.onerror = () => reject(new Error("svg rasterization failed"));
        image.src = url;
      });
      const canvas = document.createElement("canvas");
      canvas.width = this.width;
      canvas.height = this.height;
      const ctx = canvas.getContext("2d");
      if (!ctx) throw new Error("no 2d canvas context");
      ctx.fillStyle = "#ffffff";
      ctx.fillRect(0, 0, this.width, this.height);
      ctx.drawImage(image, 0, 0);
      return canvas.toDataURL("image/png");
    } finally {
      URL.revokeObjectURL(url);
    }
  }

  async savePng(filename = "chart.png"): Promise<void> {
    const dataUrl = await this.toPngDataUrl();
    const anchor = document.createElement("a");
    anchor.href = dataUrl;
    anchor.download = filename;
    anchor.click();
  }
}

function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1000) return value.toFixed(0);
  if (magnitude >= 1) return value.toFixed(1);
  return value.toPrecision(2);
}

function cssEscape(value: string): string {
  return value.replace(/"/g, '\\"');
}
