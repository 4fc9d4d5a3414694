/** Per-job state: progress series for the bounds chart, final summary. */

import type { Client } from "./api.js";
import type { ProgressEvent_, Summary } from "./types.js";

export interface BoundsSeries {
  elapsed: number[];
  primal: (number | null)[];
  dual: (number | null)[];
}

export class JobView {
  series: BoundsSeries = { elapsed: [], primal: [], dual: [] };
  state = "queued";
  summary: Summary | null = null;
  diagram: string | null = null;

  constructor(
    public jobId: string,
    public scenarioId: string,
    private client: Client,
  ) {}

  record(event: ProgressEvent_): void {
    if (event.state) this.state = event.state;
    if (event.elapsed !== undefined) {
      this.series.elapsed.push(event.elapsed);
      this.series.primal.push(event.primal ?? null);
      this.series.dual.push(event.dual ?? null);
    }
  }

  /** Follow the event stream, then pull the verified artifacts. */
  async run(onUpdate?: () => void): Promise<void> {
    await this.client.streamEvents(this.jobId, (e) => {
      this.record(e);
      onUpdate?.();
    });
    if (this.state === "done" || this.state === "cancelled") {
      try {
        this.summary = await this.client.getSummary(this.jobId);
        this.diagram = await this.client.getDiagram(this.jobId);
      } catch {
        // a job cancelled before its first incumbent has no artifacts
        this.summary = null;
        this.diagram = null;
      }
    }
    onUpdate?.();
  }
}

/** Single display line for a finished job; every number is taken verbatim
 * from the service summary. */
export function summaryLine(s: Summary): string {
  return (
    `objective ${s.objective} · served ${s.counts.served} · ` +
    `cancelled ${s.counts.cancelled} · turns ${s.counts.turns} · ` +
    `returns ${s.counts.returns} · replacements ${s.counts.replacements}`
  );
}

/** Bounds-over-time chart as an SVG string (no client-side recomputation:
 * the series is exactly what the service streamed). */
export function renderBoundsSvg(
  series: BoundsSeries,
  width = 420,
  height = 160,
): string {
  const pad = 28;
  const points = series.elapsed.length;
  const values = [...series.primal, ...series.dual].filter(
    (v): v is number => v !== null,
  );
  if (!points || !values.length) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"></svg>`;
  }
  const tMax = Math.max(...series.elapsed, 1e-9);
  const vMin = Math.min(...values);
  const vMax = Math.max(...values);
  const span = Math.max(vMax - vMin, 1e-9);
  const sx = (t: number) => pad + (t / tMax) * (width - 2 * pad);
  const sy = (v: number) => height - pad - ((v - vMin) / span) * (height - 2 * pad);
  const path = (vals: (number | null)[]) =>
    vals
      .map((v, i) => (v === null ? null : `${sx(series.elapsed[i]).toFixed(1)},${sy(v).toFixed(1)}`))
      .filter((p): p is string => p !== null)
      .join(" ");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">` +
    `<polyline points="${path(series.dual)}" fill="none" stroke="#c23b22" stroke-width="1.5"/>` +
    `<polyline points="${path(series.primal)}" fill="none" stroke="#1b6ca8" stroke-width="1.5"/>` +
    `</svg>`
  );
}
