/** Hover layer over the service-rendered time-space diagram.
 *
 * The SVG itself is the service's single rendering source of truth; the
 * console only attaches per-trip hover details and overlay toggles on top.
 */

import type { Summary, TripAssignment } from "./types.js";

export interface HoverDetail {
  trip: string;
  train: string | null;
  served: boolean;
  delay: number | null;
  text: string;
}

export interface OverlayToggles {
  blockage: boolean;
  turns: boolean;
  replacements: boolean;
}

export function defaultToggles(): OverlayToggles {
  return { blockage: true, turns: true, replacements: true };
}

export function hoverDetail(t: TripAssignment): HoverDetail {
  const delay = t.served && t.dep !== null ? t.dep - t.scheduled_dep : null;
  const text = t.served
    ? `${t.trip}: ${t.train} dep ${t.dep}s (${delay! >= 0 ? "+" : ""}${delay}s)`
    : `${t.trip}: cancelled`;
  return { trip: t.trip, train: t.train, served: t.served, delay, text };
}

export function hoverLayer(summary: Summary): Map<string, HoverDetail> {
  return new Map(summary.trips.map((t) => [t.trip, hoverDetail(t)]));
}

/** Overlay annotations derived from the summary, filtered by the toggles. */
export function overlayMarks(
  summary: Summary,
  toggles: OverlayToggles,
): { kind: "turn" | "return" | "replacement"; id: string }[] {
  const marks: { kind: "turn" | "return" | "replacement"; id: string }[] = [];
  if (toggles.turns) {
    for (const id of summary.early_turns) marks.push({ kind: "turn", id });
    for (const id of summary.early_returns) marks.push({ kind: "return", id });
  }
  if (toggles.replacements) {
    for (const depot of Object.keys(summary.replacements_used).sort()) {
      marks.push({ kind: "replacement", id: depot });
    }
  }
  return marks;
}
