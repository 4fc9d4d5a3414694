/** Side-by-side comparison of two solved jobs. */

import type { Summary, TripAssignment } from "./types.js";

export interface TripDiff {
  trip: string;
  a: TripAssignment | null;
  b: TripAssignment | null;
  reason: "train" | "time" | "served" | "missing";
}

/** Trips whose (train, time) assignment differs between the two runs. */
export function diffTrips(a: TripAssignment[], b: TripAssignment[]): TripDiff[] {
  const byTripB = new Map(b.map((t) => [t.trip, t]));
  const diffs: TripDiff[] = [];
  for (const ta of a) {
    const tb = byTripB.get(ta.trip);
    if (!tb) {
      diffs.push({ trip: ta.trip, a: ta, b: null, reason: "missing" });
      continue;
    }
    byTripB.delete(ta.trip);
    if (ta.served !== tb.served) {
      diffs.push({ trip: ta.trip, a: ta, b: tb, reason: "served" });
    } else if (ta.train !== tb.train) {
      diffs.push({ trip: ta.trip, a: ta, b: tb, reason: "train" });
    } else if (ta.dep !== tb.dep || ta.arr !== tb.arr) {
      diffs.push({ trip: ta.trip, a: ta, b: tb, reason: "time" });
    }
  }
  for (const tb of byTripB.values()) {
    diffs.push({ trip: tb.trip, a: null, b: tb, reason: "missing" });
  }
  diffs.sort((x, y) => (x.trip < y.trip ? -1 : x.trip > y.trip ? 1 : 0));
  return diffs;
}

export interface Comparison {
  diffs: TripDiff[];
  highlighted: Set<string>;
  timeAxis: { min: number; max: number };
  scenarioMismatch: boolean;
}

/** Aligned comparison; a scenario mismatch yields a warning, not a failure. */
export function compare(
  a: Summary,
  b: Summary,
  scenarioA: string,
  scenarioB: string,
): Comparison {
  const diffs = diffTrips(a.trips, b.trips);
  const times: number[] = [];
  for (const t of [...a.trips, ...b.trips]) {
    times.push(t.scheduled_dep, t.scheduled_arr);
    if (t.dep !== null) times.push(t.dep);
    if (t.arr !== null) times.push(t.arr);
  }
  return {
    diffs,
    highlighted: new Set(diffs.map((d) => d.trip)),
    timeAxis: {
      min: times.length ? Math.min(...times) : 0,
      max: times.length ? Math.max(...times) : 0,
    },
    scenarioMismatch: scenarioA !== scenarioB,
  };
}
