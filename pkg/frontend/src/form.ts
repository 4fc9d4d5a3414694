/** The what-if form: a disruption plus the tunable dispatching knobs.
 *
 * The form mirrors the service override surface exactly, so a round trip
 * form -> overrides -> form is lossless.
 */

import type { Overrides, ScenarioDoc } from "./types.js";

export interface FormState {
  blockFrom: string;
  blockTo: string;
  blockStart: number;
  blockEnd: number;
  maxDelay: number;
  turnStations: string[];
  weightUp: number;
  weightDown: number;
  turnPenalty: number;
  returnPenalty: number;
}

export type FormErrors = Partial<Record<keyof FormState, string>>;

export function defaultForm(doc: ScenarioDoc): FormState {
  const policy = doc.policy;
  const disruption = doc.disruption;
  const stations = doc.topology.stations;
  const dirWeights = policy.direction_weights ?? {};
  const base = policy.default_weight ?? 1.0;
  return {
    blockFrom: disruption?.from ?? stations[0],
    blockTo: disruption?.to ?? stations[Math.min(1, stations.length - 1)],
    blockStart: disruption?.interval[0] ?? 0,
    blockEnd: disruption?.interval[1] ?? 0,
    maxDelay: policy.max_delay,
    turnStations: [...(policy.turn_stations ?? [])],
    weightUp: dirWeights["up"] ?? base,
    weightDown: dirWeights["down"] ?? base,
    turnPenalty: policy.turn_penalty ?? 0,
    returnPenalty: policy.return_penalty ?? 0,
  };
}

/** Client-side mirror of the schema checks the service applies. */
export function validateForm(form: FormState, doc: ScenarioDoc): FormErrors {
  const errors: FormErrors = {};
  const stations = doc.topology.stations;
  const switches = new Set(doc.topology.switches ?? []);
  const cycle = (doc.timetable as { cycle_time?: number }).cycle_time
    ?? (doc.timetable as { generate?: { cycle_time: number } }).generate?.cycle_time;
  if (!stations.includes(form.blockFrom)) {
    errors.blockFrom = `unknown station ${form.blockFrom}`;
  }
  if (!stations.includes(form.blockTo)) {
    errors.blockTo = `unknown station ${form.blockTo}`;
  } else if (form.blockFrom === form.blockTo) {
    errors.blockTo = "blocked section is empty";
  }
  if (!Number.isInteger(form.blockStart) || form.blockStart < 0) {
    errors.blockStart = "start must be a nonnegative integer";
  }
  if (!Number.isInteger(form.blockEnd) || form.blockEnd <= form.blockStart) {
    errors.blockEnd = "end must be after start";
  }
  if (!Number.isInteger(form.maxDelay) || form.maxDelay < 0) {
    errors.maxDelay = "max delay must be a nonnegative integer";
  } else if (cycle !== undefined && form.maxDelay > cycle) {
    errors.maxDelay = `max delay exceeds the cycle time (${cycle})`;
  }
  for (const st of form.turnStations) {
    if (!switches.has(st)) {
      errors.turnStations = `${st} is not a switch station`;
      break;
    }
  }
  if (form.weightUp < 0) errors.weightUp = "weights must be nonnegative";
  if (form.weightDown < 0) errors.weightDown = "weights must be nonnegative";
  if (form.turnPenalty < 0) errors.turnPenalty = "penalty must be nonnegative";
  if (form.returnPenalty < 0) errors.returnPenalty = "penalty must be nonnegative";
  return errors;
}

export function toOverrides(form: FormState): Overrides {
  return {
    blockage_interval: [form.blockStart, form.blockEnd],
    max_delay: form.maxDelay,
    turn_stations: [...form.turnStations],
    direction_weights: { up: form.weightUp, down: form.weightDown },
    turn_penalty: form.turnPenalty,
    return_penalty: form.returnPenalty,
  };
}

export function fromOverrides(overrides: Overrides, doc: ScenarioDoc): FormState {
  const base = defaultForm(doc);
  return {
    ...base,
    blockStart: overrides.blockage_interval?.[0] ?? base.blockStart,
    blockEnd: overrides.blockage_interval?.[1] ?? base.blockEnd,
    maxDelay: overrides.max_delay ?? base.maxDelay,
    turnStations: overrides.turn_stations
      ? [...overrides.turn_stations]
      : base.turnStations,
    weightUp: overrides.direction_weights?.["up"] ?? base.weightUp,
    weightDown: overrides.direction_weights?.["down"] ?? base.weightDown,
    turnPenalty: overrides.turn_penalty ?? base.turnPenalty,
    returnPenalty: overrides.return_penalty ?? base.returnPenalty,
  };
}

/** Station pair picked on the line strip, normalized to line order. */
export function pickSection(
  doc: ScenarioDoc,
  first: string,
  second: string,
): { from: string; to: string } {
  const order = doc.topology.stations;
  const [a, b] = [first, second].sort(
    (x, y) => order.indexOf(x) - order.indexOf(y),
  );
  return { from: a, to: b };
}
