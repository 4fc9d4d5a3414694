/** Wire formats of the railrecover service. */

export interface ScenarioDoc {
  version: number;
  name?: string;
  topology: {
    stations: string[];
    drive_times: Record<string, number>;
    switches?: string[];
    depots?: { id: string; station: string; replacement_capacity: number; min_idle: number }[];
  };
  timetable: Record<string, unknown>;
  disruption?: {
    from: string;
    to: string;
    directions: string[];
    interval: [number, number];
  };
  policy: {
    max_delay: number;
    recovery_horizon: number;
    safety_margin: number;
    turn_stations?: string[];
    default_weight?: number;
    direction_weights?: Record<string, number>;
    turn_penalty?: number;
    return_penalty?: number;
    [key: string]: unknown;
  };
  solver?: Record<string, unknown>;
}

export interface Overrides {
  trip_weights?: Record<string, number>;
  direction_weights?: Record<string, number>;
  default_weight?: number;
  turn_penalty?: number;
  return_penalty?: number;
  max_delay?: number;
  turn_stations?: string[];
  blockage_interval?: [number, number];
}

export interface SolveRequest {
  params?: { time_limit?: number; gap?: number; seed?: number; node_selection?: string };
  overrides?: Overrides;
  extended_objective?: boolean;
}

export interface JobInfo {
  id: string;
  scenario: string;
  state: "queued" | "running" | "done" | "failed" | "cancelled";
  error: string | null;
  progress: ProgressEvent_;
}

export interface ProgressEvent_ {
  state?: string;
  nodes?: number;
  primal?: number | null;
  dual?: number | null;
  gap?: number | null;
  elapsed?: number;
}

export interface TripAssignment {
  trip: string;
  scheduled_train: string;
  train: string | null;
  served: boolean;
  dep: number | null;
  arr: number | null;
  scheduled_dep: number;
  scheduled_arr: number;
}

export interface Summary {
  objective: number;
  ok: boolean;
  counts: {
    served: number;
    cancelled: number;
    turns: number;
    returns: number;
    replacements: number;
  };
  cancelled: string[];
  early_turns: string[];
  early_returns: string[];
  replacements_used: Record<string, number>;
  trips: TripAssignment[];
  bounds: {
    primal: number | null;
    dual: number | null;
    gap: number | null;
    nodes: number;
    wall_time: number;
  };
  scenario_name: string;
}
