/** View-side session state: chart series assembly and what-if form handling.
 *
 * Series are built by *selecting* values out of service payloads — points are
 * (time, value) pairs copied verbatim, never interpolated or rescaled here.
 * Assembly enforces the view invariants: series times must be strictly
 * increasing, and a what-if form must name only writable properties before it
 * may be submitted.
 */

import type {
  TracePayload,
  TrajectoryPayload,
  WhatIfRequest,
  FenceSpec,
} from "./types.js";

export interface ChartPoint {
  t: number;
  v: number;
}

export interface ComparisonSeries {
  stateName: string;
  observed: ChartPoint[];
  predicted: ChartPoint[];
  spawnTime: number;
}

export function assertMonotoneTimes(points: readonly ChartPoint[], label: string): void {
  for (let i = 1; i < points.length; i++) {
    const prev = points[i - 1]!;
    const cur = points[i]!;
    if (!(cur.t > prev.t)) {
      throw new Error(
        `${label} series times are not strictly increasing at index ${i}`,
      );
    }
  }
}

/** Observed samples of one state, restricted to [from, to]. Records that do
 * not contain the state (unobserved slots) are skipped, never invented. */
export function observedSeries(
  trace: TracePayload,
  stateName: string,
  range?: { from?: number; to?: number },
): ChartPoint[] {
  const from = range?.from ?? -Infinity;
  const to = range?.to ?? Infinity;
  const out: ChartPoint[] = [];
  const { times, records } = trace.observations;
  for (let i = 0; i < times.length; i++) {
    const t = times[i]!;
    const rec = records[i];
    if (t < from || t > to || rec === undefined) continue;
    const v = rec[stateName];
    if (v === undefined || v === null) continue;
    out.push({ t, v });
  }
  return out;
}

export function predictedSeries(
  trajectory: TrajectoryPayload,
  stateName: string,
): ChartPoint[] {
  const values = trajectory.states[stateName];
  if (!values) {
    throw new Error(`trajectory has no state named ${JSON.stringify(stateName)}`);
  }
  const out: ChartPoint[] = [];
  for (let i = 0; i < trajectory.times.length; i++) {
    out.push({ t: trajectory.times[i]!, v: values[i]! });
  }
  return out;
}

export function buildComparison(
  trace: TracePayload,
  trajectory: TrajectoryPayload,
  stateName: string,
  range?: { from?: number; to?: number },
): ComparisonSeries {
  const observed = observedSeries(trace, stateName, range);
  const predicted = predictedSeries(trajectory, stateName);
  assertMonotoneTimes(observed, "observed");
  assertMonotoneTimes(predicted, "predicted");
  return { stateName, observed, predicted, spawnTime: trajectory.anchorTime };
}

// -- what-if form -------------------------------------------------------------

export interface ActionRow {
  property: string;
  value: string;
  time: string;
}

export interface FenceForm {
  cx: string;
  cy: string;
  r: string;
  xState: string;
  yState: string;
}

export interface WhatIfForm {
  rows: ActionRow[];
  lookahead: string;
  fence: FenceForm | null;
}

export interface FieldError {
  field: string;
  message: string;
}

function finite(text: string): number | null {
  if (text.trim() === "") return null;
  const v = Number(text);
  return Number.isFinite(v) ? v : null;
}

/** Validate against the TD's writable set; the form may only be submitted
 * when this returns no errors. */
export function validateWhatIf(
  form: WhatIfForm,
  writables: ReadonlySet<string>,
): FieldError[] {
  const errors: FieldError[] = [];
  form.rows.forEach((row, i) => {
    const where = `row ${i + 1}`;
    if (!row.property) {
      errors.push({ field: `rows.${i}.property`, message: `${where}: choose a property` });
    } else if (!writables.has(row.property)) {
      errors.push({
        field: `rows.${i}.property`,
        message: `${where}: ${JSON.stringify(row.property)} is not writable on this thing`,
      });
    }
    if (finite(row.value) === null) {
      errors.push({ field: `rows.${i}.value`, message: `${where}: value must be a number` });
    }
    const t = finite(row.time);
    if (t === null || t < 0) {
      errors.push({
        field: `rows.${i}.time`,
        message: `${where}: time must be a number of seconds from now (>= 0)`,
      });
    }
  });
  const la = finite(form.lookahead);
  if (la === null || la <= 0) {
    errors.push({ field: "lookahead", message: "lookahead must be a positive number of seconds" });
  }
  if (form.fence) {
    for (const key of ["cx", "cy", "r"] as const) {
      if (finite(form.fence[key]) === null) {
        errors.push({ field: `fence.${key}`, message: `fence ${key} must be a number` });
      }
    }
    const r = finite(form.fence.r);
    if (r !== null && r <= 0) {
      errors.push({ field: "fence.r", message: "fence radius must be positive" });
    }
    if (!form.fence.xState || !form.fence.yState) {
      errors.push({ field: "fence.states", message: "fence needs an x state and a y state" });
    }
  }
  return errors;
}

/** Marshal a validated form into the service request body. Rows are grouped
 * per property and ordered by time (form bookkeeping, not model math). */
export function whatIfRequestBody(form: WhatIfForm): WhatIfRequest {
  const actions: Record<string, [number, number][]> = {};
  for (const row of form.rows) {
    const list = (actions[row.property] ??= []);
    list.push([Number(row.time), Number(row.value)]);
  }
  for (const list of Object.values(actions)) {
    list.sort((a, b) => a[0] - b[0]);
  }
  const body: WhatIfRequest = { lookahead: Number(form.lookahead) };
  if (Object.keys(actions).length > 0) body.actions = actions;
  if (form.fence) {
    const fence: FenceSpec = {
      center: [Number(form.fence.cx), Number(form.fence.cy)],
      radius: Number(form.fence.r),
      xState: form.fence.xState,
      yState: form.fence.yState,
    };
    body.fence = fence;
  }
  return body;
}
