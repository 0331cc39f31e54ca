/** Payload shapes of the twin service HTTP API, as the dashboard consumes them. */

export interface ThingSummary {
  key: string;
  id: string;
  title: string;
  tdHash: string;
  properties: string[];
}

export interface Diagnostic {
  severity: string;
  code: string;
  path: string;
  message: string;
}

export interface ThingDetail extends ThingSummary {
  td: unknown;
  diagnostics: Diagnostic[];
  traces: string[];
  fits: string[];
}

export interface PropertyInfo {
  name: string;
  type: string;
  readOnly: boolean;
  writeOnly: boolean;
  writable: boolean;
  observable: boolean;
  valueFrom: string;
  model: string | null;
  inputs: string[];
}

export interface TracePayload {
  name: string;
  observations: {
    times: number[];
    records: Record<string, number>[];
  };
  actions: {
    horizon: number[];
    channels: Record<string, [number, number][]>;
  };
}

export interface FitParamEntry {
  label: string;
  value: number;
  lower: number | string;
  upper: number | string;
}

export interface FitResultDoc {
  params: FitParamEntry[];
  initialState: Record<string, number>;
  initialTime: number;
  finalCost: number;
  iterations: number;
  costHistory: number[];
  converged: boolean;
  reason: string;
  testMse: number | null;
}

export interface FitDocument {
  fitId: string;
  thingKey: string;
  tdHash: string;
  trace: string;
  observe: string[];
  outputs: string[] | null;
  stateBounds: Record<string, [number, number]>;
  trainUntil?: number;
  holdoutAfter?: number;
  config: Record<string, unknown>;
  result: FitResultDoc;
}

export interface FitRequest {
  trace: string;
  config?: Record<string, unknown>;
  trainUntil?: number;
  holdoutAfter?: number;
  observe?: string[];
  outputs?: string[];
  stateBounds?: Record<string, [number, number]>;
  guess?: number[];
}

export interface JobAck {
  jobId: string;
  status: "running";
}

export interface JobDoc {
  jobId: string;
  status: "running" | "done" | "failed";
  result?: FitDocument;
  error?: { error: string; message: string };
}

export interface TwinSnapshot {
  twinId: string;
  thingId: string;
  anchorTime: number;
  anchorState: Record<string, number>;
  anchorActions: Record<string, number>;
  virtualTime: number;
  params: number[];
  pendingActions: Record<string, [number, number][]>;
}

export interface TwinListEntry {
  twinId: string;
  thingId?: string;
  anchorTime?: number;
  virtualTime?: number;
  stale: boolean;
}

export interface SpawnRequest {
  fitId?: string;
  params?: number[];
  anchorTime: number;
  trace?: string;
  anchorState?: Record<string, number>;
  anchorActions?: Record<string, number>;
  twinId?: string;
}

export interface SpawnResponse {
  twinId: string;
  twin: TwinSnapshot;
}

export interface FenceSpec {
  center: [number, number];
  radius: number;
  xState: string;
  yState: string;
}

export interface WhatIfRequest {
  actions?: Record<string, [number, number][]>;
  lookahead: number;
  fence?: FenceSpec;
  sampleCount?: number;
}

export interface WhatIfResponse {
  startTime: number;
  endTime: number;
  finalState: Record<string, number>;
  insideFence: boolean | null;
  alert: string | null;
  trajectory: Record<string, number>[];
  fence?: FenceSpec;
}

export interface TrajectoryPayload {
  twinId: string;
  times: number[];
  states: Record<string, number[]>;
  anchorTime: number;
  virtualTime: number;
}

export interface PrecisionRequest {
  truthTrace: string;
  sampleTimes: number[];
  lookAhead: number;
  threshold: number;
  xState?: string;
  yState?: string;
}
