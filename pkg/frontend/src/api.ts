/** Fetch-based client for the twin service.
 *
 * Every number the dashboard displays is taken verbatim from these payloads:
 * the client performs no computation on model values. Concurrent GETs of the
 * same URL share one in-flight request.
 */

import type {
  FitDocument,
  FitRequest,
  JobAck,
  JobDoc,
  PropertyInfo,
  SpawnRequest,
  SpawnResponse,
  ThingDetail,
  ThingSummary,
  TracePayload,
  TrajectoryPayload,
  TwinListEntry,
  TwinSnapshot,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly base: string;
  private readonly fetchFn: FetchLike;
  private readonly inflight = new Map<string, Promise<unknown>>();

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const url = this.base + path;
    if (method === "GET") {
      const pending = this.inflight.get(url);
      if (pending) return pending as Promise<T>;
      const p = this.send<T>(method, url, undefined).finally(() => {
        this.inflight.delete(url);
      });
      this.inflight.set(url, p);
      return p;
    }
    return this.send<T>(method, url, body);
  }

  private async send<T>(method: string, url: string, body: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(url, init);
    const text = await res.text();
    let payload: unknown = null;
    try {
      payload = text ? JSON.parse(text) : null;
    } catch {
      payload = null;
    }
    if (!res.ok) {
      const doc = (payload ?? {}) as { error?: string; message?: string };
      throw new ApiError(
        res.status,
        doc.error ?? `HTTP ${res.status}`,
        doc.message ?? (text || `request failed with status ${res.status}`),
      );
    }
    return payload as T;
  }

  // -- things ----------------------------------------------------------------

  listThings(): Promise<{ things: ThingSummary[] }> {
    return this.request("GET", "/things");
  }

  addThing(td: string): Promise<ThingSummary> {
    return this.request("POST", "/things", { td });
  }

  getThing(key: string): Promise<ThingDetail> {
    return this.request("GET", `/things/${encodeURIComponent(key)}`);
  }

  getProperty(key: string, name: string): Promise<PropertyInfo> {
    return this.request(
      "GET",
      `/things/${encodeURIComponent(key)}/properties/${encodeURIComponent(name)}`,
    );
  }

  // -- traces ----------------------------------------------------------------

  listTraces(key: string): Promise<{ traces: string[] }> {
    return this.request("GET", `/things/${encodeURIComponent(key)}/traces`);
  }

  uploadTrace(
    key: string,
    name: string,
    format: string,
    content: string,
  ): Promise<{ name: string; format: string }> {
    return this.request("POST", `/things/${encodeURIComponent(key)}/traces`, {
      name,
      format,
      content,
    });
  }

  getTrace(key: string, name: string): Promise<TracePayload> {
    return this.request(
      "GET",
      `/things/${encodeURIComponent(key)}/traces/${encodeURIComponent(name)}`,
    );
  }

  // -- fitting ---------------------------------------------------------------

  startFit(key: string, body: FitRequest): Promise<JobAck> {
    return this.request("POST", `/things/${encodeURIComponent(key)}/fit`, {
      ...body,
      async: true,
    });
  }

  getJob(jobId: string): Promise<JobDoc> {
    return this.request("GET", `/jobs/${encodeURIComponent(jobId)}`);
  }

  async pollJob(
    jobId: string,
    opts?: { intervalMs?: number; timeoutMs?: number; onTick?: (job: JobDoc) => void },
  ): Promise<JobDoc> {
    const interval = opts?.intervalMs ?? 300;
    const timeout = opts?.timeoutMs ?? 300_000;
    const start = Date.now();
    for (;;) {
      const job = await this.getJob(jobId);
      opts?.onTick?.(job);
      if (job.status !== "running") return job;
      if (Date.now() - start > timeout) {
        throw new ApiError(0, "JobTimeout", `job ${jobId} still running after ${timeout} ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }

  listFits(key: string): Promise<{ fits: string[] }> {
    return this.request("GET", `/things/${encodeURIComponent(key)}/fits`);
  }

  getFit(key: string, fitId: string): Promise<FitDocument> {
    return this.request(
      "GET",
      `/things/${encodeURIComponent(key)}/fits/${encodeURIComponent(fitId)}`,
    );
  }

  // -- twins -------------------------------------------------------------------

  spawn(key: string, body: SpawnRequest): Promise<SpawnResponse> {
    return this.request("POST", `/things/${encodeURIComponent(key)}/spawn`, body);
  }

  listTwins(): Promise<{ twins: TwinListEntry[] }> {
    return this.request("GET", "/twins");
  }

  getTwin(twinId: string): Promise<TwinSnapshot> {
    return this.request("GET", `/twins/${encodeURIComponent(twinId)}`);
  }

  whatIf(twinId: string, body: WhatIfRequest): Promise<WhatIfResponse> {
    return this.request("POST", `/twins/${encodeURIComponent(twinId)}/whatif`, body);
  }

  trajectory(
    twinId: string,
    range?: { from?: number; to?: number; step?: number },
  ): Promise<TrajectoryPayload> {
    const params = new URLSearchParams();
    if (range?.from !== undefined) params.set("from", String(range.from));
    if (range?.to !== undefined) params.set("to", String(range.to));
    if (range?.step !== undefined) params.set("step", String(range.step));
    const qs = params.toString();
    return this.request(
      "GET",
      `/twins/${encodeURIComponent(twinId)}/trajectory${qs ? `?${qs}` : ""}`,
    );
  }
}
