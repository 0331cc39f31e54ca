/** Dashboard wiring: one page of panels over the twin service.
 *
 * Panels: thing/trace upload, fit launcher with job polling, twin spawning,
 * observed-vs-predicted comparison chart, and the interactive what-if loop.
 * Every model value on the page comes verbatim from a service payload (via
 * `bindValue`); the dashboard itself computes nothing but pixel positions.
 */

import { ApiClient, ApiError } from "./api.js";
import { renderComparison, renderPlane } from "./chart.js";
import { bindValue } from "./format.js";
import {
  buildComparison,
  validateWhatIf,
  whatIfRequestBody,
  type WhatIfForm,
} from "./session.js";
import type {
  FitDocument,
  FitRequest,
  ThingDetail,
  TracePayload,
} from "./types.js";

type Child = Node | string;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  for (const c of children) node.append(c);
  return node;
}

function option(value: string, label?: string): HTMLOptionElement {
  return el("option", { value }, label ?? value);
}

function fillSelect(select: HTMLSelectElement, values: readonly string[]): void {
  const previous = select.value;
  select.textContent = "";
  for (const v of values) select.appendChild(option(v));
  if (values.includes(previous)) select.value = previous;
}

function setBanner(banner: HTMLElement, message: string | null): void {
  banner.textContent = message ?? "";
  banner.classList.toggle("visible", message !== null);
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

/** Parse "name=lo:hi,name=lo:hi" into the stateBounds request shape. */
export function parseStateBounds(text: string): Record<string, [number, number]> {
  const out: Record<string, [number, number]> = {};
  for (const part of text.split(",")) {
    const item = part.trim();
    if (!item) continue;
    const eq = item.indexOf("=");
    const colon = item.indexOf(":", eq);
    if (eq < 0 || colon < 0) {
      throw new Error(`state bound ${JSON.stringify(item)} is not name=lo:hi`);
    }
    const name = item.slice(0, eq).trim();
    const lo = Number(item.slice(eq + 1, colon));
    const hi = Number(item.slice(colon + 1));
    if (!name || !Number.isFinite(lo) || !Number.isFinite(hi)) {
      throw new Error(`state bound ${JSON.stringify(item)} is not name=lo:hi`);
    }
    out[name] = [lo, hi];
  }
  return out;
}

function parseList(text: string): string[] {
  return text
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

export class App {
  readonly api: ApiClient;
  private readonly root: HTMLElement;

  private selectedThing: string | null = null;
  private writables = new Set<string>();
  private readonly busy = new Set<string>();

  // -- panel elements --------------------------------------------------------
  private readonly thingsList = el("ul", { "data-testid": "things-list" });
  private readonly thingsBanner = el("div", { class: "banner" });
  private readonly tdInput = el("textarea", {
    "data-testid": "td-input",
    rows: "4",
    placeholder: "paste a Thing Description (JSON-LD)",
  });

  private readonly thingTitle = el("h3", { "data-testid": "thing-title" }, "no thing selected");
  private readonly tracesList = el("ul", { "data-testid": "traces-list" });
  private readonly traceName = el("input", { "data-testid": "trace-name", placeholder: "name" });
  private readonly traceFormat = el("select", { "data-testid": "trace-format" });
  private readonly traceContent = el("textarea", {
    "data-testid": "trace-content",
    rows: "4",
    placeholder: "t,temperature,…",
  });
  private readonly traceBanner = el("div", { class: "banner" });
  private readonly previewTrace = el("select", { "data-testid": "preview-trace" });
  private readonly previewHost = el("div", { "data-testid": "trace-preview" });

  private readonly fitTrace = el("select", { "data-testid": "fit-trace" });
  private readonly fitObserve = el("input", {
    "data-testid": "fit-observe",
    placeholder: "observed series, comma separated",
  });
  private readonly fitOutputs = el("input", {
    "data-testid": "fit-outputs",
    placeholder: "held-out MSE outputs (optional)",
  });
  private readonly fitTrainUntil = el("input", { "data-testid": "fit-train-until" });
  private readonly fitHoldoutAfter = el("input", { "data-testid": "fit-holdout-after" });
  private readonly fitStateBounds = el("input", {
    "data-testid": "fit-state-bounds",
    placeholder: "name=lo:hi, name=lo:hi",
  });
  private readonly fitMaxIterations = el("input", { "data-testid": "fit-max-iterations" });
  private readonly fitStatus = el("p", { "data-testid": "fit-status" });
  private readonly fitResultHost = el("div", { "data-testid": "fit-result" });
  private readonly fitBanner = el("div", { class: "banner" });

  private readonly fitsList = el("ul", { "data-testid": "fits-list" });
  private readonly spawnFit = el("select", { "data-testid": "spawn-fit" });
  private readonly spawnTrace = el("select", { "data-testid": "spawn-trace" });
  private readonly spawnAt = el("input", { "data-testid": "spawn-at", placeholder: "anchor time" });
  private readonly spawnTwinId = el("input", { "data-testid": "spawn-twin-id", placeholder: "twin id" });
  private readonly spawnBanner = el("div", { class: "banner" });

  private readonly twinsList = el("ul", { "data-testid": "twins-list" });

  private readonly cmpTwin = el("select", { "data-testid": "cmp-twin" });
  private readonly cmpTrace = el("select", { "data-testid": "cmp-trace" });
  private readonly cmpState = el("select", { "data-testid": "cmp-state" });
  private readonly cmpFrom = el("input", { "data-testid": "cmp-from", placeholder: "from" });
  private readonly cmpTo = el("input", { "data-testid": "cmp-to", placeholder: "to" });
  private readonly cmpStep = el("input", { "data-testid": "cmp-step", placeholder: "step" });
  private readonly cmpBanner = el("div", { class: "banner" });
  private readonly comparisonHost = el("div", { "data-testid": "comparison-host" });

  private readonly wiTwin = el("select", { "data-testid": "wi-twin" });
  private readonly wiRows = el("div", { "data-testid": "wi-rows" });
  private readonly wiLookahead = el("input", { "data-testid": "wi-lookahead", placeholder: "lookahead (s)" });
  private readonly wiFenceEnable = el("input", { "data-testid": "wi-fence-enable", type: "checkbox" });
  private readonly wiFenceCx = el("input", { "data-testid": "wi-fence-cx", placeholder: "center x" });
  private readonly wiFenceCy = el("input", { "data-testid": "wi-fence-cy", placeholder: "center y" });
  private readonly wiFenceR = el("input", { "data-testid": "wi-fence-r", placeholder: "radius" });
  private readonly wiFenceX = el("input", { "data-testid": "wi-fence-x", placeholder: "x state" });
  private readonly wiFenceY = el("input", { "data-testid": "wi-fence-y", placeholder: "y state" });
  private readonly wiErrors = el("ul", { class: "field-errors", "data-testid": "wi-errors" });
  private readonly wiAlert = el("div", { class: "alert", "data-testid": "wi-alert", role: "alert" });
  private readonly planeHost = el("div", { "data-testid": "plane-host" });
  private readonly wiFinal = el("div", { "data-testid": "wi-final" });
  private readonly wiBanner = el("div", { class: "banner" });

  constructor(root: HTMLElement, api: ApiClient) {
    this.root = root;
    this.api = api;
    fillSelect(this.traceFormat, ["csv", "json"]);
    this.buildLayout();
    this.wireEvents();
  }

  // -- layout ------------------------------------------------------------------

  private buildLayout(): void {
    const uploadTdBtn = el("button", { "data-testid": "td-upload" }, "register thing");
    const uploadTraceBtn = el("button", { "data-testid": "trace-upload" }, "upload trace");
    const previewBtn = el("button", { "data-testid": "preview-load" }, "preview");
    const fitBtn = el("button", { "data-testid": "fit-start" }, "start fit");
    const spawnBtn = el("button", { "data-testid": "spawn-btn" }, "spawn twin");
    const cmpBtn = el("button", { "data-testid": "cmp-render" }, "render chart");
    const addRowBtn = el("button", { "data-testid": "wi-add-row" }, "add action");
    const wiSubmitBtn = el("button", { "data-testid": "wi-submit" }, "run what-if");

    uploadTdBtn.addEventListener("click", () => void this.uploadTd());
    uploadTraceBtn.addEventListener("click", () => void this.uploadTrace());
    previewBtn.addEventListener("click", () => void this.loadPreview());
    fitBtn.addEventListener("click", () => void this.startFit());
    spawnBtn.addEventListener("click", () => void this.spawnTwin());
    cmpBtn.addEventListener("click", () => void this.renderComparisonView());
    addRowBtn.addEventListener("click", () => this.addWhatIfRow());
    wiSubmitBtn.addEventListener("click", () => void this.submitWhatIf());

    this.root.append(
      el(
        "section",
        { class: "panel", "data-testid": "panel-things" },
        el("h2", {}, "things"),
        this.thingsBanner,
        this.thingsList,
        this.tdInput,
        uploadTdBtn,
      ),
      el(
        "section",
        { class: "panel", "data-testid": "panel-thing" },
        this.thingTitle,
        el("h4", {}, "traces"),
        this.traceBanner,
        this.tracesList,
        el("div", { class: "row" }, this.traceName, this.traceFormat, uploadTraceBtn),
        this.traceContent,
        el("div", { class: "row" }, this.previewTrace, previewBtn),
        this.previewHost,
      ),
      el(
        "section",
        { class: "panel", "data-testid": "panel-fit" },
        el("h2", {}, "fit"),
        this.fitBanner,
        el("div", { class: "row" }, el("label", {}, "trace"), this.fitTrace),
        el("div", { class: "row" }, el("label", {}, "observe"), this.fitObserve),
        el("div", { class: "row" }, el("label", {}, "outputs"), this.fitOutputs),
        el("div", { class: "row" }, el("label", {}, "train until"), this.fitTrainUntil),
        el("div", { class: "row" }, el("label", {}, "holdout after"), this.fitHoldoutAfter),
        el("div", { class: "row" }, el("label", {}, "state bounds"), this.fitStateBounds),
        el("div", { class: "row" }, el("label", {}, "max iterations"), this.fitMaxIterations),
        fitBtn,
        this.fitStatus,
        this.fitResultHost,
      ),
      el(
        "section",
        { class: "panel", "data-testid": "panel-spawn" },
        el("h2", {}, "fits and twins"),
        this.spawnBanner,
        this.fitsList,
        el(
          "div",
          { class: "row" },
          this.spawnFit,
          this.spawnTrace,
          this.spawnAt,
          this.spawnTwinId,
          spawnBtn,
        ),
        this.twinsList,
      ),
      el(
        "section",
        { class: "panel", "data-testid": "panel-comparison" },
        el("h2", {}, "observed vs predicted"),
        this.cmpBanner,
        el(
          "div",
          { class: "row" },
          this.cmpTwin,
          this.cmpTrace,
          this.cmpState,
          this.cmpFrom,
          this.cmpTo,
          this.cmpStep,
          cmpBtn,
        ),
        this.comparisonHost,
      ),
      el(
        "section",
        { class: "panel", "data-testid": "panel-whatif" },
        el("h2", {}, "what-if"),
        this.wiBanner,
        el("div", { class: "row" }, el("label", {}, "twin"), this.wiTwin),
        this.wiRows,
        addRowBtn,
        el("div", { class: "row" }, el("label", {}, "lookahead"), this.wiLookahead),
        el(
          "div",
          { class: "row" },
          el("label", {}, "fence"),
          this.wiFenceEnable,
          this.wiFenceCx,
          this.wiFenceCy,
          this.wiFenceR,
          this.wiFenceX,
          this.wiFenceY,
        ),
        wiSubmitBtn,
        this.wiErrors,
        this.wiAlert,
        el(
          "p",
          { class: "note", "data-testid": "wi-note" },
          "preview only — the twin itself is left untouched; edit the sequence and resubmit",
        ),
        this.planeHost,
        this.wiFinal,
      ),
    );
  }

  private wireEvents(): void {
    this.cmpTwin.addEventListener("change", () => void this.loadTwinStates());
  }

  // -- helpers -------------------------------------------------------------------

  /** Run a panel task at most once at a time (per-view de-duplication). */
  private async guard(view: string, task: () => Promise<void>): Promise<void> {
    if (this.busy.has(view)) return;
    this.busy.add(view);
    try {
      await task();
    } finally {
      this.busy.delete(view);
    }
  }

  // -- things -----------------------------------------------------------------

  async refreshThings(): Promise<void> {
    const { things } = await this.api.listThings();
    this.thingsList.textContent = "";
    for (const thing of things) {
      const link = el("a", { href: "#", "data-key": thing.key }, `${thing.title} (${thing.id})`);
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        void this.selectThing(thing.key);
      });
      this.thingsList.appendChild(el("li", {}, link));
    }
  }

  async uploadTd(): Promise<void> {
    await this.guard("upload-td", async () => {
      setBanner(this.thingsBanner, null);
      try {
        const summary = await this.api.addThing(this.tdInput.value);
        await this.refreshThings();
        await this.selectThing(summary.key);
      } catch (err) {
        setBanner(this.thingsBanner, describe(err));
      }
    });
  }

  async selectThing(key: string): Promise<void> {
    const detail: ThingDetail = await this.api.getThing(key);
    this.selectedThing = key;
    this.thingTitle.textContent = `${detail.title} — ${detail.id}`;
    this.renderTraceList(detail.traces);
    this.renderFitList(detail.fits);
    const infos = await Promise.all(
      detail.properties.map((name) => this.api.getProperty(key, name)),
    );
    this.writables = new Set(infos.filter((p) => p.writable).map((p) => p.name));
  }

  private renderTraceList(traces: readonly string[]): void {
    this.tracesList.textContent = "";
    for (const name of traces) this.tracesList.appendChild(el("li", {}, name));
    fillSelect(this.fitTrace, traces);
    fillSelect(this.previewTrace, traces);
    fillSelect(this.spawnTrace, traces);
    fillSelect(this.cmpTrace, traces);
  }

  private renderFitList(fits: readonly string[]): void {
    this.fitsList.textContent = "";
    for (const fitId of fits) this.fitsList.appendChild(el("li", {}, fitId));
    fillSelect(this.spawnFit, fits);
  }

  // -- traces ------------------------------------------------------------------

  async uploadTrace(): Promise<void> {
    const key = this.selectedThing;
    if (!key) {
      setBanner(this.traceBanner, "select a thing first");
      return;
    }
    await this.guard("upload-trace", async () => {
      setBanner(this.traceBanner, null);
      try {
        await this.api.uploadTrace(
          key,
          this.traceName.value,
          this.traceFormat.value,
          this.traceContent.value,
        );
        await this.selectThing(key);
      } catch (err) {
        setBanner(this.traceBanner, describe(err));
      }
    });
  }

  async loadPreview(): Promise<void> {
    const key = this.selectedThing;
    const name = this.previewTrace.value;
    if (!key || !name) return;
    await this.guard("preview", async () => {
      setBanner(this.traceBanner, null);
      try {
        const trace: TracePayload = await this.api.getTrace(key, name);
        this.previewHost.textContent = "";
        const names = new Set<string>();
        for (const rec of trace.observations.records) {
          for (const k of Object.keys(rec)) names.add(k);
        }
        const first = trace.observations.times[0];
        const last = trace.observations.times[trace.observations.times.length - 1];
        const firstEl = el("span", { class: "preview-first" });
        const lastEl = el("span", { class: "preview-last" });
        bindValue(firstEl, first);
        bindValue(lastEl, last);
        this.previewHost.append(
          el("p", {}, `series: ${[...names].sort().join(", ")}`),
          el("p", {}, "window: ", firstEl, " … ", lastEl),
        );
      } catch (err) {
        setBanner(this.traceBanner, describe(err));
      }
    });
  }

  // -- fitting ------------------------------------------------------------------

  async startFit(): Promise<void> {
    const key = this.selectedThing;
    if (!key) {
      setBanner(this.fitBanner, "select a thing first");
      return;
    }
    await this.guard("fit", async () => {
      setBanner(this.fitBanner, null);
      this.fitResultHost.textContent = "";
      let body: FitRequest;
      try {
        body = this.readFitForm();
      } catch (err) {
        setBanner(this.fitBanner, describe(err));
        return;
      }
      try {
        const ack = await this.api.startFit(key, body);
        this.fitStatus.textContent = `${ack.jobId}: ${ack.status}`;
        const job = await this.api.pollJob(ack.jobId, {
          onTick: (j) => {
            this.fitStatus.textContent = `${j.jobId}: ${j.status}`;
          },
        });
        if (job.status === "failed") {
          const detail = job.error ? `${job.error.error}: ${job.error.message}` : "fit failed";
          setBanner(this.fitBanner, detail);
          return;
        }
        if (job.result) this.renderFitResult(job.result);
        await this.selectThing(key);
      } catch (err) {
        setBanner(this.fitBanner, describe(err));
      }
    });
  }

  private readFitForm(): FitRequest {
    const trace = this.fitTrace.value;
    if (!trace) throw new Error("choose a trace to fit against");
    const body: FitRequest = { trace };
    const observe = parseList(this.fitObserve.value);
    if (observe.length > 0) body.observe = observe;
    const outputs = parseList(this.fitOutputs.value);
    if (outputs.length > 0) body.outputs = outputs;
    if (this.fitTrainUntil.value.trim() !== "") {
      body.trainUntil = Number(this.fitTrainUntil.value);
    }
    if (this.fitHoldoutAfter.value.trim() !== "") {
      body.holdoutAfter = Number(this.fitHoldoutAfter.value);
    }
    if (this.fitStateBounds.value.trim() !== "") {
      body.stateBounds = parseStateBounds(this.fitStateBounds.value);
    }
    if (this.fitMaxIterations.value.trim() !== "") {
      body.config = { maxIterations: Number(this.fitMaxIterations.value) };
    }
    return body;
  }

  private renderFitResult(doc: FitDocument): void {
    this.fitResultHost.textContent = "";
    const mse = el("span", { class: "fit-test-mse" });
    bindValue(mse, doc.result.testMse);
    const cost = el("span", { class: "fit-final-cost" });
    bindValue(cost, doc.result.finalCost);
    const iters = el("span", { class: "fit-iterations" });
    bindValue(iters, doc.result.iterations);
    this.fitResultHost.append(
      el("p", {}, `${doc.fitId} — ${doc.result.converged ? "converged" : "stopped"} (${doc.result.reason})`),
      el("p", {}, "iterations: ", iters),
      el("p", {}, "final cost: ", cost),
      el("p", {}, "held-out MSE: ", mse),
    );
  }

  // -- twins ---------------------------------------------------------------------

  async spawnTwin(): Promise<void> {
    const key = this.selectedThing;
    if (!key) {
      setBanner(this.spawnBanner, "select a thing first");
      return;
    }
    await this.guard("spawn", async () => {
      setBanner(this.spawnBanner, null);
      const anchor = Number(this.spawnAt.value);
      if (!Number.isFinite(anchor)) {
        setBanner(this.spawnBanner, "anchor time must be a number");
        return;
      }
      try {
        await this.api.spawn(key, {
          fitId: this.spawnFit.value,
          trace: this.spawnTrace.value,
          anchorTime: anchor,
          twinId: this.spawnTwinId.value || undefined,
        });
        await this.refreshTwins();
      } catch (err) {
        setBanner(this.spawnBanner, describe(err));
      }
    });
  }

  async refreshTwins(): Promise<void> {
    const { twins } = await this.api.listTwins();
    this.twinsList.textContent = "";
    const ids: string[] = [];
    for (const twin of twins) {
      const item = el("li", {}, `${twin.twinId} — anchored at `);
      const anchor = el("span", { class: "twin-anchor" });
      bindValue(anchor, twin.anchorTime ?? null);
      item.appendChild(anchor);
      if (twin.stale) item.append(" (stale)");
      this.twinsList.appendChild(item);
      ids.push(twin.twinId);
    }
    fillSelect(this.cmpTwin, ids);
    fillSelect(this.wiTwin, ids);
    if (this.cmpTwin.value) await this.loadTwinStates();
  }

  async loadTwinStates(): Promise<void> {
    const twinId = this.cmpTwin.value;
    if (!twinId) return;
    const snapshot = await this.api.getTwin(twinId);
    fillSelect(this.cmpState, Object.keys(snapshot.anchorState));
  }

  // -- comparison ------------------------------------------------------------------

  async renderComparisonView(): Promise<void> {
    await this.guard("comparison", async () => {
      setBanner(this.cmpBanner, null);
      const from = this.cmpFrom.value.trim() === "" ? undefined : Number(this.cmpFrom.value);
      const to = this.cmpTo.value.trim() === "" ? undefined : Number(this.cmpTo.value);
      const step = this.cmpStep.value.trim() === "" ? undefined : Number(this.cmpStep.value);
      if (from !== undefined && to !== undefined && !(to > from)) {
        // an empty window has nothing to plot and warrants no request
        renderComparison(this.comparisonHost, null);
        return;
      }
      const twinId = this.cmpTwin.value;
      const trace = this.cmpTrace.value;
      if (twinId && this.cmpState.options.length === 0) {
        await this.loadTwinStates();
      }
      const state = this.cmpState.value;
      if (!twinId || !trace || !state) {
        setBanner(this.cmpBanner, "choose a twin, a trace and a state");
        return;
      }
      const key = this.selectedThing;
      if (!key) {
        setBanner(this.cmpBanner, "select a thing first");
        return;
      }
      try {
        const [tracePayload, trajectory] = await Promise.all([
          this.api.getTrace(key, trace),
          this.api.trajectory(twinId, { from, to, step }),
        ]);
        const series = buildComparison(tracePayload, trajectory, state, { from, to });
        renderComparison(this.comparisonHost, series);
      } catch (err) {
        // leave whatever chart was on screen untouched
        setBanner(this.cmpBanner, describe(err));
      }
    });
  }

  // -- what-if ----------------------------------------------------------------------

  addWhatIfRow(): void {
    const property = el("select", { class: "wi-property" });
    fillSelect(property, [...this.writables].sort());
    const value = el("input", { class: "wi-value", placeholder: "value" });
    const time = el("input", { class: "wi-time", placeholder: "time (s)" });
    const remove = el("button", { class: "wi-remove" }, "remove");
    const row = el("div", { class: "wi-row" }, property, value, time, remove);
    remove.addEventListener("click", () => row.remove());
    this.wiRows.appendChild(row);
  }

  readWhatIfForm(): WhatIfForm {
    const rows = [...this.wiRows.querySelectorAll(".wi-row")].map((row) => ({
      property: (row.querySelector(".wi-property") as HTMLSelectElement).value,
      value: (row.querySelector(".wi-value") as HTMLInputElement).value,
      time: (row.querySelector(".wi-time") as HTMLInputElement).value,
    }));
    return {
      rows,
      lookahead: this.wiLookahead.value,
      fence: this.wiFenceEnable.checked
        ? {
            cx: this.wiFenceCx.value,
            cy: this.wiFenceCy.value,
            r: this.wiFenceR.value,
            xState: this.wiFenceX.value,
            yState: this.wiFenceY.value,
          }
        : null,
    };
  }

  async submitWhatIf(): Promise<void> {
    await this.guard("whatif", async () => {
      setBanner(this.wiBanner, null);
      this.wiErrors.textContent = "";
      const twinId = this.wiTwin.value;
      if (!twinId) {
        setBanner(this.wiBanner, "choose a twin");
        return;
      }
      const form = this.readWhatIfForm();
      const errors = validateWhatIf(form, this.writables);
      if (errors.length > 0) {
        for (const e of errors) {
          this.wiErrors.appendChild(el("li", { "data-field": e.field }, e.message));
        }
        return;
      }
      try {
        const result = await this.api.whatIf(twinId, whatIfRequestBody(form));
        this.wiAlert.classList.toggle("visible", result.alert !== null);
        this.wiAlert.textContent = result.alert ?? "";
        if (result.alert !== null) this.wiAlert.setAttribute("data-value", result.alert);
        renderPlane(this.planeHost, result);
        this.renderFinalState(result.finalState);
        // the form keeps its rows so the sequence can be edited and resubmitted
      } catch (err) {
        setBanner(this.wiBanner, describe(err));
      }
    });
  }

  private renderFinalState(finalState: Record<string, number>): void {
    this.wiFinal.textContent = "";
    const list = el("dl", { class: "final-state" });
    for (const [name, value] of Object.entries(finalState)) {
      const dd = el("dd", { class: `final-${name}` });
      bindValue(dd, value);
      list.append(el("dt", {}, name), dd);
    }
    this.wiFinal.append(el("h4", {}, "forecast final state"), list);
  }
}

export async function boot(root: HTMLElement, api: ApiClient): Promise<App> {
  const app = new App(root, api);
  await app.refreshThings();
  await app.refreshTwins();
  return app;
}
