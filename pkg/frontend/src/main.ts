/** Browser wiring: form on the left, jobs and diagrams on the right. */

import { Client } from "./api.js";
import { compare } from "./compare.js";
import { defaultToggles, hoverLayer } from "./diagram.js";
import {
  FormState,
  defaultForm,
  pickSection,
  toOverrides,
  validateForm,
} from "./form.js";
import { JobView, renderBoundsSvg, summaryLine } from "./jobview.js";
import type { ScenarioDoc } from "./types.js";

interface AppState {
  client: Client;
  scenarioId: string;
  doc: ScenarioDoc;
  form: FormState;
  jobs: JobView[];
  stripSelection: string[];
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element ${id}`);
  return node as T;
}

function renderLineStrip(state: AppState): void {
  const strip = el<HTMLDivElement>("line-strip");
  strip.innerHTML = "";
  for (const station of state.doc.topology.stations) {
    const box = document.createElement("button");
    box.textContent = station;
    box.className = "station";
    if (station === state.form.blockFrom || station === state.form.blockTo) {
      box.classList.add("blocked-end");
    }
    box.onclick = () => {
      state.stripSelection.push(station);
      if (state.stripSelection.length === 2) {
        const picked = pickSection(
          state.doc,
          state.stripSelection[0],
          state.stripSelection[1],
        );
        state.form.blockFrom = picked.from;
        state.form.blockTo = picked.to;
        state.stripSelection = [];
      }
      renderForm(state);
    };
    strip.appendChild(box);
  }
}

function renderForm(state: AppState): void {
  renderLineStrip(state);
  const errors = validateForm(state.form, state.doc);
  el<HTMLInputElement>("block-start").value = String(state.form.blockStart);
  el<HTMLInputElement>("block-end").value = String(state.form.blockEnd);
  el<HTMLInputElement>("max-delay").value = String(state.form.maxDelay);
  el<HTMLInputElement>("weight-up").value = String(state.form.weightUp);
  el<HTMLInputElement>("weight-down").value = String(state.form.weightDown);
  el<HTMLInputElement>("turn-penalty").value = String(state.form.turnPenalty);
  el<HTMLInputElement>("return-penalty").value = String(state.form.returnPenalty);
  const turns = el<HTMLDivElement>("turn-toggles");
  turns.innerHTML = "";
  for (const st of state.doc.topology.switches ?? []) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.form.turnStations.includes(st);
    box.onchange = () => {
      state.form.turnStations = box.checked
        ? [...state.form.turnStations, st]
        : state.form.turnStations.filter((s) => s !== st);
      renderForm(state);
    };
    label.appendChild(box);
    label.appendChild(document.createTextNode(st));
    turns.appendChild(label);
  }
  el<HTMLDivElement>("form-errors").textContent = Object.entries(errors)
    .map(([field, msg]) => `${field}: ${msg}`)
    .join("; ");
  el<HTMLButtonElement>("submit").disabled = Object.keys(errors).length > 0;
}

function renderJobs(state: AppState): void {
  const root = el<HTMLDivElement>("jobs");
  root.innerHTML = "";
  for (const job of state.jobs) {
    const card = document.createElement("div");
    card.className = "job-card";
    const head = document.createElement("div");
    head.textContent = `${job.jobId} — ${job.state}`;
    card.appendChild(head);
    const chart = document.createElement("div");
    chart.innerHTML = renderBoundsSvg(job.series);
    card.appendChild(chart);
    if (job.summary) {
      const sum = document.createElement("div");
      sum.textContent = summaryLine(job.summary);
      card.appendChild(sum);
    }
    if (job.diagram && job.summary) {
      const wrap = document.createElement("div");
      wrap.innerHTML = job.diagram;
      const hover = hoverLayer(job.summary);
      wrap.querySelectorAll("polyline").forEach((poly) => {
        poly.addEventListener("mousemove", () => {
          const name = poly.querySelector("title")?.textContent ?? "";
          const details = [...hover.values()]
            .filter((h) => h.train === name)
            .map((h) => h.text);
          el<HTMLDivElement>("hover-box").textContent =
            details.join("  |  ") || name;
        });
      });
      card.appendChild(wrap);
    } else {
      const cancelBtn = document.createElement("button");
      cancelBtn.textContent = "cancel";
      cancelBtn.onclick = () => void state.client.cancel(job.jobId);
      card.appendChild(cancelBtn);
    }
    root.appendChild(card);
  }
  const done = state.jobs.filter((j) => j.summary);
  if (done.length >= 2) {
    const a = done[done.length - 2];
    const b = done[done.length - 1];
    const cmp = compare(
      a.summary!,
      b.summary!,
      a.scenarioId,
      b.scenarioId,
    );
    el<HTMLDivElement>("compare-banner").textContent = cmp.scenarioMismatch
      ? "comparing different scenarios"
      : "";
    el<HTMLDivElement>("compare-list").textContent = cmp.diffs.length
      ? `differing trips: ${[...cmp.highlighted].join(", ")}`
      : "no differences";
  }
}

async function submitWhatIf(state: AppState): Promise<void> {
  const errors = validateForm(state.form, state.doc);
  if (Object.keys(errors).length) return;
  const extended =
    state.form.turnPenalty > 0 || state.form.returnPenalty > 0;
  let started;
  try {
    started = await state.client.startSolve(state.scenarioId, {
      overrides: toOverrides(state.form),
      extended_objective: extended,
    });
  } catch (err) {
    // schema diagnostics from the service land next to the form fields
    el<HTMLDivElement>("form-errors").textContent = String(
      err instanceof Error ? err.message : err,
    );
    return;
  }
  const job = new JobView(started.job_id, started.scenario, state.client);
  state.jobs.push(job);
  renderJobs(state);
  void job.run(() => renderJobs(state));
}

export async function boot(base: string, scenarioId: string): Promise<void> {
  const client = new Client(base);
  const doc = await client.getScenario(scenarioId);
  const state: AppState = {
    client,
    scenarioId,
    doc,
    form: defaultForm(doc),
    jobs: [],
    stripSelection: [],
  };
  defaultToggles(); // overlay toggles default on
  renderForm(state);
  el<HTMLButtonElement>("submit").onclick = () => void submitWhatIf(state);
  const inputs: [string, (v: number) => void][] = [
    ["block-start", (v) => (state.form.blockStart = v)],
    ["block-end", (v) => (state.form.blockEnd = v)],
    ["max-delay", (v) => (state.form.maxDelay = v)],
    ["weight-up", (v) => (state.form.weightUp = v)],
    ["weight-down", (v) => (state.form.weightDown = v)],
    ["turn-penalty", (v) => (state.form.turnPenalty = v)],
    ["return-penalty", (v) => (state.form.returnPenalty = v)],
  ];
  for (const [id, setter] of inputs) {
    el<HTMLInputElement>(id).onchange = (e) => {
      setter(Number((e.target as HTMLInputElement).value));
      renderForm(state);
    };
  }
}

declare global {
  interface Window {
    railrecoverBoot: typeof boot;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.railrecoverBoot = boot;
}
