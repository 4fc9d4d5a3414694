/** Full console round-trip against a real service instance:
 * blockage entered through the form, solve, diagram, penalty raised,
 * re-solve, and the comparison of both recovery timetables. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { compare } from "../src/compare.js";
import { defaultForm, pickSection, toOverrides, validateForm } from "../src/form.js";
import { JobView, summaryLine } from "../src/jobview.js";
import type { ScenarioDoc } from "../src/types.js";

const PORT = 18731;
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

async function waitHealthy(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service did not become healthy");
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "railrecover.service"], {
    env: {
      ...process.env,
      RAILRECOVER_PORT: String(PORT),
      RAILRECOVER_HOST: "127.0.0.1",
      RAILRECOVER_STORE: mkdtempSync(join(tmpdir(), "railrecover-")),
      RAILRECOVER_TIME_LIMIT: "30",
    },
    stdio: "ignore",
  });
  await waitHealthy();
}, 40000);

afterAll(() => {
  server?.kill();
});

describe("console round-trip", () => {
  it("solve, diagram, raise penalty, re-solve, compare", async () => {
    const client = new Client(BASE);
    const doc = JSON.parse(
      readFileSync(
        new URL("../../scenarios/mini_line_turn.scenario.json", import.meta.url),
        "utf-8",
      ),
    ) as ScenarioDoc;
    const scenarioId = await client.createScenario(doc);
    const fetched = await client.getScenario(scenarioId);

    // define the blockage through the form: click the two stations
    const form = defaultForm(fetched);
    const picked = pickSection(fetched, "C", "B");
    form.blockFrom = picked.from;
    form.blockTo = picked.to;
    expect(validateForm(form, fetched)).toEqual({});

    async function runJob(extended: boolean): Promise<JobView> {
      const started = await client.startSolve(scenarioId, {
        overrides: toOverrides(form),
        extended_objective: extended,
      });
      const view = new JobView(started.job_id, started.scenario, client);
      await view.run();
      expect(view.state).toBe("done");
      expect(view.summary).not.toBeNull();
      expect(view.diagram).not.toBeNull();
      return view;
    }

    // first answer: penalties at zero, turning is free
    const jobA = await runJob(form.turnPenalty > 0);
    const a = jobA.summary!;
    expect(a.ok).toBe(true);
    expect(a.counts.turns).toBe(1);
    expect(a.objective).toBe(2);
    expect(jobA.diagram!).toMatch(/^<svg/);

    // the displayed line carries exactly the service's summary numbers
    const lineA = summaryLine(a);
    expect(lineA).toContain(`objective ${a.objective}`);
    expect(lineA).toContain(`turns ${a.counts.turns}`);
    expect(lineA).toContain(`served ${a.counts.served}`);

    // feed the answer into the next what-if: make turning expensive
    form.turnPenalty = 100;
    const jobB = await runJob(true);
    const b = jobB.summary!;
    expect(b.counts.turns).toBeLessThan(a.counts.turns);
    const lineB = summaryLine(b);
    expect(lineB).toContain(`objective ${b.objective}`);
    expect(lineB).toContain(`turns ${b.counts.turns}`);

    // the comparison highlights exactly the trips whose (train, time)
    // assignment changed between the two recovery timetables
    const cmp = compare(a, b, jobA.scenarioId, jobB.scenarioId);
    const expected = new Set<string>();
    const byTrip = new Map(b.trips.map((t) => [t.trip, t]));
    for (const ta of a.trips) {
      const tb = byTrip.get(ta.trip)!;
      if (
        ta.served !== tb.served ||
        ta.train !== tb.train ||
        ta.dep !== tb.dep ||
        ta.arr !== tb.arr
      ) {
        expected.add(ta.trip);
      }
    }
    expect(cmp.highlighted).toEqual(expected);
    expect(expected.size).toBeGreaterThan(0);
    expect(cmp.scenarioMismatch).toBe(true); // different derived scenarios

    // identical jobs compare clean
    const cmpSelf = compare(a, a, jobA.scenarioId, jobA.scenarioId);
    expect(cmpSelf.highlighted.size).toBe(0);
    expect(cmpSelf.scenarioMismatch).toBe(false);
  }, 120000);
});
