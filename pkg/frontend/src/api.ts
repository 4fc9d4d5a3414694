/** Thin typed client for the railrecover what-if service. */

import type {
  JobInfo,
  ProgressEvent_,
  ScenarioDoc,
  SolveRequest,
  Summary,
} from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`service error ${status}: ${JSON.stringify(detail)}`);
  }
}

async function expectJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail: unknown = null;
    try {
      detail = (await res.json()).detail;
    } catch {
      detail = await res.text().catch(() => null);
    }
    throw new ServiceError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class Client {
  constructor(private base: string) {}

  async createScenario(doc: ScenarioDoc): Promise<string> {
    const res = await fetch(`${this.base}/scenarios`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    return (await expectJson<{ id: string }>(res)).id;
  }

  async getScenario(id: string): Promise<ScenarioDoc> {
    return expectJson(await fetch(`${this.base}/scenarios/${id}`));
  }

  async startSolve(
    scenarioId: string,
    request: SolveRequest,
  ): Promise<{ job_id: string; scenario: string; existing: boolean }> {
    const res = await fetch(`${this.base}/scenarios/${scenarioId}/solve`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    return expectJson(res);
  }

  async getJob(jobId: string): Promise<JobInfo> {
    return expectJson(await fetch(`${this.base}/jobs/${jobId}`));
  }

  async cancel(jobId: string): Promise<JobInfo> {
    return expectJson(
      await fetch(`${this.base}/jobs/${jobId}/cancel`, { method: "POST" }),
    );
  }

  async getSummary(jobId: string): Promise<Summary> {
    return expectJson(
      await fetch(`${this.base}/jobs/${jobId}/solution?format=summary`),
    );
  }

  async getDiagram(jobId: string): Promise<string> {
    const res = await fetch(`${this.base}/jobs/${jobId}/solution?format=diagram`);
    if (!res.ok) throw new ServiceError(res.status, await res.text());
    return res.text();
  }

  /** Subscribe to the job's SSE stream until a terminal state arrives. */
  async streamEvents(
    jobId: string,
    onEvent: (e: ProgressEvent_) => void,
  ): Promise<ProgressEvent_> {
    const res = await fetch(`${this.base}/jobs/${jobId}/events`);
    if (!res.ok || res.body === null) {
      throw new ServiceError(res.status, "no event stream");
    }
    let last: ProgressEvent_ = {};
    for await (const event of parseSseStream(res.body)) {
      last = event;
      onEvent(event);
    }
    return last;
  }
}

/** Incremental parser for a text/event-stream body. */
export async function* parseSseStream(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<ProgressEvent_> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  while (true) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let sep;
    while ((sep = buffer.indexOf("\n\n")) >= 0) {
      const chunk = buffer.slice(0, sep);
      buffer = buffer.slice(sep + 2);
      for (const line of chunk.split("\n")) {
        if (line.startsWith("data: ")) {
          yield JSON.parse(line.slice("data: ".length)) as ProgressEvent_;
        }
      }
    }
  }
}
