import type {
  CorrectionsDoc,
  FramesResponse,
  Metrics,
  ProjectionResponse,
  RerunResponse,
} from "./types.js";

/** Error carrying the server's {error, detail} body. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }
}

async function parseFailure(response: Response): Promise<never> {
  let detail: unknown = null;
  try {
    const body = (await response.json()) as { detail?: unknown };
    detail = body.detail ?? body;
  } catch {
    detail = await response.text().catch(() => null);
  }
  throw new ApiError(response.status, detail);
}

/** Thin typed client over the serve endpoints. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as T;
  }

  private async send(path: string, method: string, body?: unknown): Promise<Response> {
    const response = await this.fetchFn(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseFailure(response);
    return response;
  }

  getFrames(): Promise<FramesResponse> {
    return this.get("/api/frames");
  }

  getProjection(frame: number): Promise<ProjectionResponse> {
    return this.get(`/api/frames/${frame}/projection`);
  }

  async postLabels(frame: number, entries: { id: string; label: number }[]): Promise<void> {
    await this.send(`/api/frames/${frame}/labels`, "POST", { entries });
  }

  getCorrections(): Promise<CorrectionsDoc> {
    return this.get("/api/corrections");
  }

  rerun(): Promise<RerunResponse> {
    return this.send("/api/rerun", "POST").then(
      (r) => r.json() as Promise<RerunResponse>,
    );
  }

  getMetrics(): Promise<Metrics> {
    return this.get("/api/metrics");
  }
}
