import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function fakeFetch(status: number, body: unknown): typeof fetch {
  return vi.fn(async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    }),
  ) as unknown as typeof fetch;
}

describe("ApiClient", () => {
  it("returns parsed payloads on success", async () => {
    const payload = { count: 2, truth_loaded: false, frames: [] };
    const api = new ApiClient("", fakeFetch(200, payload));
    expect(await api.getFrames()).toEqual(payload);
  });

  it("raises ApiError carrying the server detail", async () => {
    const api = new ApiClient("", fakeFetch(404, { error: "http_error", detail: "no frame 9" }));
    await expect(api.getProjection(9)).rejects.toThrowError(ApiError);
    await expect(api.getProjection(9)).rejects.toMatchObject({
      status: 404,
      detail: "no frame 9",
    });
  });

  it("posts label entries as JSON", async () => {
    const calls: { url: string; init?: RequestInit }[] = [];
    const fetchFn = (async (url: string, init?: RequestInit) => {
      calls.push({ url, init });
      return new Response(null, { status: 204 });
    }) as unknown as typeof fetch;
    const api = new ApiClient("http://x", fetchFn);
    await api.postLabels(3, [{ id: "n1", label: 5 }]);
    expect(calls[0]!.url).toBe("http://x/api/frames/3/labels");
    expect(JSON.parse(calls[0]!.init!.body as string)).toEqual({
      entries: [{ id: "n1", label: 5 }],
    });
  });

  it("surfaces 422 validation details", async () => {
    const api = new ApiClient("", fakeFetch(422, {
      error: "validation_error",
      detail: [{ loc: ["body"], msg: "less than or equal to 7" }],
    }));
    const err = await api.postLabels(0, [{ id: "n1", label: 8 }]).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(JSON.stringify(err.detail)).toContain("less than or equal");
  });
});
