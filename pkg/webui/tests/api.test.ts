// The API client: auth header handling and the {code, message, details}
// error envelope.

import { ApiClient, ApiError } from "../src/api";

interface Captured {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: string | undefined;
}

function capturingFetch(status: number, payload: unknown) {
  const captured: Captured[] = [];
  const fetchImpl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    captured.push({
      url: String(input),
      method: init?.method ?? "GET",
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: init?.body as string | undefined,
    });
    return new Response(JSON.stringify(payload), {
      status, headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return { fetchImpl, captured };
}

test("bearer token rides every authenticated request", async () => {
  const { fetchImpl, captured } = capturingFetch(200, { items: [], next_cursor: null });
  const api = new ApiClient("http://api.test", fetchImpl);
  api.token = "tok-123";
  await api.exploreFeed("e1");
  expect(captured[0].url).toBe("http://api.test/api/experiments/e1/feed/explore");
  expect(captured[0].headers["Authorization"]).toBe("Bearer tok-123");
});

test("cursor and query values are url-encoded", async () => {
  const { fetchImpl, captured } = capturingFetch(
    200, { posts: { items: [], next_cursor: null }, accounts: [] });
  const api = new ApiClient("http://api.test", fetchImpl);
  await api.search("e1", "hello world", "a+b=");
  expect(captured[0].url)
    .toBe("http://api.test/api/experiments/e1/search?q=hello%20world&cursor=a%2Bb%3D");
});

test("error envelope becomes a typed ApiError", async () => {
  const { fetchImpl } = capturingFetch(422, {
    code: "ModerationRejected", message: "blocked",
    details: { matched_terms: ["x"] },
  });
  const api = new ApiClient("http://api.test", fetchImpl);
  let failure: unknown;
  try {
    await api.createPost("e1", "whatever");
  } catch (caught) {
    failure = caught;
  }
  expect(failure).toBeInstanceOf(ApiError);
  const apiError = failure as ApiError;
  expect(apiError.code).toBe("ModerationRejected");
  expect(apiError.status).toBe(422);
  expect(apiError.details.matched_terms).toEqual(["x"]);
});

test("non-json failure bodies degrade to an HTTP code", async () => {
  const fetchImpl = (async () => new Response("<html>boom</html>", {
    status: 502, statusText: "Bad Gateway",
  })) as typeof fetch;
  const api = new ApiClient("http://api.test", fetchImpl);
  try {
    await api.account();
    throw new Error("unreachable");
  } catch (caught) {
    expect((caught as ApiError).code).toBe("HTTP502");
  }
});

test("trailing slash on the base url is tolerated", async () => {
  const { fetchImpl, captured } = capturingFetch(200, { status: "ok" });
  const api = new ApiClient("http://api.test/", fetchImpl);
  await api.like("e1:5");
  expect(captured[0].url).toBe("http://api.test/api/posts/e1:5/like");
  expect(captured[0].method).toBe("PUT");
});
