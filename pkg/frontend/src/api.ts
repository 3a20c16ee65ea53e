import type { ApiErrorBody, DatasetDocument, SearchResponse } from "./types.js";
import { stateToParams, type SearchState } from "./state.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.code = code;
  }
}

async function readErrorCode(response: Response): Promise<ApiError> {
  try {
    const body = (await response.json()) as ApiErrorBody;
    return new ApiError(body.error.code, body.error.message);
  } catch {
    return new ApiError("HTTP_" + response.status, `request failed (${response.status})`);
  }
}

/**
 * Client for the search service.
 *
 * Every search() call takes a monotonically increasing sequence number; a
 * completion is applied only if no newer search has been issued since, so an
 * out-of-order response (or a late failure) can never overwrite fresher
 * results. Stale completions resolve to null and stale failures are
 * swallowed. The fetch implementation is injectable for tests.
 */
export class SearchClient {
  private seq = 0;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  searchUrl(state: SearchState): string {
    return `${this.baseUrl}/api/search?${stateToParams(state).toString()}`;
  }

  async search(state: SearchState): Promise<SearchResponse | null> {
    const ticket = ++this.seq;
    let response: Response;
    try {
      response = await this.fetchImpl(this.searchUrl(state));
    } catch (err) {
      if (ticket !== this.seq) return null;
      throw new ApiError("NETWORK", err instanceof Error ? err.message : String(err));
    }
    if (!response.ok) {
      const error = await readErrorCode(response);
      if (ticket !== this.seq) return null;
      throw error;
    }
    let body: SearchResponse;
    try {
      body = (await response.json()) as SearchResponse;
    } catch {
      if (ticket !== this.seq) return null;
      throw new ApiError("BAD_RESPONSE", "response was not valid JSON");
    }
    if (ticket !== this.seq) return null;
    return body;
  }

  /** Single-dataset lookup; used to enrich expanded cards (license). */
  async dataset(id: string): Promise<DatasetDocument> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/api/datasets/${encodeURIComponent(id)}`);
    } catch (err) {
      throw new ApiError("NETWORK", err instanceof Error ? err.message : String(err));
    }
    if (!response.ok) {
      throw await readErrorCode(response);
    }
    return (await response.json()) as DatasetDocument;
  }
}
