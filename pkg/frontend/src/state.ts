/**
 * Search state lives in the URL query string (q, size, task, domain), so
 * every search is shareable and the back button works. The param names and
 * the comma-separated list encoding match the API's own, which keeps the
 * mapping from UI state to request trivially auditable.
 */

export interface SearchState {
  query: string;
  sizes: string[];
  tasks: string[];
  domains: string[];
}

export function emptyState(): SearchState {
  return { query: "", sizes: [], tasks: [], domains: [] };
}

function readList(params: URLSearchParams, key: string): string[] {
  const raw = params.get(key);
  if (!raw) return [];
  return raw
    .split(",")
    .map((piece) => piece.trim())
    .filter((piece) => piece.length > 0);
}

export function stateFromParams(params: URLSearchParams): SearchState {
  return {
    query: params.get("q") ?? "",
    sizes: readList(params, "size"),
    tasks: readList(params, "task"),
    domains: readList(params, "domain"),
  };
}

/** Empty selections are omitted entirely: no param means no filter. */
export function stateToParams(state: SearchState): URLSearchParams {
  const params = new URLSearchParams();
  if (state.query) {
    params.set("q", state.query);
  }
  if (state.sizes.length > 0) {
    params.set("size", state.sizes.join(","));
  }
  if (state.tasks.length > 0) {
    params.set("task", state.tasks.join(","));
  }
  if (state.domains.length > 0) {
    params.set("domain", state.domains.join(","));
  }
  return params;
}
