/**
 * Page wiring. Searches run on submit (Enter or button) and on filter
 * changes once a query exists, never per keystroke. The query and filters
 * round-trip through the URL, so results are shareable and the back button
 * replays earlier searches. Stale responses are handled in SearchClient.
 */

import { ApiError, SearchClient } from "./api.js";
import { renderErrorBanner, renderResultCount, renderResults } from "./render.js";
import { emptyState, stateFromParams, stateToParams, type SearchState } from "./state.js";
import type { SearchResponse } from "./types.js";

function apiBase(): string {
  const meta = document.querySelector('meta[name="ds4rs-api-base"]');
  return meta?.getAttribute("content") ?? "";
}

function requireElement<T extends Element>(selector: string): T {
  const found = document.querySelector<T>(selector);
  if (!found) throw new Error(`missing page element: ${selector}`);
  return found;
}

export function setupApp(): void {
  const client = new SearchClient(apiBase());
  const form = requireElement<HTMLFormElement>("#search-form");
  const queryInput = requireElement<HTMLInputElement>("#query");
  const statusEl = requireElement<HTMLElement>("#status");
  const countEl = requireElement<HTMLElement>("#result-count");
  const resultsEl = requireElement<HTMLElement>("#results");
  const filterBoxes = Array.from(
    document.querySelectorAll<HTMLInputElement>("input[data-filter]"),
  );

  let lastResponse: SearchResponse | null = null;
  const expandedIds = new Set<string>();
  const licenses = new Map<string, string | null>();

  function readState(): SearchState {
    const state = emptyState();
    state.query = queryInput.value.trim();
    for (const box of filterBoxes) {
      if (!box.checked) continue;
      if (box.dataset.filter === "size") state.sizes.push(box.value);
      if (box.dataset.filter === "task") state.tasks.push(box.value);
    }
    // Domains have no checkbox group; they arrive via the URL only.
    const urlState = stateFromParams(new URLSearchParams(window.location.search));
    state.domains = urlState.domains;
    return state;
  }

  function syncControls(state: SearchState): void {
    queryInput.value = state.query;
    for (const box of filterBoxes) {
      const selected = box.dataset.filter === "size" ? state.sizes : state.tasks;
      box.checked = selected.includes(box.value);
    }
  }

  function pushUrl(state: SearchState): void {
    const params = stateToParams(state).toString();
    const next = params ? `${window.location.pathname}?${params}` : window.location.pathname;
    window.history.pushState(null, "", next);
  }

  function redraw(): void {
    countEl.replaceChildren();
    resultsEl.replaceChildren();
    if (!lastResponse) return;
    countEl.appendChild(renderResultCount(lastResponse.total_matched));
    resultsEl.appendChild(
      renderResults(lastResponse.results, {
        expandedIds,
        licenses,
        onToggle: toggleCard,
      }),
    );
  }

  function toggleCard(id: string): void {
    if (expandedIds.has(id)) {
      expandedIds.delete(id);
    } else {
      expandedIds.add(id);
      if (!licenses.has(id)) {
        client
          .dataset(id)
          .then((doc) => {
            licenses.set(id, doc.license ?? null);
            redraw();
          })
          .catch(() => {
            // The card already shows everything the search result carries;
            // a failed enrichment just leaves the license line off.
            licenses.set(id, null);
          });
      }
    }
    redraw();
  }

  async function runSearch(state: SearchState): Promise<void> {
    if (!state.query) return;
    statusEl.textContent = "Searching...";
    statusEl.className = "status status--loading";
    try {
      const response = await client.search(state);
      if (response === null) return; // a newer search took over
      lastResponse = response;
      statusEl.textContent = "";
      statusEl.className = "status";
      redraw();
    } catch (err) {
      lastResponse = null;
      redraw();
      const message = err instanceof ApiError ? err.message : "request failed";
      statusEl.replaceChildren(renderErrorBanner(message, () => void runSearch(readState())));
      statusEl.className = "status status--error";
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const state = readState();
    pushUrl(state);
    void runSearch(state);
  });

  for (const box of filterBoxes) {
    box.addEventListener("change", () => {
      const state = readState();
      pushUrl(state);
      void runSearch(state);
    });
  }

  window.addEventListener("popstate", () => {
    const state = stateFromParams(new URLSearchParams(window.location.search));
    syncControls(state);
    void runSearch(state);
  });

  const initial = stateFromParams(new URLSearchParams(window.location.search));
  syncControls(initial);
  void runSearch(initial);
}

setupApp();
