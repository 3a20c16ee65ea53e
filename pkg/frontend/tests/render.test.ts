import { describe, expect, it, vi } from "vitest";

import {
  renderCard,
  renderErrorBanner,
  renderExplanation,
  renderRecordExamples,
  renderResultCount,
  renderResults,
} from "../src/render.js";
import type { SearchResponse, SearchResult } from "../src/types.js";
import fixture from "./fixture-search-response.json";

const response = fixture as SearchResponse;

function listOptions(expanded: string[] = []) {
  return {
    expandedIds: new Set(expanded),
    licenses: new Map<string, string | null>(),
    onToggle: () => {},
  };
}

describe("result list (S1)", () => {
  it("renders one card per result in API order with 1-based ranks", () => {
    const list = renderResults(response.results, listOptions());
    const cards = Array.from(list.querySelectorAll(".card"));
    expect(cards.length).toBe(3);
    expect(cards.map((c) => (c as HTMLElement).dataset.id)).toEqual(
      response.results.map((r) => r.id),
    );
    const ranks = Array.from(list.querySelectorAll(".card-rank"), (n) => n.textContent);
    expect(ranks).toEqual(["1", "2", "3"]);
  });

  it("shows every relevance and field score with exactly two decimals", () => {
    const list = renderResults(response.results, listOptions());
    const shown = Array.from(list.querySelectorAll(".card-relevance"), (n) => n.textContent);
    expect(shown).toEqual(response.results.map((r) => r.relevance.toFixed(2)));
    const scores = Array.from(list.querySelectorAll(".explanation-score"), (n) => n.textContent);
    const expected = response.results.flatMap((r) => r.explanation.map((fs) => fs.score.toFixed(2)));
    expect(scores).toEqual(expected);
  });

  it("renders the empty state for zero results", () => {
    expect(renderResultCount(0).textContent).toBe("No datasets found");
    expect(renderResultCount(1).textContent).toBe("1 dataset found");
    expect(renderResultCount(3).textContent).toBe("3 datasets found");
    const list = renderResults([], listOptions());
    expect(list.querySelectorAll(".card").length).toBe(0);
  });
});

describe("card expansion (S2)", () => {
  const first = response.results[0];

  it("reveals description, record table, and download link when expanded", () => {
    const list = renderResults(response.results, listOptions([first.id]));
    const card = list.querySelector(".card--expanded");
    expect(card).not.toBeNull();
    const details = card!.querySelector(".card-details")!;
    expect(details.querySelector(".card-description")!.textContent).toBe(first.description);
    const rows = details.querySelectorAll(".record-examples tbody tr");
    expect(rows.length).toBe(first.record_examples.length);
    const link = details.querySelector<HTMLAnchorElement>(".download-link")!;
    expect(link.href).toBe(first.download_url);
    expect(link.target).toBe("_blank");
  });

  it("collapse restores the compact card", () => {
    const list = renderResults(response.results, listOptions());
    expect(list.querySelector(".card-details")).toBeNull();
    expect(list.querySelectorAll(".card").length).toBe(3);
  });

  it("supports two cards expanded at once", () => {
    const ids = [response.results[0].id, response.results[2].id];
    const list = renderResults(response.results, listOptions(ids));
    expect(list.querySelectorAll(".card-details").length).toBe(2);
  });

  it("clicking the header reports the dataset id", () => {
    const onToggle = vi.fn();
    const card = renderCard(first, { rank: 1, expanded: false, license: null, onToggle });
    card.querySelector<HTMLButtonElement>(".card-header")!.click();
    expect(onToggle).toHaveBeenCalledWith(first.id);
  });

  it("shows the license line only once known", () => {
    const withLicense = renderCard(first, {
      rank: 1, expanded: true, license: "research use only", onToggle: () => {},
    });
    expect(withLicense.querySelector(".card-license")!.textContent).toBe(
      "License: research use only",
    );
    const without = renderCard(first, {
      rank: 1, expanded: true, license: null, onToggle: () => {},
    });
    expect(without.querySelector(".card-license")).toBeNull();
  });
});

describe("explanation bars (D29)", () => {
  it("orders bars as given and highlights the first as best match", () => {
    const panel = renderExplanation([
      { field: "name", score: 0.82 },
      { field: "description", score: 0.41 },
    ]);
    const rows = panel.querySelectorAll(".explanation-row");
    expect(rows.length).toBe(2);
    expect(rows[0].classList.contains("explanation-row--best")).toBe(true);
    expect(rows[0].querySelector(".explanation-best-tag")).not.toBeNull();
    expect(rows[1].querySelector(".explanation-best-tag")).toBeNull();
    const bar = rows[0].querySelector<HTMLElement>(".explanation-bar")!;
    expect(parseFloat(bar.style.width)).toBeCloseTo(82, 6);
  });

  it("floors negative scores at zero width but still prints the number", () => {
    const panel = renderExplanation([{ field: "domains", score: -0.05 }]);
    const bar = panel.querySelector<HTMLElement>(".explanation-bar")!;
    expect(bar.style.width).toBe("0%");
    expect(panel.querySelector(".explanation-score")!.textContent).toBe("-0.05");
  });
});

describe("record examples", () => {
  it("renders one row per example over the union of keys", () => {
    const table = renderRecordExamples([
      { user_id: "1", item_id: "9" },
      { user_id: "2", rating: "5.0" },
    ]);
    const headers = Array.from(table.querySelectorAll("th"), (n) => n.textContent);
    expect(headers).toEqual(["user_id", "item_id", "rating"]);
    expect(table.querySelectorAll("tbody tr").length).toBe(2);
  });

  it("shows a placeholder when there are no examples", () => {
    const node = renderRecordExamples([]);
    expect(node.textContent).toBe("no example records");
  });
});

describe("error banner", () => {
  it("shows the message and retries on click", () => {
    const onRetry = vi.fn();
    const banner = renderErrorBanner("embedding provider unreachable", onRetry);
    expect(banner.textContent).toContain("embedding provider unreachable");
    banner.querySelector<HTMLButtonElement>(".error-retry")!.click();
    expect(onRetry).toHaveBeenCalledTimes(1);
  });
});
