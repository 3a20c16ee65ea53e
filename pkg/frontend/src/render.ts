/**
 * DOM builders for the search page. All functions are pure producers of
 * elements: no fetching, no global state, user data only ever assigned
 * through textContent. Display order always equals API order; the UI never
 * re-sorts, and scores render with exactly two decimals.
 */

import type { FieldScore, SearchResult } from "./types.js";
import { TASK_LABELS } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function formatScore(score: number): string {
  return score.toFixed(2);
}

export function renderResultCount(total: number): HTMLElement {
  if (total === 0) {
    return el("p", "result-count result-count--empty", "No datasets found");
  }
  const noun = total === 1 ? "dataset" : "datasets";
  return el("p", "result-count", `${total} ${noun} found`);
}

/**
 * One horizontal bar per field, in the API-given order. Bar length encodes
 * contribution, so negative similarities floor at zero width while the
 * numeric value still shows. The first row is the best match by contract.
 */
export function renderExplanation(explanation: FieldScore[]): HTMLElement {
  const panel = el("div", "explanation");
  explanation.forEach((fs, position) => {
    const row = el("div", position === 0 ? "explanation-row explanation-row--best" : "explanation-row");
    row.appendChild(el("span", "explanation-field", fs.field));
    const track = el("div", "explanation-track");
    const bar = el("div", "explanation-bar");
    bar.style.width = `${Math.max(fs.score, 0) * 100}%`;
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el("span", "explanation-score", formatScore(fs.score)));
    if (position === 0) {
      row.appendChild(el("span", "explanation-best-tag", "best match"));
    }
    panel.appendChild(row);
  });
  return panel;
}

/** One table row per example; columns are the keys in first-seen order. */
export function renderRecordExamples(examples: Record<string, string>[]): HTMLElement {
  if (examples.length === 0) {
    return el("p", "record-examples record-examples--empty", "no example records");
  }
  const columns: string[] = [];
  for (const example of examples) {
    for (const key of Object.keys(example)) {
      if (!columns.includes(key)) columns.push(key);
    }
  }
  const table = el("table", "record-examples");
  const head = el("thead");
  const headRow = el("tr");
  for (const column of columns) {
    headRow.appendChild(el("th", undefined, column));
  }
  head.appendChild(headRow);
  table.appendChild(head);
  const body = el("tbody");
  for (const example of examples) {
    const row = el("tr");
    for (const column of columns) {
      row.appendChild(el("td", undefined, example[column] ?? ""));
    }
    body.appendChild(row);
  }
  table.appendChild(body);
  return table;
}

export function renderExpandedSection(
  result: SearchResult,
  license: string | null,
): HTMLElement {
  const section = el("div", "card-details");
  section.appendChild(el("p", "card-description", result.description));

  section.appendChild(el("h4", undefined, "Example records"));
  section.appendChild(renderRecordExamples(result.record_examples));

  const link = el("a", "download-link", "Download dataset");
  link.href = result.download_url;
  link.target = "_blank";
  link.rel = "noopener noreferrer";
  section.appendChild(link);

  if (license !== null) {
    section.appendChild(el("p", "card-license", `License: ${license}`));
  }
  return section;
}

export interface CardOptions {
  rank: number;
  expanded: boolean;
  /** License text once known; null renders nothing (absent or not yet loaded). */
  license: string | null;
  onToggle: (id: string) => void;
}

export function renderCard(result: SearchResult, options: CardOptions): HTMLElement {
  const card = el("article", options.expanded ? "card card--expanded" : "card");
  card.dataset.id = result.id;

  const header = el("button", "card-header");
  header.type = "button";
  header.setAttribute("aria-expanded", String(options.expanded));
  header.addEventListener("click", () => options.onToggle(result.id));

  header.appendChild(el("span", "card-rank", String(options.rank)));
  header.appendChild(el("span", "card-name", result.name));
  header.appendChild(el("span", "card-relevance", formatScore(result.relevance)));

  const badges = el("span", "card-badges");
  for (const task of result.tasks) {
    badges.appendChild(el("span", "badge badge--task", TASK_LABELS[task] ?? task));
  }
  for (const domain of result.domains) {
    badges.appendChild(el("span", "badge badge--domain", domain));
  }
  badges.appendChild(el("span", "badge badge--size", result.size_bucket));
  header.appendChild(badges);
  card.appendChild(header);

  card.appendChild(renderExplanation(result.explanation));

  if (options.expanded) {
    card.appendChild(renderExpandedSection(result, options.license));
  }
  return card;
}

export interface ResultListOptions {
  expandedIds: ReadonlySet<string>;
  licenses: ReadonlyMap<string, string | null>;
  onToggle: (id: string) => void;
}

export function renderResults(
  results: SearchResult[],
  options: ResultListOptions,
): HTMLElement {
  const list = el("div", "results");
  results.forEach((result, position) => {
    list.appendChild(
      renderCard(result, {
        rank: position + 1,
        expanded: options.expandedIds.has(result.id),
        license: options.licenses.get(result.id) ?? null,
        onToggle: options.onToggle,
      }),
    );
  });
  return list;
}

export function renderErrorBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.appendChild(el("span", "error-message", message));
  const retry = el("button", "error-retry", "Retry");
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}
