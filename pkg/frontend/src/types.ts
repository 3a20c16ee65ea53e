/** Wire types mirrored from the ds4rs HTTP API. */

export interface FieldScore {
  field: string;
  score: number;
}

export interface SearchResult {
  id: string;
  name: string;
  relevance: number;
  top_field: string;
  explanation: FieldScore[];
  tasks: string[];
  domains: string[];
  size_bucket: string;
  download_url: string;
  description: string;
  record_examples: Record<string, string>[];
}

export interface SearchResponse {
  query: string;
  total_matched: number;
  results: SearchResult[];
}

export interface DatasetDocument {
  schema_version: string;
  id: string;
  name: string;
  description: string;
  tasks: string[];
  domains: string[];
  size: Record<string, number>;
  record_examples: Record<string, string>[];
  download_url: string;
  license?: string;
  size_bucket: string;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export const SIZE_BUCKETS = ["small", "medium", "large", "unknown"] as const;

export const TASKS = ["ctr_prediction", "rating_prediction", "top_n"] as const;

/** Human labels for task enum values, matching the service's own wording. */
export const TASK_LABELS: Record<string, string> = {
  ctr_prediction: "CTR prediction",
  rating_prediction: "rating prediction",
  top_n: "Top-N recommendation",
};
