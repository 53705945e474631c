// Typed client for the annotation server. Paths are origin-relative so the
// app works from wherever the server mounts it; tests point the base at a
// live port instead.

export type LabelName =
  | "paraphrase"
  | "meaning_match"
  | "topical_match"
  | "no_match"
  | "dont_know";

export interface QuerySummary {
  query_id: string;
  quote_text: string;
  total: number;
  labeled: number;
}

export interface Candidate {
  candidate_id: string;
  query_id: string;
  quote_text: string;
  chunk_id: string;
  text: string;
  doc_id: string;
  work_id: string;
  rank: number;
  pool_size: number;
  score: number;
  author: string;
  title: string;
  year: number | null;
  genre: string;
  context_ref: string;
}

export interface LabelEvent {
  kind: "label";
  candidate_id: string;
  label: LabelName;
  annotator: string;
  created_at: number;
  duration_seconds: number | null;
  client_token: string | null;
}

export interface QueryProgress {
  query_id: string;
  total: number;
  labeled: number;
  by_label: Record<string, number>;
  density: number | null;
  decision: "deepen" | "stop";
}

export interface Progress {
  threshold: number;
  queries: QueryProgress[];
}

export interface ContextChunk {
  chunk_id: string;
  doc_id: string;
  work_id: string;
  text: string;
  focus: boolean;
}

export interface ContextWindow {
  chunk_id: string;
  radius: number;
  chunks: ContextChunk[];
}

export interface ExportRow {
  candidate_id: string;
  query_id: string;
  rank: number;
  label: string;
  annotator: string;
  [extra: string]: unknown;
}

let base = "";

export function setApiBase(url: string): void {
  base = url.replace(/\/+$/, "");
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(base + path, init);
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body: unknown = await res.json();
      if (
        typeof body === "object" &&
        body !== null &&
        typeof (body as { detail?: unknown }).detail === "string"
      ) {
        detail = (body as { detail: string }).detail;
      }
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export function getQueries(): Promise<QuerySummary[]> {
  return request("/api/queries");
}

export async function nextCandidate(annotator: string): Promise<Candidate | null> {
  const res = await fetch(
    `${base}/api/next?annotator=${encodeURIComponent(annotator)}`,
  );
  if (res.status === 204) {
    return null;
  }
  if (!res.ok) {
    throw new ApiError(res.status, res.statusText);
  }
  return (await res.json()) as Candidate;
}

export function submitLabel(args: {
  candidateId: string;
  label: LabelName;
  annotator: string;
  durationSeconds: number;
  clientToken: string;
}): Promise<LabelEvent> {
  return request("/api/label", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({
      candidate_id: args.candidateId,
      label: args.label,
      annotator: args.annotator,
      duration_seconds: args.durationSeconds,
      client_token: args.clientToken,
    }),
  });
}

export function getProgress(): Promise<Progress> {
  return request("/api/progress");
}

export function getContext(chunkId: string, radius = 2): Promise<ContextWindow> {
  const query = `chunk=${encodeURIComponent(chunkId)}&radius=${radius}`;
  return request(`/api/context?${query}`);
}

export function getExport(): Promise<ExportRow[]> {
  return request("/api/export");
}
