/**
 * Typed HTTP client for the annotation service.
 *
 * Request bodies are parsed through their schema before anything goes on
 * the wire, and responses are parsed on the way in, so the compiler and
 * the runtime agree about every payload. Transport failures and HTTP
 * errors raise different types: NetworkError means the draft should be
 * preserved and retried, ApiError carries the server's error document.
 */

import type { ZodType } from "zod";
import {
  ClipGraphsDoc,
  CorrectionBody,
  CorrectionResponse,
  ErrorDetail,
  ErrorDoc,
  InvalidGraphDetail,
  MergeResponse,
  OverrideDoc,
  OverrideResponse,
  RecollectResponse,
  RegisterClipBody,
  RegisterResponse,
  RefinementSubmission,
  Stage,
  StageFramesDoc,
  TaskKind,
  TaskView,
  TaxonomyDoc,
  ValidationSubmission,
  type ValidationReportDoc,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The request never reached the service (offline, refused, aborted). */
export class NetworkError extends Error {
  constructor(message: string, options?: { cause?: unknown }) {
    super(message, options);
    this.name = "NetworkError";
  }
}

/** The service answered with an error document. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: ErrorDetail;

  constructor(status: number, detail: ErrorDetail) {
    super(`${status}: ${detail.error}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }

  /** Validation report from an invalid-graph 422, when that is what this is. */
  get report(): ValidationReportDoc | null {
    const parsed = InvalidGraphDetail.safeParse(this.detail);
    return parsed.success ? parsed.data.report : null;
  }
}

interface RequestSpec<B, R> {
  method: "GET" | "POST";
  path: string;
  query?: Record<string, string>;
  body?: B;
  requestSchema?: ZodType<B>;
  responseSchema: ZodType<R>;
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private url(path: string, query?: Record<string, string>): string {
    const qs = query ? `?${new URLSearchParams(query)}` : "";
    return `${this.baseUrl}${path}${qs}`;
  }

  private async request<B, R>(spec: RequestSpec<B, R>): Promise<R | null> {
    const init: RequestInit = { method: spec.method };
    if (spec.body !== undefined) {
      const body = spec.requestSchema ? spec.requestSchema.parse(spec.body) : spec.body;
      init.body = JSON.stringify(body);
      init.headers = { "content-type": "application/json" };
    }
    let res: Response;
    try {
      res = await this.fetchFn(this.url(spec.path, spec.query), init);
    } catch (cause) {
      throw new NetworkError(`request to ${spec.path} failed to reach the service`, { cause });
    }
    if (res.status === 204) return null;
    const text = await res.text();
    if (!res.ok) {
      let detail: ErrorDetail = { error: `http-${res.status}` };
      try {
        detail = ErrorDoc.parse(JSON.parse(text)).detail;
      } catch {
        // not an error document; keep the status-only detail
      }
      throw new ApiError(res.status, detail);
    }
    return spec.responseSchema.parse(JSON.parse(text));
  }

  async taxonomy(): Promise<TaxonomyDoc> {
    const out = await this.request({
      method: "GET",
      path: "/taxonomy",
      responseSchema: TaxonomyDoc,
    });
    return out!;
  }

  async registerClip(body: RegisterClipBody): Promise<RegisterResponse> {
    const out = await this.request({
      method: "POST",
      path: "/clips",
      body,
      requestSchema: RegisterClipBody,
      responseSchema: RegisterResponse,
    });
    return out!;
  }

  async clipGraphs(clipId: string): Promise<ClipGraphsDoc> {
    const out = await this.request({
      method: "GET",
      path: `/clips/${encodeURIComponent(clipId)}/graphs`,
      responseSchema: ClipGraphsDoc,
    });
    return out!;
  }

  async stageFrames(clipId: string, stage: Stage): Promise<StageFramesDoc> {
    const out = await this.request({
      method: "GET",
      path: `/clips/${encodeURIComponent(clipId)}/frames/${stage}`,
      responseSchema: StageFramesDoc,
    });
    return out!;
  }

  /** Claim the next open task of a kind; null when the queue is empty. */
  async nextTask(kind: TaskKind, annotator: string): Promise<TaskView | null> {
    return this.request({
      method: "GET",
      path: "/tasks/next",
      query: { kind, annotator },
      responseSchema: TaskView,
    });
  }

  async task(taskId: string): Promise<TaskView> {
    const out = await this.request({
      method: "GET",
      path: `/tasks/${encodeURIComponent(taskId)}`,
      responseSchema: TaskView,
    });
    return out!;
  }

  async submitRefinement(taskId: string, body: RefinementSubmission): Promise<TaskView> {
    const out = await this.request({
      method: "POST",
      path: `/tasks/${encodeURIComponent(taskId)}/response`,
      body,
      requestSchema: RefinementSubmission,
      responseSchema: TaskView,
    });
    return out!;
  }

  async submitValidation(taskId: string, body: ValidationSubmission): Promise<TaskView> {
    const out = await this.request({
      method: "POST",
      path: `/tasks/${encodeURIComponent(taskId)}/response`,
      body,
      requestSchema: ValidationSubmission,
      responseSchema: TaskView,
    });
    return out!;
  }

  async correctVerbNoun(clipId: string, body: CorrectionBody): Promise<CorrectionResponse> {
    const out = await this.request({
      method: "POST",
      path: `/clips/${encodeURIComponent(clipId)}/verbnoun-correction`,
      body,
      requestSchema: CorrectionBody,
      responseSchema: CorrectionResponse,
    });
    return out!;
  }

  async applyOverride(clipId: string, body: OverrideDoc): Promise<OverrideResponse> {
    const out = await this.request({
      method: "POST",
      path: `/clips/${encodeURIComponent(clipId)}/override`,
      body,
      requestSchema: OverrideDoc,
      responseSchema: OverrideResponse,
    });
    return out!;
  }

  async merge(clipId: string): Promise<MergeResponse> {
    const out = await this.request({
      method: "POST",
      path: `/clips/${encodeURIComponent(clipId)}/merge`,
      responseSchema: MergeResponse,
    });
    return out!;
  }

  async recollect(clipId: string): Promise<RecollectResponse> {
    const out = await this.request({
      method: "POST",
      path: `/clips/${encodeURIComponent(clipId)}/recollect`,
      responseSchema: RecollectResponse,
    });
    return out!;
  }
}
