/**
 * Declarative wire contract: one row per service route, naming the
 * schema for what the UI may send and what the service answers.
 *
 * The client methods in api.ts enforce this per call; this table exists
 * so recorded traffic, whether replayed from fixtures or captured live,
 * can be validated wholesale by the contract tests.
 */

import { z, type ZodType } from "zod";
import {
  ClipGraphsDoc,
  CorrectionBody,
  CorrectionResponse,
  ErrorDoc,
  MergeResponse,
  OverrideDoc,
  OverrideResponse,
  RecollectResponse,
  RegisterClipBody,
  RegisterResponse,
  RefinementSubmission,
  StageFramesDoc,
  TaskView,
  TaxonomyDoc,
  ValidationSubmission,
} from "./types";

export interface WireRoute {
  name: string;
  method: "GET" | "POST";
  path: RegExp;
  request?: ZodType;
  response: ZodType;
}

/** Ordered: first match wins, so the fixed /tasks/next precedes /tasks/{id}. */
export const WIRE: readonly WireRoute[] = [
  { name: "taxonomy", method: "GET", path: /^\/taxonomy$/, response: TaxonomyDoc },
  {
    name: "register-clip",
    method: "POST",
    path: /^\/clips$/,
    request: RegisterClipBody,
    response: RegisterResponse,
  },
  {
    name: "clip-graphs",
    method: "GET",
    path: /^\/clips\/[^/]+\/graphs$/,
    response: ClipGraphsDoc,
  },
  {
    name: "clip-frames",
    method: "GET",
    path: /^\/clips\/[^/]+\/frames\/(pre|pnr|post)$/,
    response: StageFramesDoc,
  },
  { name: "next-task", method: "GET", path: /^\/tasks\/next$/, response: TaskView },
  { name: "read-task", method: "GET", path: /^\/tasks\/[^/]+$/, response: TaskView },
  {
    name: "submit-response",
    method: "POST",
    path: /^\/tasks\/[^/]+\/response$/,
    request: z.union([RefinementSubmission, ValidationSubmission]),
    response: TaskView,
  },
  {
    name: "verbnoun-correction",
    method: "POST",
    path: /^\/clips\/[^/]+\/verbnoun-correction$/,
    request: CorrectionBody,
    response: CorrectionResponse,
  },
  {
    name: "apply-override",
    method: "POST",
    path: /^\/clips\/[^/]+\/override$/,
    request: OverrideDoc,
    response: OverrideResponse,
  },
  { name: "merge", method: "POST", path: /^\/clips\/[^/]+\/merge$/, response: MergeResponse },
  {
    name: "recollect",
    method: "POST",
    path: /^\/clips\/[^/]+\/recollect$/,
    response: RecollectResponse,
  },
];

export function routeFor(method: string, path: string): WireRoute | undefined {
  return WIRE.find((r) => r.method === method && r.path.test(path));
}

export interface Exchange {
  method: string;
  path: string;
  status: number;
  body?: unknown;
  response?: unknown;
}

/**
 * Validate one recorded request/response pair against the contract.
 * Returns the route name; throws (via zod) on any payload that does not
 * conform, and on traffic no route claims.
 */
export function checkExchange(ex: Exchange): string {
  const route = routeFor(ex.method, ex.path);
  if (route === undefined) {
    throw new Error(`no contract route for ${ex.method} ${ex.path}`);
  }
  if (ex.body !== undefined) {
    if (route.request === undefined) {
      throw new Error(`${route.name} takes no request body, got one`);
    }
    route.request.parse(ex.body);
  }
  if (ex.status === 204) return route.name;
  if (ex.status >= 400) {
    ErrorDoc.parse(ex.response);
  } else {
    route.response.parse(ex.response);
  }
  return route.name;
}
