/**
 * Wire types for the annotation service, as zod schemas.
 *
 * Every request body the UI emits and every response it consumes is
 * parsed through one of these schemas, so a contract drift fails loudly
 * at the boundary instead of corrupting a draft. Response schemas are
 * strict: an unexpected key is a contract change we want to hear about.
 *
 * The one deliberately open field is `Question.kind`: question kinds are
 * rendered from the payload (see questions.ts), so a new kind must parse
 * today and render generically, not explode.
 */

import { z } from "zod";

// ---------------------------------------------------------------------------
// graph documents

/** Axis-aligned pixel box as [x, y, w, h], top-left origin. */
export const BBoxJson = z.tuple([z.number(), z.number(), z.number(), z.number()]);
export type BBoxJson = z.infer<typeof BBoxJson>;

export const GroundingDoc = z.strictObject({
  pre: BBoxJson.nullable(),
  pnr: BBoxJson.nullable(),
  post: BBoxJson.nullable(),
});
export type GroundingDoc = z.infer<typeof GroundingDoc>;

export const FrameDoc = z.strictObject({
  frame: z.number().int(),
  time_sec: z.number().nullable(),
  uri: z.string().nullable(),
});
export type FrameDoc = z.infer<typeof FrameDoc>;

export const FramesDoc = z.strictObject({
  pre: FrameDoc,
  pnr: FrameDoc,
  post: FrameDoc,
});
export type FramesDoc = z.infer<typeof FramesDoc>;

export const Stage = z.enum(["pre", "pnr", "post"]);
export type Stage = z.infer<typeof Stage>;
export const STAGES: readonly Stage[] = ["pre", "pnr", "post"];

export const CwNodeDoc = z.strictObject({ kind: z.literal("cw") });
export const VerbNodeDoc = z.strictObject({ kind: z.literal("verb"), verb: z.string() });
export const ObjectNodeDoc = z.strictObject({
  kind: z.literal("object"),
  noun: z.string(),
  instance_id: z.number().int(),
  grounding: GroundingDoc,
});
export const NodeDoc = z.discriminatedUnion("kind", [CwNodeDoc, VerbNodeDoc, ObjectNodeDoc]);
export type NodeDoc = z.infer<typeof NodeDoc>;
export type ObjectNodeDoc = z.infer<typeof ObjectNodeDoc>;

export const EdgeDoc = z.strictObject({
  src: z.string(),
  dst: z.string(),
  relation: z.string(),
});
export type EdgeDoc = z.infer<typeof EdgeDoc>;

export const ProvenanceDoc = z.strictObject({
  kind: z.enum(["seed", "annotator", "consensus", "parsed"]),
  annotator_id: z.string().nullable(),
  grounding_sources: z.array(z.string()),
});
export type ProvenanceDoc = z.infer<typeof ProvenanceDoc>;

export const GraphDoc = z.strictObject({
  clip_id: z.string(),
  timestep: z.number().int(),
  frames: FramesDoc,
  nodes: z.array(NodeDoc),
  edges: z.array(EdgeDoc),
  provenance: ProvenanceDoc,
});
export type GraphDoc = z.infer<typeof GraphDoc>;

/** Node id a node document answers to in edges ("cw", "verb", "obj:N"). */
export function nodeId(node: NodeDoc): string {
  if (node.kind === "cw") return "cw";
  if (node.kind === "verb") return "verb";
  return `obj:${node.instance_id}`;
}

// ---------------------------------------------------------------------------
// taxonomy and validation

export const TaxonomyDoc = z.strictObject({
  verbs: z.array(z.string()),
  nouns: z.array(z.string()),
  relations: z.array(z.string()),
});
export type TaxonomyDoc = z.infer<typeof TaxonomyDoc>;

export const ViolationDoc = z.strictObject({
  code: z.string(),
  message: z.string(),
  subject: z.string().nullable(),
});
export type ViolationDoc = z.infer<typeof ViolationDoc>;

export const ValidationReportDoc = z.strictObject({
  ok: z.boolean(),
  violations: z.array(ViolationDoc),
  warnings: z.array(ViolationDoc),
});
export type ValidationReportDoc = z.infer<typeof ValidationReportDoc>;

// ---------------------------------------------------------------------------
// questions and answers

/** Kinds the service emits today; renderers fall back for anything newer. */
export const KNOWN_QUESTION_KINDS = [
  "verb_noun_choice",
  "preposition_choice",
  "hand_choice",
  "spatial_yes_no",
] as const;

export const QuestionDoc = z.strictObject({
  question_id: z.string(),
  kind: z.string(),
  clip_id: z.string(),
  timestep: z.number().int(),
  prompt: z.string(),
  options: z.array(z.string()),
  subject: z.array(z.string()),
});
export type QuestionDoc = z.infer<typeof QuestionDoc>;

export const AnswerSubmission = z.strictObject({
  question_id: z.string(),
  choice: z.string(),
  free_text: z.string().nullable().optional(),
});
export type AnswerSubmission = z.infer<typeof AnswerSubmission>;

// ---------------------------------------------------------------------------
// tasks

export const TaskKind = z.enum(["refinement", "validation"]);
export type TaskKind = z.infer<typeof TaskKind>;

export const ClaimDoc = z.strictObject({
  annotator: z.string(),
  expires: z.number(),
});
export type ClaimDoc = z.infer<typeof ClaimDoc>;

export const RefinementPayload = z.strictObject({
  graph: GraphDoc,
  frames: FramesDoc,
});
export type RefinementPayload = z.infer<typeof RefinementPayload>;

export const ValidationPayload = z.strictObject({
  questions: z.array(QuestionDoc),
});
export type ValidationPayload = z.infer<typeof ValidationPayload>;

export const TaskView = z.strictObject({
  task_id: z.string(),
  kind: TaskKind,
  clip_id: z.string(),
  timestep: z.number().int(),
  payload: z.union([RefinementPayload, ValidationPayload]),
  required: z.number().int(),
  responses: z.number().int(),
  responded: z.array(z.string()),
  state: z.enum(["open", "claimed", "done"]),
  claim: ClaimDoc.nullable(),
  review: z.boolean(),
});
export type TaskView = z.infer<typeof TaskView>;

// ---------------------------------------------------------------------------
// request bodies

export const RegisterClipBody = z.strictObject({
  clip_id: z.string().min(1),
  scenario: z.string().optional(),
  split: z.enum(["train", "val"]).optional(),
  graphs: z.array(GraphDoc).min(1),
  narrations: z.array(z.string()).optional(),
  summary: z.string().nullable().optional(),
});
export type RegisterClipBody = z.infer<typeof RegisterClipBody>;

export const RefinementSubmission = z.strictObject({
  annotator: z.string().min(1),
  graph: GraphDoc,
});
export type RefinementSubmission = z.infer<typeof RefinementSubmission>;

export const ValidationSubmission = z.strictObject({
  annotator: z.string().min(1),
  answers: z.array(AnswerSubmission),
});
export type ValidationSubmission = z.infer<typeof ValidationSubmission>;

export const CorrectionBody = z.strictObject({
  timestep: z.number().int(),
  verb: z.string().min(1),
  noun: z.string().min(1),
  annotator: z.string().min(1),
});
export type CorrectionBody = z.infer<typeof CorrectionBody>;

/** One (timestep, node id) endpoint of a correspondence constraint. */
export const NodeRef = z.tuple([z.number().int(), z.string()]);
export type NodeRef = z.infer<typeof NodeRef>;

export const OverrideDoc = z.strictObject({
  groups: z.array(z.array(NodeRef)).default([]),
  splits: z.array(z.tuple([NodeRef, NodeRef])).default([]),
});
export type OverrideDoc = z.infer<typeof OverrideDoc>;

// ---------------------------------------------------------------------------
// response bodies

export const RegisterResponse = z.strictObject({
  clip_id: z.string(),
  tasks: z.array(z.string()),
});
export type RegisterResponse = z.infer<typeof RegisterResponse>;

export const ClipGraphsDoc = z.strictObject({
  clip_id: z.string(),
  scenario: z.string(),
  split: z.string(),
  graphs: z.array(GraphDoc),
  narrations: z.array(z.string()),
  summary: z.string().nullable(),
  merged: z.array(GraphDoc).nullable(),
  recollected: z.array(GraphDoc).nullable(),
});
export type ClipGraphsDoc = z.infer<typeof ClipGraphsDoc>;

export const StageFramesDoc = z.strictObject({
  clip_id: z.string(),
  stage: Stage,
  frames: z.array(
    z.strictObject({
      timestep: z.number().int(),
      frame: z.number().int(),
      time_sec: z.number().nullable(),
      uri: z.string().nullable(),
    }),
  ),
});
export type StageFramesDoc = z.infer<typeof StageFramesDoc>;

export const CorrectionResponse = z.strictObject({
  status: z.literal("recorded"),
  task_id: z.string(),
  review: z.boolean(),
});
export type CorrectionResponse = z.infer<typeof CorrectionResponse>;

export const OverrideResponse = z.strictObject({
  clip_id: z.string(),
  override: OverrideDoc,
});
export type OverrideResponse = z.infer<typeof OverrideResponse>;

export const MergeResponse = z.strictObject({
  clip_id: z.string(),
  graphs: z.array(GraphDoc),
  created: z.boolean(),
});
export type MergeResponse = z.infer<typeof MergeResponse>;

export const RecollectResponse = z.strictObject({
  clip_id: z.string(),
  graphs: z.array(GraphDoc),
});
export type RecollectResponse = z.infer<typeof RecollectResponse>;

// ---------------------------------------------------------------------------
// errors

/**
 * Error payloads carry at least an `error` slug; endpoint-specific keys
 * (task ids, reports, options) ride along untyped.
 */
export const ErrorDetail = z.looseObject({ error: z.string() });
export type ErrorDetail = z.infer<typeof ErrorDetail>;

export const ErrorDoc = z.strictObject({ detail: ErrorDetail });
export type ErrorDoc = z.infer<typeof ErrorDoc>;

/** The 422 shape for graphs that parsed but broke an invariant. */
export const InvalidGraphDetail = z.looseObject({
  error: z.literal("invalid-graph"),
  report: ValidationReportDoc,
});
export type InvalidGraphDetail = z.infer<typeof InvalidGraphDetail>;
