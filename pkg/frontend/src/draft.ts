/**
 * Pure edit operations over a draft graph document.
 *
 * Each operation returns a new document and leaves the input alone, so
 * screens can offer undo by keeping the previous draft. Rules match the
 * service: indirect objects only, anchored at the verb node or a direct
 * object, labels drawn from the taxonomy.
 */

import { checkBox, type Box, boxToJson } from "./boxes";
import {
  type GraphDoc,
  type GroundingDoc,
  type Stage,
  type TaskView,
  type TaxonomyDoc,
  nodeId,
} from "./types";
import { ACTION, DIRECT_OBJECT, directObjectIds, findNode } from "./validate";

/** Raised when an edit gets arguments it cannot honour. */
export class DraftError extends Error {}

function clone(graph: GraphDoc): GraphDoc {
  return structuredClone(graph);
}

/** Start a draft from a claimed refinement task's seed graph. */
export function seedDraft(task: TaskView, annotatorId: string): GraphDoc {
  if (!("graph" in task.payload)) {
    throw new DraftError(`task ${task.task_id} is not a refinement task`);
  }
  const draft = clone(task.payload.graph);
  draft.provenance = { kind: "annotator", annotator_id: annotatorId, grounding_sources: [] };
  return draft;
}

/** Apply a verb-noun correction to the verb node and the direct object. */
export function relabelVerbNoun(graph: GraphDoc, verb: string, noun: string): GraphDoc {
  const out = clone(graph);
  const dobj = directObjectIds(out)[0];
  for (const node of out.nodes) {
    if (node.kind === "verb") node.verb = verb;
    if (node.kind === "object" && nodeId(node) === dobj) node.noun = noun;
  }
  return out;
}

/**
 * Attach one more object node at `anchor` ('verb' or a direct object's
 * node id) with the next unused instance id and one anchor -> object
 * edge. Only indirect objects are added in refinement, so the reserved
 * relations are rejected.
 */
export function addObject(
  graph: GraphDoc,
  noun: string,
  relation: string,
  anchor: string,
  taxonomy?: TaxonomyDoc,
  grounding?: GroundingDoc,
): GraphDoc {
  if (taxonomy !== undefined) {
    if (!taxonomy.nouns.includes(noun)) {
      throw new DraftError(`unknown noun class '${noun}'`);
    }
    if (!taxonomy.relations.includes(relation)) {
      throw new DraftError(`unknown relation label '${relation}'`);
    }
  }
  if (relation === ACTION) {
    throw new DraftError(`relation '${ACTION}' is reserved for the cw->verb edge`);
  }
  if (relation === DIRECT_OBJECT) {
    throw new DraftError(`relation '${DIRECT_OBJECT}' cannot be added in refinement`);
  }
  if (findNode(graph, anchor) === undefined) {
    throw new DraftError(`anchor node '${anchor}' not in graph`);
  }
  if (anchor !== "verb" && !directObjectIds(graph).includes(anchor)) {
    throw new DraftError(`anchor '${anchor}' must be the verb node or a direct object`);
  }

  const used = graph.nodes
    .filter((n) => n.kind === "object")
    .map((n) => (n.kind === "object" ? n.instance_id : 0));
  const instance = used.length === 0 ? 0 : Math.max(...used) + 1;
  const out = clone(graph);
  out.nodes.push({
    kind: "object",
    noun,
    instance_id: instance,
    grounding: grounding ?? { pre: null, pnr: null, post: null },
  });
  out.edges.push({ src: anchor, dst: `obj:${instance}`, relation });
  return out;
}

/** Remove an added indirect object and every edge that touches it. */
export function removeObject(graph: GraphDoc, nid: string): GraphDoc {
  const node = findNode(graph, nid);
  if (node === undefined || node.kind !== "object") {
    throw new DraftError(`no object node '${nid}' in graph`);
  }
  if (directObjectIds(graph).includes(nid)) {
    throw new DraftError("the seed direct object cannot be removed");
  }
  const out = clone(graph);
  out.nodes = out.nodes.filter((n) => nodeId(n) !== nid);
  out.edges = out.edges.filter((e) => e.src !== nid && e.dst !== nid);
  return out;
}

/** Write one drawn box into an object's grounding for one stage. */
export function setBox(graph: GraphDoc, nid: string, stage: Stage, box: Box): GraphDoc {
  checkBox(box);
  const out = clone(graph);
  const node = findNode(out, nid);
  if (node === undefined || node.kind !== "object") {
    throw new DraftError(`no object node '${nid}' in graph`);
  }
  node.grounding[stage] = boxToJson(box);
  return out;
}

/** Drop the box for one stage; an occluded stage simply has none. */
export function clearBox(graph: GraphDoc, nid: string, stage: Stage): GraphDoc {
  const out = clone(graph);
  const node = findNode(out, nid);
  if (node === undefined || node.kind !== "object") {
    throw new DraftError(`no object node '${nid}' in graph`);
  }
  node.grounding[stage] = null;
  return out;
}
