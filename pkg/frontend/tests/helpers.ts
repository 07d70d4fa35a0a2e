/**
 * Shared builders for the UI tests.
 *
 * The clip-a builders reproduce the three-annotator disagreement
 * walkthrough at timestep 3 on top of two unanimous timesteps, matching
 * the scenario the service tests use, so consensus output is directly
 * comparable across the two implementations.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { addObject } from "../src/draft";
import type {
  FrameDoc,
  FramesDoc,
  GraphDoc,
  GroundingDoc,
  QuestionDoc,
} from "../src/types";
import { nodeId } from "../src/types";

export function frames(timestep: number): FramesDoc {
  const ref = (frame: number): FrameDoc => ({ frame, time_sec: frame / 30, uri: null });
  const base = timestep * 90;
  return { pre: ref(base), pnr: ref(base + 30), post: ref(base + 60) };
}

export function pnrBox(box: [number, number, number, number]): GroundingDoc {
  return { pre: null, pnr: box, post: null };
}

/** Seed graph for one narrated action: cw, verb, one direct object. */
export function seedGraph(
  clipId: string,
  timestep: number,
  verb: string,
  noun: string,
): GraphDoc {
  return {
    clip_id: clipId,
    timestep,
    frames: frames(timestep),
    nodes: [
      { kind: "cw" },
      { kind: "verb", verb },
      { kind: "object", noun, instance_id: 0, grounding: pnrBox([10, 10, 50, 50]) },
    ],
    edges: [
      { src: "cw", dst: "verb", relation: "action" },
      { src: "verb", dst: "obj:0", relation: "direct object" },
    ],
    provenance: { kind: "seed", annotator_id: null, grounding_sources: [] },
  };
}

export function clipASeeds(): GraphDoc[] {
  return [
    seedGraph("clip-a", 1, "open", "drawer"),
    seedGraph("clip-a", 2, "take", "bowl"),
    seedGraph("clip-a", 3, "take", "bowl"),
  ];
}

/**
 * The timestep-3 refinement each annotator submits for clip-a:
 * a1 takes a bowl with the left hand, bowl with flour in it;
 * a2 takes a bowl with the right hand, from a scale;
 * a3 reads the action as pressing dough, on the left hand.
 */
export function table3Graph(annotator: "a1" | "a2" | "a3"): GraphDoc {
  if (annotator === "a1") {
    let g = seedGraph("clip-a", 3, "take", "bowl");
    g = addObject(g, "left hand", "with", "verb", undefined, pnrBox([1, 1, 20, 20]));
    return addObject(g, "flour", "with", "obj:0", undefined, pnrBox([2, 2, 30, 30]));
  }
  if (annotator === "a2") {
    let g = seedGraph("clip-a", 3, "take", "bowl");
    g = addObject(g, "right hand", "with", "verb", undefined, pnrBox([3, 3, 20, 20]));
    return addObject(g, "scale", "from", "obj:0", undefined, pnrBox([4, 4, 40, 40]));
  }
  let g = seedGraph("clip-a", 3, "press", "dough");
  return addObject(g, "left hand", "on", "verb", undefined, pnrBox([5, 5, 20, 20]));
}

/** The picks that resolve the timestep-3 disagreements. */
export const TABLE3_PICKS: Record<string, string> = {
  ":vn": "take bowl",
  ":prep:": "with",
  ":hand:": "left hand",
  ":flour": "yes",
  ":scale": "no",
};

export function pickAnswers(
  questions: readonly QuestionDoc[],
  picks: Record<string, string> = TABLE3_PICKS,
): { question_id: string; choice: string }[] {
  return questions.map((q) => {
    const hit = Object.entries(picks).find(([fragment]) => q.question_id.includes(fragment));
    if (hit === undefined) throw new Error(`no pick for ${q.question_id}`);
    return { question_id: q.question_id, choice: hit[1] };
  });
}

/** Edges with node ids replaced by labels (objects by noun class). */
export function labeledEdges(graph: GraphDoc): Set<string> {
  const labels = new Map<string, string>();
  for (const node of graph.nodes) {
    labels.set(nodeId(node), node.kind === "object" ? node.noun : nodeId(node));
  }
  return new Set(
    graph.edges.map(
      (e) => `${labels.get(e.src) ?? e.src}|${e.relation}|${labels.get(e.dst) ?? e.dst}`,
    ),
  );
}

// ---------------------------------------------------------------------------
// live service management for the e2e tests

export interface LiveService {
  baseUrl: string;
  dataDir: string;
  stop(): Promise<void>;
}

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.on("error", reject);
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      server.close(() => resolve(address.port));
    });
  });
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

/** Spawn the annotation service on a free port and wait until it answers. */
export async function startService(): Promise<LiveService> {
  const dataDir = await mkdtemp(join(tmpdir(), "easg-ui-e2e-"));
  const port = await freePort();
  const baseUrl = `http://127.0.0.1:${port}`;
  const child: ChildProcess = spawn("python3", ["-m", "easg_kit.service"], {
    env: {
      ...process.env,
      EASG_DATA_DIR: dataDir,
      EASG_HOST: "127.0.0.1",
      EASG_PORT: String(port),
    },
    stdio: ["ignore", "pipe", "pipe"],
  });
  let output = "";
  child.stdout?.on("data", (chunk: Buffer) => (output += chunk.toString()));
  child.stderr?.on("data", (chunk: Buffer) => (output += chunk.toString()));
  let exited = false;
  child.on("exit", () => (exited = true));

  const deadline = Date.now() + 45_000;
  for (;;) {
    if (exited) throw new Error(`service exited during startup:\n${output}`);
    try {
      const res = await fetch(`${baseUrl}/taxonomy`);
      if (res.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      child.kill();
      throw new Error(`service did not come up on ${baseUrl}:\n${output}`);
    }
    await sleep(200);
  }

  return {
    baseUrl,
    dataDir,
    async stop() {
      child.kill();
      await new Promise<void>((resolve) => {
        if (exited) return resolve();
        child.on("exit", () => resolve());
        setTimeout(() => {
          child.kill("SIGKILL");
          resolve();
        }, 5_000);
      });
      await rm(dataDir, { recursive: true, force: true });
    },
  };
}
