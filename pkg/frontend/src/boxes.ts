/**
 * Box-drawing model for the grounding screen.
 *
 * A drag anywhere on a frame canvas becomes an axis-aligned box; the
 * model normalizes inverted drags, clamps to the frame, and refuses
 * degenerate boxes. An occluded stage simply keeps no box, mirroring the
 * data model where absence of a box is the representation, never a
 * zero-area placeholder.
 */

import type { BBoxJson, GroundingDoc, Stage } from "./types";

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Raised when a drawn box would be rejected by the data model. */
export class BoxError extends Error {}

export function boxToJson(box: Box): BBoxJson {
  return [box.x, box.y, box.w, box.h];
}

export function boxFromJson(json: BBoxJson): Box {
  const [x, y, w, h] = json;
  return { x, y, w, h };
}

/**
 * Turn two drag corners into a box: inverted drags are flipped, corners
 * clamped to the frame, and pixel coordinates rounded to integers.
 */
export function normalizeDrag(
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  frame?: { width: number; height: number },
): Box {
  let left = Math.min(x0, x1);
  let top = Math.min(y0, y1);
  let right = Math.max(x0, x1);
  let bottom = Math.max(y0, y1);
  left = Math.max(0, left);
  top = Math.max(0, top);
  if (frame !== undefined) {
    right = Math.min(right, frame.width);
    bottom = Math.min(bottom, frame.height);
  }
  const x = Math.round(left);
  const y = Math.round(top);
  return { x, y, w: Math.round(right) - x, h: Math.round(bottom) - y };
}

/** Reject boxes the data model cannot hold; message is shown inline. */
export function checkBox(box: Box): Box {
  if (box.w <= 0 || box.h <= 0) {
    throw new BoxError(
      `box must have positive area, got w=${box.w}, h=${box.h}; drag to draw a box`,
    );
  }
  if (box.x < 0 || box.y < 0) {
    throw new BoxError(`box corner must be non-negative, got x=${box.x}, y=${box.y}`);
  }
  return box;
}

/**
 * One in-progress drag on one stage's canvas. `finish` either yields a
 * valid box or throws BoxError, which the screen renders as a message
 * and keeps the stage unboxed.
 */
export class DragTracker {
  private start: { x: number; y: number } | null = null;
  private current: { x: number; y: number } | null = null;
  private frame?: { width: number; height: number };

  constructor(frame?: { width: number; height: number }) {
    this.frame = frame;
  }

  get active(): boolean {
    return this.start !== null;
  }

  begin(x: number, y: number): void {
    this.start = { x, y };
    this.current = { x, y };
  }

  move(x: number, y: number): void {
    if (this.start === null) return;
    this.current = { x, y };
  }

  /** Box under the cursor right now, for rubber-band display; may be degenerate. */
  preview(): Box | null {
    if (this.start === null || this.current === null) return null;
    return normalizeDrag(this.start.x, this.start.y, this.current.x, this.current.y, this.frame);
  }

  finish(): Box {
    const box = this.preview();
    this.start = null;
    this.current = null;
    if (box === null) throw new BoxError("no drag in progress");
    return checkBox(box);
  }

  cancel(): void {
    this.start = null;
    this.current = null;
  }
}

/** Per-stage boxes for one object node. */
export class StageBoxes {
  private boxes: Partial<Record<Stage, Box>> = {};

  set(stage: Stage, box: Box): void {
    this.boxes[stage] = checkBox(box);
  }

  clear(stage: Stage): void {
    delete this.boxes[stage];
  }

  get(stage: Stage): Box | null {
    return this.boxes[stage] ?? null;
  }

  count(): number {
    return Object.keys(this.boxes).length;
  }

  toGrounding(): GroundingDoc {
    return {
      pre: this.boxes.pre ? boxToJson(this.boxes.pre) : null,
      pnr: this.boxes.pnr ? boxToJson(this.boxes.pnr) : null,
      post: this.boxes.post ? boxToJson(this.boxes.post) : null,
    };
  }

  static fromGrounding(doc: GroundingDoc): StageBoxes {
    const out = new StageBoxes();
    if (doc.pre) out.set("pre", boxFromJson(doc.pre));
    if (doc.pnr) out.set("pnr", boxFromJson(doc.pnr));
    if (doc.post) out.set("post", boxFromJson(doc.post));
    return out;
  }
}
