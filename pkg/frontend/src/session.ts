/**
 * Annotator session: one task at a time, walked through the screens.
 *
 * The session owns the draft and decides what the current screen is;
 * rendering is elsewhere. Submission is gated on the local invariant
 * mirror, a 422 from the service re-renders with the server's report
 * inline, a transport failure preserves the draft in the store, and a
 * lapsed lease returns to the task list with the draft kept.
 */

import { ApiClient, ApiError, NetworkError } from "./api";
import type { Box } from "./boxes";
import { addObject, clearBox, relabelVerbNoun, removeObject, seedDraft, setBox } from "./draft";
import { AnswerSheet, ChoiceError } from "./questions";
import {
  type ClipGraphsDoc,
  type GraphDoc,
  type Stage,
  type TaskKind,
  type TaskView,
  type TaxonomyDoc,
  type ValidationReportDoc,
} from "./types";
import { ACTION, DIRECT_OBJECT, directObjectIds, validateGraph } from "./validate";

export type Screen =
  | "tasks"
  | "instructions"
  | "verbnoun"
  | "objects"
  | "grounding"
  | "questions"
  | "review";

/** Where drafts survive reloads; the browser adapter wraps localStorage. */
export interface DraftStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export class MemoryStore implements DraftStore {
  private data = new Map<string, string>();

  get(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  set(key: string, value: string): void {
    this.data.set(key, value);
  }

  remove(key: string): void {
    this.data.delete(key);
  }
}

export interface SessionOptions {
  /** Epoch seconds, the unit task leases are expressed in. */
  clock?: () => number;
  store?: DraftStore;
}

/** Simple play/pause over the three key frames, starting at the PNR. */
export class Playback {
  private static ORDER: readonly Stage[] = ["pre", "pnr", "post"];
  playing = false;
  private index = 1;

  get stage(): Stage {
    return Playback.ORDER[this.index]!;
  }

  toggle(): void {
    this.playing = !this.playing;
  }

  tick(): void {
    if (this.playing) this.index = (this.index + 1) % Playback.ORDER.length;
  }
}

/** Nouns worth offering: narration mentions first, then label search. */
export function suggestObjects(
  narration: string | null,
  nouns: readonly string[],
  query = "",
  limit = 12,
): string[] {
  const out: string[] = [];
  if (narration !== null) {
    const text = narration.toLowerCase();
    for (const noun of nouns) {
      if (text.includes(noun.toLowerCase())) out.push(noun);
    }
  }
  const q = query.trim().toLowerCase();
  if (q !== "") {
    for (const noun of nouns) {
      if (!out.includes(noun) && noun.toLowerCase().includes(q)) out.push(noun);
    }
  }
  return out.slice(0, limit);
}

interface SavedDraft {
  graph?: GraphDoc;
  answers?: Record<string, { choice: string; freeText?: string }>;
}

export class Session {
  readonly annotatorId: string;
  readonly playback = new Playback();

  screen: Screen = "tasks";
  taxonomy: TaxonomyDoc | null = null;
  task: TaskView | null = null;
  draft: GraphDoc | null = null;
  answers: AnswerSheet | null = null;
  narration: string | null = null;
  reviewClip: ClipGraphsDoc | null = null;
  /** Inline validation report, local or from a 422, shown on the screen. */
  report: ValidationReportDoc | null = null;
  notice: string | null = null;
  flaggedForReview = false;

  private readonly api: ApiClient;
  private readonly clock: () => number;
  private readonly store: DraftStore;

  constructor(api: ApiClient, annotatorId: string, options: SessionOptions = {}) {
    this.api = api;
    this.annotatorId = annotatorId;
    this.clock = options.clock ?? (() => Date.now() / 1000);
    this.store = options.store ?? new MemoryStore();
  }

  async start(): Promise<void> {
    this.taxonomy = await this.api.taxonomy();
  }

  /** Relations an annotator may attach; the reserved two are not offered. */
  relationChoices(): string[] {
    const relations = this.taxonomy?.relations ?? [];
    return relations.filter((r) => r !== ACTION && r !== DIRECT_OBJECT);
  }

  // -- task flow ---------------------------------------------------------

  async claimNext(kind: TaskKind): Promise<boolean> {
    const task = await this.api.nextTask(kind, this.annotatorId);
    if (task === null) {
      this.notice = "no open tasks";
      return false;
    }
    this.task = task;
    this.report = null;
    this.notice = null;
    this.narration = null;
    this.flaggedForReview = task.review;
    if (task.kind === "refinement") {
      this.answers = null;
      this.draft = this.restoreGraph(task) ?? seedDraft(task, this.annotatorId);
    } else {
      this.draft = null;
      const questions = "questions" in task.payload ? task.payload.questions : [];
      this.answers = new AnswerSheet(questions);
      const saved = this.loadSaved(task.task_id);
      if (saved?.answers !== undefined) this.answers.restore(saved.answers);
    }
    this.screen = "instructions";
    return true;
  }

  /** Leave the instructions screen for the task's first working screen. */
  begin(): void {
    this.requireTask();
    this.screen = this.task!.kind === "refinement" ? "verbnoun" : "questions";
  }

  /**
   * Returns to the task list when our lease has lapsed, keeping the
   * draft. Call from a UI tick; true means the task was dropped.
   */
  checkLease(): boolean {
    const claim = this.task?.claim;
    if (!claim || claim.annotator !== this.annotatorId) return false;
    if (this.clock() < claim.expires) return false;
    this.saveDraft();
    this.resetToTasks("the task lease expired; your draft is saved");
    return true;
  }

  // -- verb-noun screen ----------------------------------------------------

  /** The seed (verb, noun) pair under confirmation. */
  verbNoun(): { verb: string; noun: string } {
    const draft = this.requireDraft();
    let verb = "";
    let noun = "";
    const dobj = directObjectIds(draft)[0];
    for (const node of draft.nodes) {
      if (node.kind === "verb") verb = node.verb;
      if (node.kind === "object" && dobj === `obj:${node.instance_id}`) noun = node.noun;
    }
    return { verb, noun };
  }

  confirmVerbNoun(): void {
    this.requireDraft();
    this.screen = "objects";
    void this.loadNarration();
  }

  /**
   * Correction path: free text is matched against the taxonomy (the
   * escape hatch never invents labels), recorded with the service so the
   * timestep is flagged for review, and applied to the draft.
   */
  async correctVerbNoun(verbText: string, nounText: string): Promise<boolean> {
    const task = this.requireTask();
    const draft = this.requireDraft();
    const verb = matchLabel(verbText, this.taxonomy?.verbs ?? []);
    const noun = matchLabel(nounText, this.taxonomy?.nouns ?? []);
    if (verb === null || noun === null) {
      const which = verb === null ? `verb '${verbText}'` : `noun '${nounText}'`;
      this.notice = `${which} is not in the taxonomy; pick a listed class`;
      return false;
    }
    try {
      const res = await this.api.correctVerbNoun(task.clip_id, {
        timestep: task.timestep,
        verb,
        noun,
        annotator: this.annotatorId,
      });
      this.flaggedForReview = res.review;
    } catch (err) {
      if (err instanceof NetworkError) {
        this.notice = "cannot reach the service; correction not recorded, try again";
        return false;
      }
      throw err;
    }
    this.draft = relabelVerbNoun(draft, verb, noun);
    this.notice = `corrected to (${verb}, ${noun}); flagged for review`;
    this.screen = "objects";
    void this.loadNarration();
    return true;
  }

  // -- indirect-object screen ----------------------------------------------

  /** Suggestions seeded from the narration plus taxonomy search. */
  suggestions(query = ""): string[] {
    return suggestObjects(query === "" ? this.narration : null, this.taxonomy?.nouns ?? [], query);
  }

  addIndirectObject(noun: string, relation: string, anchor: string): boolean {
    const draft = this.requireDraft();
    try {
      this.draft = addObject(draft, noun, relation, anchor, this.taxonomy ?? undefined);
    } catch (err) {
      this.notice = (err as Error).message;
      return false;
    }
    this.notice = null;
    return true;
  }

  removeIndirectObject(nid: string): boolean {
    const draft = this.requireDraft();
    try {
      this.draft = removeObject(draft, nid);
    } catch (err) {
      this.notice = (err as Error).message;
      return false;
    }
    this.notice = null;
    return true;
  }

  toGrounding(): void {
    this.requireDraft();
    this.screen = "grounding";
  }

  backToObjects(): void {
    this.requireDraft();
    this.screen = "objects";
  }

  // -- grounding screen ------------------------------------------------------

  drawBox(nid: string, stage: Stage, box: Box): boolean {
    const draft = this.requireDraft();
    try {
      this.draft = setBox(draft, nid, stage, box);
    } catch (err) {
      this.notice = (err as Error).message;
      return false;
    }
    this.notice = null;
    return true;
  }

  eraseBox(nid: string, stage: Stage): void {
    this.draft = clearBox(this.requireDraft(), nid, stage);
  }

  // -- submission -------------------------------------------------------------

  /** Local invariant mirror; submission stays disabled until this is true. */
  canSubmit(): boolean {
    if (this.task === null) return false;
    if (this.task.kind === "refinement") {
      return (
        this.draft !== null && validateGraph(this.draft, this.taxonomy ?? undefined).ok
      );
    }
    return this.answers !== null && this.answers.complete();
  }

  async submitRefinement(): Promise<boolean> {
    const task = this.requireTask();
    const draft = this.requireDraft();
    const report = validateGraph(draft, this.taxonomy ?? undefined);
    if (!report.ok) {
      this.report = report;
      this.notice = "the draft breaks the listed rules; fix them to submit";
      return false;
    }
    try {
      await this.api.submitRefinement(task.task_id, {
        annotator: this.annotatorId,
        graph: draft,
      });
    } catch (err) {
      return this.handleSubmitError(err);
    }
    this.clearSaved(task.task_id);
    this.resetToTasks("submitted; thank you");
    return true;
  }

  answer(questionId: string, choice: string, freeText?: string): boolean {
    if (this.answers === null) {
      this.notice = "no validation task in progress";
      return false;
    }
    try {
      this.answers.answer(questionId, choice, freeText);
    } catch (err) {
      if (err instanceof ChoiceError) {
        this.notice = err.message;
        return false;
      }
      throw err;
    }
    this.notice = null;
    return true;
  }

  async submitAnswers(): Promise<boolean> {
    const task = this.requireTask();
    if (this.answers === null || !this.answers.complete()) {
      const missing = this.answers?.missing() ?? [];
      this.notice = `unanswered questions: ${missing.join(", ")}`;
      return false;
    }
    try {
      await this.api.submitValidation(task.task_id, this.answers.toSubmission(this.annotatorId));
    } catch (err) {
      return this.handleSubmitError(err);
    }
    this.clearSaved(task.task_id);
    this.resetToTasks("answers submitted; thank you");
    return true;
  }

  // -- review screen ------------------------------------------------------------

  /** Read-only view of a clip's graphs, including consensus when merged. */
  async openReview(clipId: string): Promise<void> {
    this.reviewClip = await this.api.clipGraphs(clipId);
    this.screen = "review";
  }

  // -- plumbing -------------------------------------------------------------------

  saveDraft(): void {
    const task = this.task;
    if (task === null) return;
    const saved: SavedDraft = {};
    if (this.draft !== null) saved.graph = this.draft;
    if (this.answers !== null) saved.answers = this.answers.snapshot();
    this.store.set(this.draftKey(task.task_id), JSON.stringify(saved));
  }

  private handleSubmitError(err: unknown): boolean {
    if (err instanceof NetworkError) {
      this.saveDraft();
      this.notice = "cannot reach the service; your draft is saved locally";
      return false;
    }
    if (err instanceof ApiError) {
      const report = err.report;
      if (report !== null) {
        this.report = report;
        this.notice = "the service rejected the submission; see the report";
        return false;
      }
      if (
        err.status === 409 &&
        ["no-active-lease", "claimed-by-other", "task-complete", "already-answered"].includes(
          err.detail.error,
        )
      ) {
        this.saveDraft();
        this.resetToTasks(`task no longer ours (${err.detail.error}); draft saved`);
        return false;
      }
      this.notice = `the service refused the submission: ${err.detail.error}`;
      return false;
    }
    throw err;
  }

  private async loadNarration(): Promise<void> {
    const task = this.task;
    if (task === null || this.narration !== null) return;
    try {
      const clip = await this.api.clipGraphs(task.clip_id);
      this.narration = clip.narrations[task.timestep - 1] ?? null;
    } catch {
      this.narration = null; // suggestions fall back to taxonomy search
    }
  }

  private resetToTasks(notice: string): void {
    this.task = null;
    this.draft = null;
    this.answers = null;
    this.narration = null;
    this.report = null;
    this.flaggedForReview = false;
    this.screen = "tasks";
    this.notice = notice;
  }

  private restoreGraph(task: TaskView): GraphDoc | null {
    return this.loadSaved(task.task_id)?.graph ?? null;
  }

  private loadSaved(taskId: string): SavedDraft | null {
    const raw = this.store.get(this.draftKey(taskId));
    if (raw === null) return null;
    try {
      return JSON.parse(raw) as SavedDraft;
    } catch {
      return null;
    }
  }

  private clearSaved(taskId: string): void {
    this.store.remove(this.draftKey(taskId));
  }

  private draftKey(taskId: string): string {
    return `easg:draft:${this.annotatorId}:${taskId}`;
  }

  private requireTask(): TaskView {
    if (this.task === null) throw new Error("no task claimed");
    return this.task;
  }

  private requireDraft(): GraphDoc {
    if (this.draft === null) throw new Error("no draft in progress");
    return this.draft;
  }
}

/** Exact, case-insensitive match of free text against taxonomy labels. */
export function matchLabel(text: string, labels: readonly string[]): string | null {
  const needle = text.trim().toLowerCase();
  for (const label of labels) {
    if (label.toLowerCase() === needle) return label;
  }
  return null;
}
