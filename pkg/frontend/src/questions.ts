/**
 * Schema-driven rendering model for the validation Q&A screen.
 *
 * Widgets are chosen per question from a kind registry with an
 * options-shape fallback, so a question kind added server-side renders
 * as a generic choice list with no client change beyond an optional
 * registry entry. Choices always come from the question's own options;
 * anything the annotator wants to say outside them travels in
 * `free_text`, which flags the answer for human review.
 */

import type { AnswerSubmission, QuestionDoc, ValidationSubmission } from "./types";

export type Widget = "single_choice" | "yes_no";

const WIDGETS: Record<string, Widget> = {
  verb_noun_choice: "single_choice",
  preposition_choice: "single_choice",
  hand_choice: "single_choice",
  spatial_yes_no: "yes_no",
};

export interface QuestionControl {
  question: QuestionDoc;
  widget: Widget;
  title: string;
  options: readonly string[];
}

function fallbackWidget(q: QuestionDoc): Widget {
  const options = [...q.options].sort();
  return options.length === 2 && options[0] === "no" && options[1] === "yes"
    ? "yes_no"
    : "single_choice";
}

/** Rendering recipe for one question; unknown kinds degrade gracefully. */
export function control(q: QuestionDoc): QuestionControl {
  return {
    question: q,
    widget: WIDGETS[q.kind] ?? fallbackWidget(q),
    title: q.prompt,
    options: q.options,
  };
}

export interface AnswerDraft {
  choice: string;
  freeText?: string;
}

/** Raised when an answer names a choice the question does not offer. */
export class ChoiceError extends Error {}

/** Collected answers for one validation task. */
export class AnswerSheet {
  private drafts = new Map<string, AnswerDraft>();
  private questions = new Map<string, QuestionDoc>();

  constructor(questions: readonly QuestionDoc[]) {
    for (const q of questions) this.questions.set(q.question_id, q);
  }

  list(): QuestionControl[] {
    return [...this.questions.values()].map(control);
  }

  answer(questionId: string, choice: string, freeText?: string): void {
    const q = this.questions.get(questionId);
    if (q === undefined) throw new ChoiceError(`unknown question ${questionId}`);
    if (!q.options.includes(choice)) {
      throw new ChoiceError(
        `'${choice}' is not an option for ${questionId}; expected one of ${q.options.join(", ")}`,
      );
    }
    this.drafts.set(questionId, freeText === undefined ? { choice } : { choice, freeText });
  }

  get(questionId: string): AnswerDraft | undefined {
    return this.drafts.get(questionId);
  }

  /** Question ids still unanswered; submission stays disabled until empty. */
  missing(): string[] {
    return [...this.questions.keys()].filter((qid) => !this.drafts.has(qid)).sort();
  }

  complete(): boolean {
    return this.missing().length === 0;
  }

  /** Answers that carry free text and therefore need human review. */
  flaggedForReview(): string[] {
    return [...this.drafts]
      .filter(([, draft]) => draft.freeText !== undefined)
      .map(([qid]) => qid)
      .sort();
  }

  toSubmission(annotatorId: string): ValidationSubmission {
    const answers: AnswerSubmission[] = [...this.drafts]
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([qid, draft]) => ({
        question_id: qid,
        choice: draft.choice,
        ...(draft.freeText !== undefined ? { free_text: draft.freeText } : {}),
      }));
    return { annotator: annotatorId, answers };
  }

  restore(drafts: Record<string, AnswerDraft>): void {
    for (const [qid, draft] of Object.entries(drafts)) {
      if (this.questions.has(qid)) this.drafts.set(qid, draft);
    }
  }

  snapshot(): Record<string, AnswerDraft> {
    return Object.fromEntries(this.drafts);
  }
}
