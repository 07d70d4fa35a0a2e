/**
 * Browser bootstrap: renders the session's current screen into #app and
 * routes DOM events to session methods. All decisions live in session.ts
 * and friends; this file only draws and forwards.
 *
 * Importing this module outside a browser is a no-op, which keeps it
 * loadable from tests.
 */

import { ApiClient } from "./api";
import { DragTracker } from "./boxes";
import { type DraftStore, Session } from "./session";
import { type GraphDoc, type QuestionDoc, type Stage, STAGES, nodeId } from "./types";
import { directObjectIds } from "./validate";

class BrowserStore implements DraftStore {
  get(key: string): string | null {
    return window.localStorage.getItem(key);
  }

  set(key: string, value: string): void {
    window.localStorage.setItem(key, value);
  }

  remove(key: string): void {
    window.localStorage.removeItem(key);
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function button(label: string, onClick: () => void, disabled = false): HTMLButtonElement {
  const b = el("button", {}, label);
  b.disabled = disabled;
  b.addEventListener("click", onClick);
  return b;
}

export class App {
  private session: Session;
  private root: HTMLElement;

  constructor(root: HTMLElement, session: Session) {
    this.root = root;
    this.session = session;
  }

  static async boot(root: HTMLElement): Promise<App> {
    const base = (window as { EASG_API?: string }).EASG_API ?? "";
    const annotator =
      new URLSearchParams(window.location.search).get("annotator") ?? "anonymous";
    const session = new Session(new ApiClient(base), annotator, { store: new BrowserStore() });
    await session.start();
    const app = new App(root, session);
    window.addEventListener("beforeunload", () => session.saveDraft());
    window.setInterval(() => {
      if (session.checkLease()) app.render();
      session.playback.tick();
      if (session.screen === "instructions") app.render();
    }, 1000);
    app.render();
    return app;
  }

  render(): void {
    const s = this.session;
    this.root.replaceChildren();
    if (s.notice !== null) this.root.append(el("p", { class: "notice" }, s.notice));
    if (s.report !== null && !s.report.ok) {
      const items = s.report.violations.map((v) => el("li", {}, `${v.code}: ${v.message}`));
      this.root.append(el("div", { class: "report" }, el("ul", {}, ...items)));
    }
    switch (s.screen) {
      case "tasks":
        this.renderTasks();
        break;
      case "instructions":
        this.renderInstructions();
        break;
      case "verbnoun":
        this.renderVerbNoun();
        break;
      case "objects":
        this.renderObjects();
        break;
      case "grounding":
        this.renderGrounding();
        break;
      case "questions":
        this.renderQuestions();
        break;
      case "review":
        this.renderReview();
        break;
    }
  }

  private act(fn: () => Promise<unknown> | unknown): () => void {
    return () => {
      Promise.resolve(fn()).then(
        () => this.render(),
        (err) => {
          this.session.notice = String(err);
          this.render();
        },
      );
    };
  }

  private renderTasks(): void {
    const s = this.session;
    this.root.append(
      el("h1", {}, "Annotation tasks"),
      el("p", {}, `Signed in as ${s.annotatorId}.`),
      button("Claim a refinement task", this.act(() => s.claimNext("refinement"))),
      button("Claim a validation task", this.act(() => s.claimNext("validation"))),
    );
    const clipInput = el("input", { placeholder: "clip id" });
    this.root.append(
      el(
        "p",
        {},
        clipInput,
        button("Review a clip", this.act(() => s.openReview(clipInput.value))),
      ),
    );
  }

  private renderInstructions(): void {
    const s = this.session;
    const task = s.task!;
    this.root.append(
      el("h1", {}, `Clip ${task.clip_id}, action ${task.timestep}`),
      el(
        "p",
        {},
        "Watch the clip sampled around the point of no return. Confirm or " +
          "correct the narrated verb and object, add the other objects that " +
          "take part in the action with the right preposition, and draw a " +
          "box around each one on the three frames where it is visible. " +
          "Leave a frame unboxed when the object is hidden.",
      ),
    );
    if ("frames" in task.payload) {
      const frames = task.payload.frames;
      const stage = s.playback.stage;
      const ref = frames[stage];
      const caption = `${stage.toUpperCase()} frame ${ref.frame}`;
      this.root.append(
        ref.uri !== null
          ? el("img", { src: ref.uri, alt: caption, class: "frame" })
          : el("div", { class: "frame placeholder" }, caption),
        el("p", {}, button(s.playback.playing ? "Pause" : "Play", this.act(() => s.playback.toggle()))),
      );
    }
    this.root.append(button("Begin", this.act(() => s.begin())));
  }

  private renderVerbNoun(): void {
    const s = this.session;
    const { verb, noun } = s.verbNoun();
    const verbInput = el("input", { list: "verbs", value: verb });
    const nounInput = el("input", { list: "nouns", value: noun });
    const verbList = el("datalist", { id: "verbs" });
    const nounList = el("datalist", { id: "nouns" });
    for (const v of s.taxonomy?.verbs ?? []) verbList.append(el("option", { value: v }));
    for (const n of s.taxonomy?.nouns ?? []) nounList.append(el("option", { value: n }));
    this.root.append(
      el("h1", {}, "Is this the action?"),
      el("p", {}, `The narration says: ${verb} ${noun}`),
      button("Yes, continue", this.act(() => s.confirmVerbNoun())),
      el(
        "p",
        {},
        "No, it is: ",
        verbInput,
        nounInput,
        verbList,
        nounList,
        button("Correct it", this.act(() => s.correctVerbNoun(verbInput.value, nounInput.value))),
      ),
    );
  }

  private renderObjects(): void {
    const s = this.session;
    const draft = s.draft!;
    const dobj = directObjectIds(draft);
    this.root.append(el("h1", {}, "Objects in this action"));
    const list = el("ul", {});
    for (const node of draft.nodes) {
      if (node.kind !== "object") continue;
      const nid = nodeId(node);
      const entry = el("li", {}, `${node.noun} (${nid})`);
      if (dobj.includes(nid)) {
        entry.append(" , direct object");
      } else {
        entry.append(" ", button("remove", this.act(() => s.removeIndirectObject(nid))));
      }
      list.append(entry);
    }
    this.root.append(list);

    const nounInput = el("input", { list: "nouns", placeholder: "object" });
    const nounList = el("datalist", { id: "nouns" });
    const refresh = () => {
      nounList.replaceChildren();
      for (const n of s.suggestions(nounInput.value)) nounList.append(el("option", { value: n }));
    };
    nounInput.addEventListener("input", refresh);
    refresh();
    const relationSelect = el("select", {});
    for (const r of s.relationChoices()) relationSelect.append(el("option", { value: r }, r));
    const anchorSelect = el("select", {});
    anchorSelect.append(el("option", { value: "verb" }, "the action"));
    for (const nid of dobj) anchorSelect.append(el("option", { value: nid }, nid));
    this.root.append(
      el(
        "p",
        {},
        nounInput,
        nounList,
        relationSelect,
        anchorSelect,
        button(
          "Add object",
          this.act(() => s.addIndirectObject(nounInput.value, relationSelect.value, anchorSelect.value)),
        ),
      ),
      el("p", {}, "Adding no extra objects is fine when none take part."),
      button("Draw boxes", this.act(() => s.toGrounding())),
      button("Submit", this.act(() => s.submitRefinement()), !s.canSubmit()),
    );
  }

  private renderGrounding(): void {
    const s = this.session;
    const draft = s.draft!;
    const task = s.task!;
    this.root.append(el("h1", {}, "Draw a box on each frame"));
    const frames = "frames" in task.payload ? task.payload.frames : null;
    for (const node of draft.nodes) {
      if (node.kind !== "object") continue;
      const nid = nodeId(node);
      const row = el("div", { class: "grounding-row" }, el("h2", {}, `${node.noun} (${nid})`));
      for (const stage of STAGES) {
        row.append(this.stageCanvas(draft, nid, stage, frames?.[stage]?.uri ?? null));
        row.append(button(`clear ${stage}`, this.act(() => s.eraseBox(nid, stage))));
      }
      this.root.append(row);
    }
    this.root.append(
      button("Back to objects", this.act(() => s.backToObjects())),
      button("Submit", this.act(() => s.submitRefinement()), !s.canSubmit()),
    );
  }

  private stageCanvas(
    draft: GraphDoc,
    nid: string,
    stage: Stage,
    uri: string | null,
  ): HTMLCanvasElement {
    const canvas = el("canvas", { width: "320", height: "180", "data-stage": stage });
    const ctx = canvas.getContext("2d")!;
    const tracker = new DragTracker({ width: canvas.width, height: canvas.height });
    const image = new Image();
    if (uri !== null) {
      image.src = uri;
      image.addEventListener("load", () => paint());
    }
    const paint = () => {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      if (uri !== null && image.complete && image.naturalWidth > 0) {
        ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
      } else {
        ctx.fillStyle = "#ddd";
        ctx.fillRect(0, 0, canvas.width, canvas.height);
        ctx.fillStyle = "#333";
        ctx.fillText(`${stage.toUpperCase()} (no frame image)`, 8, 16);
      }
      const node = draft.nodes.find((n) => nodeId(n) === nid);
      const saved = node?.kind === "object" ? node.grounding[stage] : null;
      ctx.strokeStyle = "#d22";
      if (saved !== null && saved !== undefined) {
        const [x, y, w, h] = saved;
        ctx.strokeRect(x, y, w, h);
      }
      const preview = tracker.preview();
      if (preview !== null) {
        ctx.strokeStyle = "#28c";
        ctx.strokeRect(preview.x, preview.y, preview.w, preview.h);
      }
    };
    const at = (event: PointerEvent): { x: number; y: number } => {
      const rect = canvas.getBoundingClientRect();
      return { x: event.clientX - rect.left, y: event.clientY - rect.top };
    };
    canvas.addEventListener("pointerdown", (event) => {
      const { x, y } = at(event);
      tracker.begin(x, y);
      canvas.setPointerCapture(event.pointerId);
    });
    canvas.addEventListener("pointermove", (event) => {
      const { x, y } = at(event);
      tracker.move(x, y);
      paint();
    });
    canvas.addEventListener("pointerup", () => {
      if (!tracker.active) return;
      try {
        const box = tracker.finish();
        this.session.drawBox(nid, stage, box);
      } catch (err) {
        this.session.notice = (err as Error).message;
      }
      this.render();
    });
    paint();
    return canvas;
  }

  private renderQuestions(): void {
    const s = this.session;
    const sheet = s.answers!;
    this.root.append(el("h1", {}, "The annotators disagreed; your call"));
    for (const control of sheet.list()) {
      const q: QuestionDoc = control.question;
      const block = el("div", { class: `question ${control.widget}` }, el("p", {}, control.title));
      const picked = sheet.get(q.question_id)?.choice;
      for (const option of control.options) {
        block.append(
          button(
            picked === option ? `[${option}]` : option,
            this.act(() => s.answer(q.question_id, option)),
          ),
        );
      }
      const free = el("input", { placeholder: "none of these? say more (flags for review)" });
      free.addEventListener("change", () => {
        const current = sheet.get(q.question_id);
        if (current !== undefined) s.answer(q.question_id, current.choice, free.value);
      });
      block.append(free);
      this.root.append(block);
    }
    this.root.append(button("Submit answers", this.act(() => s.submitAnswers()), !s.canSubmit()));
  }

  private renderReview(): void {
    const s = this.session;
    const clip = s.reviewClip!;
    this.root.append(el("h1", {}, `Clip ${clip.clip_id} (read-only)`));
    const section = (title: string, graphs: GraphDoc[] | null) => {
      this.root.append(el("h2", {}, title));
      if (graphs === null) {
        this.root.append(el("p", {}, "not available yet"));
        return;
      }
      for (const graph of graphs) this.root.append(this.graphCard(graph));
    };
    section("Consensus", clip.merged);
    section("Recollected", clip.recollected);
    section("Seeds", clip.graphs);
    this.root.append(button("Back", this.act(() => (s.screen = "tasks"))));
  }

  private graphCard(graph: GraphDoc): HTMLElement {
    const labels = new Map<string, string>();
    for (const node of graph.nodes) {
      const label =
        node.kind === "cw" ? "camera wearer" : node.kind === "verb" ? node.verb : node.noun;
      labels.set(nodeId(node), label);
    }
    const lines = graph.edges.map((e) =>
      el("li", {}, `${labels.get(e.src) ?? e.src} , ${e.relation} , ${labels.get(e.dst) ?? e.dst}`),
    );
    return el(
      "div",
      { class: "graph-card" },
      el("h3", {}, `timestep ${graph.timestep}`),
      el("ul", {}, ...lines),
    );
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root !== null) {
    void App.boot(root);
  }
}
