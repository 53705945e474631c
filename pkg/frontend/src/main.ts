import { setApiBase, type Candidate, type LabelName } from "./api.js";
import { Annotator } from "./annotator.js";
import { ContextPanel } from "./context.js";
import { Dashboard } from "./dashboard.js";
import { esc } from "./html.js";
import { bindKeys, LABEL_KEYS } from "./keyboard.js";

function legend(): string {
  const keys = [...LABEL_KEYS.entries()]
    .map(([key, label]) => `<span><kbd>${key}</kbd> ${esc(label)}</span>`)
    .join("");
  return `${keys}<span><kbd>c</kbd> context</span>`;
}

function metaLine(c: Candidate): string {
  const parts = [c.author, c.title, c.year, c.genre]
    .filter((part) => part !== null && part !== "")
    .map((part) => esc(part as string | number));
  return parts.join(" &middot; ");
}

function renderCandidate(card: HTMLElement, c: Candidate | null, done: number): void {
  if (c === null) {
    card.innerHTML = `
      <div class="done" data-candidate-id="">
        <h2>queue drained</h2>
        <p>${done} candidate${done === 1 ? "" : "s"} labeled this session.</p>
      </div>`;
    return;
  }
  card.innerHTML = `
    <div class="candidate" data-candidate-id="${esc(c.candidate_id)}" data-query-id="${esc(c.query_id)}">
      <div class="rankline">
        <span class="qid">${esc(c.query_id)}</span>
        <span>rank ${c.rank} of ${c.pool_size}</span>
        <span>score ${c.score.toFixed(4)}</span>
      </div>
      <blockquote class="quote">${esc(c.quote_text)}</blockquote>
      <p class="hit">${esc(c.text)}</p>
      <p class="meta">${metaLine(c)}</p>
      <p class="ids">${esc(c.doc_id)} / ${esc(c.work_id)}</p>
    </div>`;
}

export interface App {
  annotator: Annotator;
  dashboard: Dashboard;
  context: ContextPanel;
  unbindKeys: () => void;
}

export function bootstrap(root: HTMLElement, win: Window = window): App {
  root.innerHTML = `
    <header>
      <h1>semrec annotator</h1>
      <nav class="legend">${legend()}</nav>
    </header>
    <main class="columns">
      <section id="card"><p class="note">loading...</p></section>
      <aside id="context-panel"></aside>
    </main>
    <section id="dashboard"></section>
    <p id="status" class="status"></p>`;

  const card = root.querySelector<HTMLElement>("#card")!;
  const status = root.querySelector<HTMLElement>("#status")!;
  const dashboard = new Dashboard(root.querySelector<HTMLElement>("#dashboard")!);
  const context = new ContextPanel(root.querySelector<HTMLElement>("#context-panel")!);

  const params = new URLSearchParams(win.location.search);
  const name = params.get("annotator") ?? "anon";

  const annotator = new Annotator(name, {
    onCandidate: (candidate) => {
      renderCandidate(card, candidate, annotator.labeledCount);
      status.textContent = "";
      if (candidate === null) {
        context.clear("nothing left to label");
      } else {
        void context.show(candidate.chunk_id);
      }
    },
    onLabeled: (candidate, label: LabelName) => {
      status.textContent = `${candidate.candidate_id} labeled ${label}`;
      void dashboard.refresh();
    },
    onError: (message) => {
      status.textContent = `error: ${message} (press a key to retry)`;
    },
  });

  const unbindKeys = bindKeys(win, {
    onLabel: (label) => void annotator.label(label),
    onToggleContext: () => context.toggle(),
  });

  dashboard.start();
  void annotator.start().catch((err: unknown) => {
    status.textContent = `error: ${err instanceof Error ? err.message : String(err)}`;
  });

  return { annotator, dashboard, context, unbindKeys };
}

// Served page: the shell div exists, so wire everything up. Test imports
// create their own root and call bootstrap() directly.
const served = typeof document !== "undefined" && document.getElementById("app");
if (served) {
  setApiBase("");
  bootstrap(served);
}
