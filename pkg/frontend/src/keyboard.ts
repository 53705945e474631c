import type { LabelName } from "./api.js";

// Digits 1-5 run from strongest to weakest judgment, same order as the
// on-screen legend.
export const LABEL_KEYS: ReadonlyMap<string, LabelName> = new Map([
  ["1", "paraphrase"],
  ["2", "meaning_match"],
  ["3", "topical_match"],
  ["4", "no_match"],
  ["5", "dont_know"],
]);

const TEXT_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

export interface KeyActions {
  onLabel: (label: LabelName) => void;
  onToggleContext?: () => void;
}

export function keyHandler(actions: KeyActions): (event: KeyboardEvent) => void {
  return (event) => {
    if (event.ctrlKey || event.metaKey || event.altKey || event.repeat) {
      return;
    }
    const target = event.target;
    if (target instanceof HTMLElement && TEXT_TAGS.has(target.tagName)) {
      return;
    }
    const label = LABEL_KEYS.get(event.key);
    if (label) {
      event.preventDefault();
      actions.onLabel(label);
      return;
    }
    if (event.key === "c" && actions.onToggleContext) {
      event.preventDefault();
      actions.onToggleContext();
    }
  };
}

/** Install the handler on a window; returns the uninstaller. */
export function bindKeys(win: Window, actions: KeyActions): () => void {
  const handler = keyHandler(actions);
  win.addEventListener("keydown", handler as EventListener);
  return () => win.removeEventListener("keydown", handler as EventListener);
}
