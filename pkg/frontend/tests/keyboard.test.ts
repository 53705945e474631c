import { describe, expect, it, vi } from "vitest";

import { bindKeys, keyHandler, LABEL_KEYS } from "../src/keyboard.js";

describe("keyboard bindings", () => {
  it("maps digits 1-5 to the five labels", () => {
    expect([...LABEL_KEYS.values()]).toEqual([
      "paraphrase",
      "meaning_match",
      "topical_match",
      "no_match",
      "dont_know",
    ]);

    const onLabel = vi.fn();
    const unbind = bindKeys(window, { onLabel });
    for (const key of LABEL_KEYS.keys()) {
      window.dispatchEvent(new KeyboardEvent("keydown", { key }));
    }
    unbind();

    expect(onLabel.mock.calls.map(([label]) => label)).toEqual([...LABEL_KEYS.values()]);
  });

  it("ignores held-down repeats and chords", () => {
    const onLabel = vi.fn();
    const handler = keyHandler({ onLabel });

    handler(new KeyboardEvent("keydown", { key: "1", repeat: true }));
    handler(new KeyboardEvent("keydown", { key: "1", ctrlKey: true }));
    handler(new KeyboardEvent("keydown", { key: "1", metaKey: true }));
    handler(new KeyboardEvent("keydown", { key: "1", altKey: true }));
    handler(new KeyboardEvent("keydown", { key: "x" }));

    expect(onLabel).not.toHaveBeenCalled();
  });

  it("ignores keys typed into form fields", () => {
    const onLabel = vi.fn();
    const unbind = bindKeys(window, { onLabel });

    const input = document.createElement("input");
    document.body.appendChild(input);
    input.dispatchEvent(new KeyboardEvent("keydown", { key: "1", bubbles: true }));
    input.remove();
    unbind();

    expect(onLabel).not.toHaveBeenCalled();
  });

  it("toggles the context panel on c", () => {
    const onToggleContext = vi.fn();
    const handler = keyHandler({ onLabel: vi.fn(), onToggleContext });

    handler(new KeyboardEvent("keydown", { key: "c" }));

    expect(onToggleContext).toHaveBeenCalledTimes(1);
  });

  it("stops firing after unbind", () => {
    const onLabel = vi.fn();
    const unbind = bindKeys(window, { onLabel });
    unbind();

    window.dispatchEvent(new KeyboardEvent("keydown", { key: "1" }));

    expect(onLabel).not.toHaveBeenCalled();
  });
});
