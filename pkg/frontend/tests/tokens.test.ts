import { afterEach, describe, expect, it, vi } from "vitest";

import { newClientToken } from "../src/tokens.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("client tokens", () => {
  it("never repeats across many draws", () => {
    const seen = new Set<string>();
    for (let i = 0; i < 1_000; i++) {
      seen.add(newClientToken());
    }
    expect(seen.size).toBe(1_000);
  });

  it("still works without the crypto global", () => {
    vi.stubGlobal("crypto", undefined);

    const a = newClientToken();
    const b = newClientToken();

    expect(a).toMatch(/^tok-/);
    expect(a).not.toBe(b);
  });
});
