// Full keyboard-only annotation session against a live server on the demo
// corpus: label candidates with digit keys, watch the dashboard flip to
// "deepen" when q001's density crosses the threshold, and check the export
// holds every judgment exactly once.

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtemp } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { getExport, getQueries, nextCandidate, setApiBase, type LabelName } from "../src/api.js";
import { bootstrap, type App } from "../src/main.js";
import { LABEL_KEYS } from "../src/keyboard.js";

const run = promisify(execFile);
const PORT = 8521;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let app: App | null = null;
let appRoot: HTMLElement;

function press(key: string): void {
  window.dispatchEvent(new KeyboardEvent("keydown", { key }));
}

function onScreen(): { id: string; queryId: string } | null {
  const el = appRoot.querySelector("#card .candidate");
  if (!el) {
    return null;
  }
  return {
    id: el.getAttribute("data-candidate-id") ?? "",
    queryId: el.getAttribute("data-query-id") ?? "",
  };
}

function doneScreen(): Element | null {
  return appRoot.querySelector("#card .done");
}

function badge(queryId: string): string | null {
  const el = appRoot.querySelector(`#dashboard tr[data-query="${queryId}"] .badge`);
  return el?.textContent ?? null;
}

async function waitFor<T>(
  probe: () => T,
  what: string,
  timeoutMs = 15_000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const value = probe();
    if (value) {
      return value;
    }
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

async function labelCurrent(key: string): Promise<{ id: string; queryId: string }> {
  const before = await waitFor(onScreen, "a candidate on screen");
  press(key);
  await waitFor(
    () => doneScreen() !== null || onScreen()?.id !== before.id,
    `advance past ${before.id}`,
  );
  return before;
}

beforeAll(async () => {
  const workDir = await mkdtemp(join(tmpdir(), "semrec-ui-"));
  await run("semrec", ["demo", "--out", join(workDir, "demo")]);
  await run("semrec", [
    "run",
    "--corpus", join(workDir, "demo", "corpus.jsonl"),
    "--out", join(workDir, "work"),
    "--config", join(workDir, "demo", "config.txt"),
  ]);
  server = spawn(
    "semrec",
    [
      "serve",
      "--hits", join(workDir, "work", "candidates.jsonl"),
      "--plan", join(workDir, "work", "plans.jsonl"),
      "--corpus", join(workDir, "demo", "corpus.jsonl"),
      "--store", join(workDir, "ui-annotations.jsonl"),
      "--port", String(PORT),
    ],
    { stdio: "ignore" },
  );

  setApiBase(BASE);
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      await getQueries();
      break;
    } catch {
      if (Date.now() > deadline) {
        throw new Error("annotation server never came up");
      }
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }

  appRoot = document.createElement("div");
  document.body.appendChild(appRoot);
  app = bootstrap(appRoot);
  await waitFor(onScreen, "the first candidate");
});

afterAll(() => {
  app?.unbindKeys();
  app?.dashboard.stop();
  server?.kill();
});

describe("keyboard-only annotation session", () => {
  it("shows the leased candidate with its document context", async () => {
    const current = await waitFor(onScreen, "a candidate");
    expect(current.id).not.toBe("");

    const focus = await waitFor(
      () => appRoot.querySelector("#context-panel .chunk.focus"),
      "the context window",
    );
    expect(focus.textContent).toBeTruthy();
  });

  it("labels 50 candidates by key alone and exports each exactly once", async () => {
    const labeled = new Map<string, LabelName>();
    const spareKeys = ["2", "3", "4", "5"];
    let q001Seen = 0;

    for (let i = 0; i < 50; i++) {
      const current = await waitFor(onScreen, "a candidate");
      let key: string;
      if (current.queryId === "q001") {
        // first q001 judgment keeps density at 0, second one crosses 0.5
        key = q001Seen === 0 ? "4" : "1";
        q001Seen += 1;
        if (q001Seen === 2) {
          await waitFor(() => badge("q001") === "stop", "a stop badge before the flip");
          await labelCurrent(key);
          await waitFor(() => badge("q001") === "deepen", "the deepen flip");
          labeled.set(current.id, LABEL_KEYS.get(key)!);
          continue;
        }
      } else {
        key = spareKeys[i % spareKeys.length]!;
      }
      await labelCurrent(key);
      labeled.set(current.id, LABEL_KEYS.get(key)!);
    }

    expect(labeled.size).toBe(50);
    expect(badge("q001")).toBe("deepen");

    const rows = await getExport();
    expect(rows).toHaveLength(50);
    const ids = rows.map((row) => row.candidate_id);
    expect(new Set(ids).size).toBe(50);
    for (const row of rows) {
      expect(row.label).toBe(labeled.get(row.candidate_id));
    }
  });

  it("drains the queue to the completion screen without double-serving", async () => {
    const total = (await getQueries()).reduce((sum, q) => sum + q.total, 0);

    for (let i = 0; i < total && doneScreen() === null; i++) {
      await labelCurrent("4");
    }

    const done = await waitFor(doneScreen, "the completion screen");
    expect(done.textContent).toContain("queue drained");
    expect(await nextCandidate("anon")).toBeNull();

    const rows = await getExport();
    expect(rows).toHaveLength(total);
    expect(new Set(rows.map((row) => row.candidate_id)).size).toBe(total);
  });
});
