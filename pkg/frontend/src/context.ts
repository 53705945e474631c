import { ApiError, getContext } from "./api.js";
import { esc } from "./html.js";

/** Neighborhood viewer for the chunk behind the current candidate. Requests
 * can finish out of order when the annotator moves fast, so each render is
 * guarded by a sequence number. */
export class ContextPanel {
  private seq = 0;
  private visible = true;

  constructor(private readonly root: HTMLElement) {}

  toggle(): void {
    this.visible = !this.visible;
    this.root.classList.toggle("hidden", !this.visible);
  }

  clear(message: string): void {
    this.seq += 1;
    this.root.innerHTML = `<h2>context</h2><p class="note">${esc(message)}</p>`;
  }

  async show(chunkId: string): Promise<void> {
    const ticket = ++this.seq;
    if (!chunkId) {
      this.root.innerHTML = `<h2>context</h2><p class="note">no chunk reference</p>`;
      return;
    }
    let chunks;
    try {
      chunks = (await getContext(chunkId, 2)).chunks;
    } catch (err) {
      if (ticket !== this.seq) {
        return;
      }
      const message =
        err instanceof ApiError && err.status === 404
          ? "no context available"
          : "context unavailable";
      this.root.innerHTML = `<h2>context</h2><p class="note">${esc(message)}</p>`;
      return;
    }
    if (ticket !== this.seq) {
      return;
    }
    const body = chunks
      .map(
        (chunk) => `
        <div class="chunk${chunk.focus ? " focus" : ""}" data-chunk="${esc(chunk.chunk_id)}">
          <span class="chunk-id">${esc(chunk.chunk_id)}</span>
          <p>${esc(chunk.text)}</p>
        </div>`,
      )
      .join("");
    this.root.innerHTML = `<h2>context</h2>${body}`;
  }
}
