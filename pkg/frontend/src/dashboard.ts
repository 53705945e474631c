import { getProgress, type Progress, type QueryProgress } from "./api.js";
import { esc } from "./html.js";

const POLL_MS = 2000;

function meterRow(query: QueryProgress, threshold: number): string {
  const density = query.density;
  const pct = density === null ? 0 : Math.round(density * 100);
  const shown = density === null ? "-" : density.toFixed(2);
  return `
    <tr data-query="${esc(query.query_id)}">
      <td class="qid">${esc(query.query_id)}</td>
      <td class="count">${query.labeled} / ${query.total}</td>
      <td class="density">${shown}</td>
      <td class="meter-cell">
        <div class="meter">
          <span class="fill" style="width: ${pct}%"></span>
          <i class="tick" style="left: ${Math.round(threshold * 100)}%"></i>
        </div>
      </td>
      <td><span class="badge ${query.decision}">${query.decision}</span></td>
    </tr>`;
}

/** Poll /api/progress and render one row per query with its significant-hit
 * density against the deepening threshold. */
export class Dashboard {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private readonly root: HTMLElement) {}

  start(intervalMs: number = POLL_MS): void {
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async refresh(): Promise<void> {
    let progress: Progress;
    try {
      progress = await getProgress();
    } catch {
      this.root.innerHTML = `<p class="error">progress unavailable</p>`;
      return;
    }
    this.render(progress);
  }

  render(progress: Progress): void {
    const rows = progress.queries
      .map((query) => meterRow(query, progress.threshold))
      .join("");
    this.root.innerHTML = `
      <h2>progress</h2>
      <table class="progress">
        <thead>
          <tr>
            <th>query</th><th>labeled</th><th>density</th>
            <th>threshold ${progress.threshold}</th><th>decision</th>
          </tr>
        </thead>
        <tbody>${rows}</tbody>
      </table>`;
  }
}
