import {
  nextCandidate,
  submitLabel,
  type Candidate,
  type LabelName,
} from "./api.js";
import { DwellTimer } from "./dwell.js";
import { newClientToken } from "./tokens.js";

export interface AnnotatorEvents {
  /** Fired whenever a candidate is loaded; null means the queue is drained. */
  onCandidate: (candidate: Candidate | null) => void;
  onLabeled?: (candidate: Candidate, label: LabelName) => void;
  onError?: (message: string) => void;
}

/** Sequencing for one annotator: lease a candidate, submit a judgment,
 * advance. The client token is minted when a candidate loads and reused on
 * retries, so a resubmission after a network failure cannot double-count. */
export class Annotator {
  private current: Candidate | null = null;
  private token = "";
  private busy = false;
  private labeled = 0;
  private readonly dwell: DwellTimer;

  constructor(
    readonly name: string,
    private readonly events: AnnotatorEvents,
    dwell?: DwellTimer,
  ) {
    this.dwell = dwell ?? new DwellTimer();
  }

  get candidate(): Candidate | null {
    return this.current;
  }

  get labeledCount(): number {
    return this.labeled;
  }

  async start(): Promise<void> {
    await this.advance();
  }

  async label(label: LabelName): Promise<void> {
    if (this.busy || this.current === null) {
      return;
    }
    this.busy = true;
    const candidate = this.current;
    try {
      await submitLabel({
        candidateId: candidate.candidate_id,
        label,
        annotator: this.name,
        durationSeconds: this.dwell.seconds(),
        clientToken: this.token,
      });
      this.labeled += 1;
      this.events.onLabeled?.(candidate, label);
      await this.advance();
    } catch (err) {
      this.events.onError?.(err instanceof Error ? err.message : String(err));
    } finally {
      this.busy = false;
    }
  }

  private async advance(): Promise<void> {
    this.current = await nextCandidate(this.name);
    this.token = newClientToken();
    this.dwell.start();
    this.events.onCandidate(this.current);
  }
}
