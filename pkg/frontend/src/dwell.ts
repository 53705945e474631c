// Wall-clock dwell on the current candidate; submitted with the label so
// the stats side can estimate annotation effort per rank.

export class DwellTimer {
  private startedAt: number | null = null;

  constructor(private readonly now: () => number = () => performance.now()) {}

  start(): void {
    this.startedAt = this.now();
  }

  /** Seconds since start(), 0 when never started. */
  seconds(): number {
    if (this.startedAt === null) {
      return 0;
    }
    return Math.max(0, (this.now() - this.startedAt) / 1000);
  }
}
