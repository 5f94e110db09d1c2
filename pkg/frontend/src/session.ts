/** Study flow controller: familiarization gate, trial sequencing, submission.
 *
 * Stage rules:
 *   - all familiarization pairs must be viewed before any test trial loads;
 *   - a test trial's slider unlocks only after the first full playback;
 *   - the next trial loads only after the service acknowledges the rating;
 *   - failed submissions are queued and retried, never re-rated.
 *
 * The clock is injectable so per-trial elapsed times are testable.
 */

import { ApiClient } from "./api.js";
import { SliderState } from "./slider.js";
import type {
  FamiliarizationPayload,
  SessionInfo,
  TestingPayload,
} from "./types.js";

export type Stage = "idle" | "familiarization" | "testing" | "done";

export class SessionController {
  stage: Stage = "idle";
  info: SessionInfo | null = null;
  slider = new SliderState();

  private familViewed = 0;
  private testOffset = 0;          // 0-based within the testing block
  private trialLoadedAt = 0;
  private currentTrial: TestingPayload | null = null;
  private pendingSubmission: { rating: number; elapsed_ms: number; index: number } | null =
    null;

  constructor(
    private api: ApiClient,
    private now: () => number = () => Date.now(),
  ) {}

  async start(alias: string): Promise<SessionInfo> {
    this.info = await this.api.createSession(alias);
    this.stage = this.info.n_familiarization > 0 ? "familiarization" : "testing";
    return this.info;
  }

  get familiarizationRemaining(): number {
    return (this.info?.n_familiarization ?? 0) - this.familViewed;
  }

  /** Fetch the next labeled familiarization pair. */
  async nextFamiliarization(): Promise<FamiliarizationPayload> {
    if (this.stage !== "familiarization") {
      throw new Error(`not in familiarization (stage=${this.stage})`);
    }
    const payload = await this.api.getTrial(this.info!.session_id, this.familViewed);
    if (payload.stage !== "familiarization") {
      throw new Error("service returned a testing payload during familiarization");
    }
    return payload;
  }

  /** Mark the current familiarization pair as watched and advance. */
  completeFamiliarization(): void {
    if (this.stage !== "familiarization") {
      throw new Error("no familiarization in progress");
    }
    this.familViewed += 1;
    if (this.familViewed >= this.info!.n_familiarization) {
      this.stage = "testing";
    }
  }

  get currentTestIndex(): number {
    return this.info!.n_familiarization + this.testOffset;
  }

  /** Fetch the current test trial; the slider stays locked until playback. */
  async loadTestTrial(): Promise<TestingPayload> {
    if (this.stage !== "testing") {
      throw new Error(`cannot load a test trial during ${this.stage}`);
    }
    const payload = await this.api.getTrial(this.info!.session_id, this.currentTestIndex);
    if (payload.stage !== "testing") {
      throw new Error("expected a testing payload");
    }
    this.currentTrial = payload;
    this.slider.reset();
    this.trialLoadedAt = this.now();
    return payload;
  }

  /** Call when the first full playback of the clip finishes. */
  notifyPlaybackComplete(): void {
    if (!this.currentTrial) {
      throw new Error("no trial loaded");
    }
    this.slider.enable();
  }

  /** Submit the slider value; advances only on service acknowledgement. */
  async submitRating(): Promise<void> {
    if (!this.currentTrial) {
      throw new Error("no trial loaded");
    }
    if (!this.slider.canSubmit()) {
      throw new Error("slider untouched; rating not submitted");
    }
    this.pendingSubmission = {
      rating: this.slider.value,
      elapsed_ms: this.now() - this.trialLoadedAt,
      index: this.currentTestIndex,
    };
    await this.flushPending();
  }

  get hasPendingSubmission(): boolean {
    return this.pendingSubmission !== null;
  }

  /** Retry a queued submission after a network failure. */
  async flushPending(): Promise<void> {
    if (!this.pendingSubmission) {
      return;
    }
    const pending = this.pendingSubmission;
    const ack = await this.api.submitResponse({
      session_id: this.info!.session_id,
      index: pending.index,
      rating: pending.rating,
      elapsed_ms: pending.elapsed_ms,
    });
    // only an acknowledged submission advances the session
    this.pendingSubmission = null;
    this.currentTrial = null;
    if (ack.next_index === null) {
      this.stage = "done";
    } else {
      this.testOffset = ack.next_index - this.info!.n_familiarization;
    }
  }
}
