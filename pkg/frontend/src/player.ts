/** Frame clock for 50-frame clips at 25 fps (2 s), with replay support.
 *
 * The scheduler is injectable so tests can run playback instantly; the
 * browser uses setTimeout.
 */

import { N_FRAMES, PLAYBACK_FPS } from "./types.js";

export type FrameCallback = (frameIndex: number) => void;
export type Scheduler = (fn: () => void, delayMs: number) => void;

const defaultScheduler: Scheduler = (fn, delayMs) => {
  setTimeout(fn, delayMs);
};

export class Player {
  playCount = 0;
  private playing = false;

  constructor(
    private onFrame: FrameCallback,
    private frameIntervalMs: number = 1000 / PLAYBACK_FPS,
    private scheduler: Scheduler = defaultScheduler,
  ) {}

  get isPlaying(): boolean {
    return this.playing;
  }

  /** Render all 50 frames in order; resolves when the clip finishes. */
  play(): Promise<void> {
    if (this.playing) {
      return Promise.reject(new Error("already playing"));
    }
    this.playing = true;
    return new Promise((resolve) => {
      const step = (frame: number) => {
        this.onFrame(frame);
        if (frame + 1 >= N_FRAMES) {
          this.playing = false;
          this.playCount += 1;
          resolve();
          return;
        }
        this.scheduler(() => step(frame + 1), this.frameIntervalMs);
      };
      step(0);
    });
  }
}
