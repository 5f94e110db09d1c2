/** Surprise slider state: integer 0 (expected) to 100 (surprising).
 *
 * Starts centered, locked until the first playback completes, and cannot be
 * submitted until the participant has actually moved it.
 */

export class SliderState {
  value = 50;
  touched = false;
  enabled = false;

  enable(): void {
    this.enabled = true;
  }

  set(value: number): void {
    if (!this.enabled) {
      throw new Error("slider is locked until the clip has played");
    }
    if (!Number.isInteger(value) || value < 0 || value > 100) {
      throw new Error(`slider value must be an integer in [0, 100], got ${value}`);
    }
    this.value = value;
    this.touched = true;
  }

  canSubmit(): boolean {
    return this.enabled && this.touched;
  }

  reset(): void {
    this.value = 50;
    this.touched = false;
    this.enabled = false;
  }
}
