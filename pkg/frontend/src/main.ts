/** Browser entry point: wires the controller to the DOM. */

import { ApiClient } from "./api.js";
import { Player } from "./player.js";
import { paint, renderScene } from "./render.js";
import { SessionController } from "./session.js";
import type { ScenePayload } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function canvasViewport(canvas: HTMLCanvasElement) {
  return { width: canvas.width, height: canvas.height };
}

function playScene(
  canvas: HTMLCanvasElement,
  scene: ScenePayload,
  intervalMs?: number,
): Promise<void> {
  const ctx = canvas.getContext("2d")!;
  const viewport = canvasViewport(canvas);
  const player = new Player((frame) => {
    paint(ctx, renderScene(scene, frame, viewport), viewport);
  }, intervalMs);
  return player.play();
}

async function run(): Promise<void> {
  const api = new ApiClient("");
  const controller = new SessionController(api);

  const status = $("status");
  const familBox = $("familiarization");
  const testBox = $("testing");
  const slider = $<HTMLInputElement>("surprise-slider");
  const submitBtn = $<HTMLButtonElement>("submit-btn");
  const replayBtn = $<HTMLButtonElement>("replay-btn");
  const nextFamilBtn = $<HTMLButtonElement>("next-famil-btn");
  const expectedCanvas = $<HTMLCanvasElement>("expected-canvas");
  const surprisingCanvas = $<HTMLCanvasElement>("surprising-canvas");
  const testCanvas = $<HTMLCanvasElement>("test-canvas");

  const alias = new URLSearchParams(window.location.search).get("alias") ?? "participant";
  const info = await controller.start(alias);
  status.textContent =
    `Session ${info.session_id}: ${info.n_familiarization} practice pairs, ` +
    `${info.n_trials} rated clips.`;

  // --- familiarization: both versions side by side, labeled -------------
  familBox.style.display = "block";
  while (controller.stage === "familiarization") {
    const pair = await controller.nextFamiliarization();
    $("famil-progress").textContent =
      `Practice ${pair.index + 1} / ${info.n_familiarization} (type ${pair.subtype})`;
    nextFamilBtn.disabled = true;
    await Promise.all([
      playScene(expectedCanvas, pair.expected),
      playScene(surprisingCanvas, pair.surprising),
    ]);
    nextFamilBtn.disabled = false;
    await new Promise<void>((resolve) => {
      nextFamilBtn.onclick = () => resolve();
    });
    controller.completeFamiliarization();
  }

  // --- testing: blinded clips with the surprise slider ------------------
  familBox.style.display = "none";
  testBox.style.display = "block";
  while (controller.stage === "testing") {
    const payload = await controller.loadTestTrial();
    const offset = payload.index - info.n_familiarization;
    $("test-progress").textContent = `Clip ${offset + 1} / ${info.n_trials}`;
    slider.value = "50";
    slider.disabled = true;
    submitBtn.disabled = true;
    replayBtn.disabled = true;

    await playScene(testCanvas, payload.scene);
    controller.notifyPlaybackComplete();
    slider.disabled = false;
    replayBtn.disabled = false;

    replayBtn.onclick = () => {
      replayBtn.disabled = true;
      void playScene(testCanvas, payload.scene).then(() => {
        replayBtn.disabled = false;
      });
    };
    slider.oninput = () => {
      controller.slider.set(Number(slider.value));
      submitBtn.disabled = !controller.slider.canSubmit();
    };

    await new Promise<void>((resolve) => {
      submitBtn.onclick = async () => {
        submitBtn.disabled = true;
        for (;;) {
          try {
            if (controller.hasPendingSubmission) {
              await controller.flushPending();
            } else {
              await controller.submitRating();
            }
            break;
          } catch (err) {
            status.textContent = `submission failed (${String(err)}); retrying...`;
            await new Promise((r) => setTimeout(r, 1000));
          }
        }
        status.textContent = "";
        resolve();
      };
    });
  }

  testBox.style.display = "none";
  status.textContent = "All done - thank you!";
}

run().catch((err) => {
  $("status").textContent = `error: ${String(err)}`;
});
