/** Synthetic scene payloads for unit tests (no service needed). */

import type { ScenePayload } from "../src/types.js";
import { N_FRAMES } from "../src/types.js";

export function syntheticScene(objectVisible: boolean[]): ScenePayload {
  const entities = ["ground", "occluder", "object"];
  const frames: number[][][] = [];
  const visible: number[][] = [];
  for (let i = 0; i < N_FRAMES; i++) {
    const x = -3 + (6 * i) / (N_FRAMES - 1);
    frames.push([
      [0, 0, -0.05, 1, 0, 0, 0],
      [0.5, 0, 1.0, 1, 0, 0, 0],
      [x, 0, 0.4, 1, 0, 0, 0],
    ]);
    visible.push([1, 1, objectVisible[i] ? 1 : 0]);
  }
  return {
    trial_id: "synthetic",
    bodies: [
      { id: "ground", kind: "Ground", shape: "Box", height: 0.1, width: 12 },
      { id: "occluder", kind: "Occluder", shape: "Panel", height: 2.0, width: 1.5 },
      { id: "object", kind: "FocalObject", shape: "Sphere", height: 0.8, width: 0.8 },
    ],
    trajectory: { entities, frames, visible },
    spec_extras: {
      barrier_kind: null,
      opening_height: null,
      opening_width: null,
      container_height: null,
      container_width: null,
      occluder_mid_frac: null,
    },
  };
}
