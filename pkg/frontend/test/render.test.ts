import { describe, expect, it } from "vitest";

import { renderScene } from "../src/render.js";
import { N_FRAMES } from "../src/types.js";
import { syntheticScene } from "./fixtures.js";

const viewport = { width: 900, height: 330 };

describe("renderScene", () => {
  it("is a pure function of the payload", () => {
    const scene = syntheticScene(Array(N_FRAMES).fill(true));
    for (const frame of [0, 10, 49]) {
      const a = renderScene(scene, frame, viewport);
      const b = renderScene(scene, frame, viewport);
      expect(a).toEqual(b);
    }
  });

  it("honors per-entity visibility flags", () => {
    const flags = Array(N_FRAMES).fill(true);
    flags[20] = false;
    const scene = syntheticScene(flags);
    const shown = renderScene(scene, 19, viewport);
    const hidden = renderScene(scene, 20, viewport);
    const spheres = (ops: ReturnType<typeof renderScene>) =>
      ops.filter((op) => op.op === "ellipse");
    expect(spheres(shown)).toHaveLength(1);
    expect(spheres(hidden)).toHaveLength(0);
  });

  it("keeps occluders in front", () => {
    const scene = syntheticScene(Array(N_FRAMES).fill(true));
    const ops = renderScene(scene, 0, viewport);
    const layers = ops.map((op) => op.layer);
    expect(layers).toEqual([...layers].sort((a, b) => a - b));
    expect(ops[ops.length - 1].layer).toBe(6); // occluder drawn last
  });

  it("scales linearly with the viewport", () => {
    const scene = syntheticScene(Array(N_FRAMES).fill(true));
    const small = renderScene(scene, 5, viewport);
    const big = renderScene(scene, 5, { width: 1800, height: 660 });
    for (let i = 0; i < small.length; i++) {
      expect(big[i].cx).toBeCloseTo(2 * small[i].cx, 6);
      expect(big[i].cy).toBeCloseTo(2 * small[i].cy, 6);
      expect(big[i].w).toBeCloseTo(2 * small[i].w, 6);
      expect(big[i].h).toBeCloseTo(2 * small[i].h, 6);
    }
  });

  it("tracks motion across frames", () => {
    const scene = syntheticScene(Array(N_FRAMES).fill(true));
    const first = renderScene(scene, 0, viewport).find((op) => op.op === "ellipse")!;
    const last = renderScene(scene, 49, viewport).find((op) => op.op === "ellipse")!;
    expect(last.cx).toBeGreaterThan(first.cx);
  });
});
