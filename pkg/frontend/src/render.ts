/** Schematic orthographic side-view renderer.
 *
 * Pure: a (scene, frame index, viewport) triple always yields the same list
 * of draw ops, so rendering can be tested without a canvas.  Entities whose
 * visibility flag is false are not drawn; occluder panels draw last (front
 * layer).  One scene unit maps to `viewport.width / WORLD_WIDTH` pixels.
 */

import type { BodyMeta, ScenePayload } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface DrawOp {
  op: "rect" | "ellipse" | "triangle" | "triangle_down" | "annulus";
  cx: number;       // pixel center
  cy: number;
  w: number;        // pixel extents
  h: number;
  rot: number;      // radians, clockwise on screen
  fill: string;
  layer: number;
}

const WORLD_X: [number, number] = [-6, 6];
const WORLD_Z: [number, number] = [-0.3, 3.7];

const LAYERS: Record<string, number> = {
  Ground: 0,
  Support: 1,
  Barrier: 2,
  Container: 3,
  SecondObject: 4,
  FocalObject: 5,
  Occluder: 6,
};

const FILLS: Record<string, string> = {
  Ground: "#8d7760",
  Support: "#a8895f",
  Barrier: "#7d7f85",
  Container: "#b0703c",
  SecondObject: "#4a7fb5",
  FocalObject: "#c94f4f",
  Occluder: "#5d5d70",
};

const WALL = 0.1; // container wall thickness in scene units

export function renderScene(
  scene: ScenePayload,
  frameIndex: number,
  viewport: Viewport,
): DrawOp[] {
  const frame = scene.trajectory.frames[frameIndex];
  const visible = scene.trajectory.visible[frameIndex];
  const sx = viewport.width / (WORLD_X[1] - WORLD_X[0]);
  const sy = viewport.height / (WORLD_Z[1] - WORLD_Z[0]);

  const toPxX = (x: number) => (x - WORLD_X[0]) * sx;
  const toPxY = (z: number) => viewport.height - (z - WORLD_Z[0]) * sy;

  const ops: DrawOp[] = [];
  scene.trajectory.entities.forEach((entityId, i) => {
    const body = scene.bodies.find((b) => b.id === entityId);
    if (!body) return;
    if (!visible[i] && body.kind !== "Occluder" && body.kind !== "Ground") {
      return; // honor the occluded-from-camera flag
    }
    const [x, , z, qw, , qy] = frame[i];
    const rot = 2 * Math.atan2(qy, qw); // rotations are about the depth axis
    const cx = toPxX(x);
    const cy = toPxY(z);
    const w = body.width * sx;
    const h = body.height * sy;
    const layer = LAYERS[body.kind] ?? 4;
    const fill = FILLS[body.kind] ?? "#999999";
    ops.push(...bodyOps(scene, body, cx, cy, w, h, rot, fill, layer, sx, sy));
  });
  ops.sort((a, b) => a.layer - b.layer);
  return ops;
}

function bodyOps(
  scene: ScenePayload,
  body: BodyMeta,
  cx: number,
  cy: number,
  w: number,
  h: number,
  rot: number,
  fill: string,
  layer: number,
  sx: number,
  sy: number,
): DrawOp[] {
  if (body.kind === "Container") {
    // U-shaped: two walls and a floor
    const wallPx = WALL * sx;
    const floorPx = WALL * sy;
    return [
      { op: "rect", cx: cx - w / 2 + wallPx / 2, cy, w: wallPx, h, rot, fill, layer },
      { op: "rect", cx: cx + w / 2 - wallPx / 2, cy, w: wallPx, h, rot, fill, layer },
      { op: "rect", cx, cy: cy + h / 2 - floorPx / 2, w, h: floorPx, rot, fill, layer },
    ];
  }
  if (body.kind === "Barrier") {
    const ops: DrawOp[] = [{ op: "rect", cx, cy, w: Math.max(w, 4), h, rot, fill, layer }];
    if (body.shape === "Opening" && scene.spec_extras.opening_height) {
      const openH = scene.spec_extras.opening_height * sy;
      ops.push({
        op: "rect",
        cx,
        cy: cy + h / 2 - openH / 2,
        w: Math.max(w, 4),
        h: openH,
        rot,
        fill: "#d8d9de",
        layer,
      });
    }
    if (body.shape === "Soft") {
      ops[0] = { ...ops[0], fill: "#aab3c9" };
    }
    return ops;
  }
  switch (body.shape) {
    case "Sphere":
      return [{ op: "ellipse", cx, cy, w, h, rot, fill, layer }];
    case "SideCylinder":
      return [{ op: "ellipse", cx, cy, w, h, rot, fill, layer }];
    case "Torus":
      return [{ op: "annulus", cx, cy, w, h, rot, fill, layer }];
    case "Cone":
      return [{ op: "triangle", cx, cy, w, h, rot, fill, layer }];
    case "InvertedCone":
      return [{ op: "triangle_down", cx, cy, w, h, rot, fill, layer }];
    default: // Cube, Cylinder, Box, Panel
      return [{ op: "rect", cx, cy, w, h, rot, fill, layer }];
  }
}

/** Execute draw ops on a 2D canvas context. */
export function paint(ctx: CanvasRenderingContext2D, ops: DrawOp[], viewport: Viewport): void {
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  ctx.fillStyle = "#eef1f5";
  ctx.fillRect(0, 0, viewport.width, viewport.height);
  for (const op of ops) {
    ctx.save();
    ctx.translate(op.cx, op.cy);
    ctx.rotate(-op.rot); // world rotation is counter-clockwise; canvas y is flipped
    ctx.fillStyle = op.fill;
    switch (op.op) {
      case "rect":
        ctx.fillRect(-op.w / 2, -op.h / 2, op.w, op.h);
        break;
      case "ellipse":
        ctx.beginPath();
        ctx.ellipse(0, 0, op.w / 2, op.h / 2, 0, 0, 2 * Math.PI);
        ctx.fill();
        break;
      case "annulus":
        ctx.beginPath();
        ctx.ellipse(0, 0, op.w / 2, op.h / 2, 0, 0, 2 * Math.PI);
        ctx.ellipse(0, 0, op.w / 6, op.h / 6, 0, 0, 2 * Math.PI, true);
        ctx.fill("evenodd");
        break;
      case "triangle":
        ctx.beginPath();
        ctx.moveTo(0, -op.h / 2);
        ctx.lineTo(op.w / 2, op.h / 2);
        ctx.lineTo(-op.w / 2, op.h / 2);
        ctx.closePath();
        ctx.fill();
        break;
      case "triangle_down":
        ctx.beginPath();
        ctx.moveTo(0, op.h / 2);
        ctx.lineTo(op.w / 2, -op.h / 2);
        ctx.lineTo(-op.w / 2, -op.h / 2);
        ctx.closePath();
        ctx.fill();
        break;
    }
    ctx.restore();
  }
}
