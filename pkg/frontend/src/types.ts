/** Wire types for the trial service's /api/v1 payloads. */

export interface BodyMeta {
  id: string;
  kind: string;          // FocalObject | SecondObject | Support | Occluder | Container | Barrier | Ground
  shape: string;
  height: number;
  width: number;
}

/** Per frame, one 7-tuple per entity: x, y, z, qw, qx, qy, qz. */
export interface TrajectoryData {
  entities: string[];
  frames: number[][][];
  visible: number[][];
}

export interface SpecExtras {
  barrier_kind: string | null;
  opening_height: number | null;
  opening_width: number | null;
  container_height: number | null;
  container_width: number | null;
  occluder_mid_frac: number | null;
}

export interface ScenePayload {
  trial_id: string;
  bodies: BodyMeta[];
  trajectory: TrajectoryData;
  spec_extras: SpecExtras;
}

export interface FamiliarizationPayload {
  stage: "familiarization";
  index: number;
  subtype: string;
  expected: ScenePayload;
  surprising: ScenePayload;
}

export interface TestingPayload {
  stage: "testing";
  index: number;
  scene: ScenePayload;
}

export type TrialPayload = FamiliarizationPayload | TestingPayload;

export interface SessionInfo {
  session_id: string;
  alias: string;
  n_familiarization: number;
  n_trials: number;
  stage: string;
}

export interface ResponseAck {
  ok: boolean;
  next_index: number | null;
  stage: string;
}

export const N_FRAMES = 50;
export const PLAYBACK_FPS = 25;
