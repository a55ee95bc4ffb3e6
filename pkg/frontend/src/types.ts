// Payload types of the annotation service JSON API (schema version 1).

export interface EventSummary {
  event_id: string;
  dataset: string;
  recording_id: string;
  level: 'partial' | 'emergency';
  frame: number;
  ego_id: number;
  object_id: number;
  track_ended: boolean;
}

export interface EventList {
  api_version: number;
  events: EventSummary[];
}

/** One participant box per frame: [id, x, y, psi, length, width, class]. */
export type ParticipantRow = [number, number, number, number, number, number, string];

export interface ReplayFrame {
  frame: number;
  participants: ParticipantRow[];
}

export interface ReplayPayload {
  event_id: string;
  fps: number;
  recording_id: string;
  ego_id: number;
  object_id: number;
  level: string;
  t0_frame: number;
  frames: ReplayFrame[];
}

export interface StageState {
  stage1: boolean;
  revealed: boolean;
  stage2: boolean;
}

export interface Stage1Body {
  q1: number;
  q2: number;
  q3: number;
  q4: number;
  bug_flags: string[];
}

export interface Stage2Body {
  q5: number;
  bug_flags: string[];
}

export interface MdSeries {
  t: number[];
  md: number[];
}

/** Pose on the 25 Hz grid: [t, x, y, psi]. */
export type Pose = [number, number, number, number];

export interface RevealPayload {
  event_id: string;
  classification: { verdict: 'TCPr' | 'FCPr'; reason: string; needs_review: boolean };
  prediction: {
    ttc: number;
    ego_poses: Pose[];
    ego_dims: [number, number];
    obj_poses: Pose[];
    obj_dims: [number, number];
    md_pred: MdSeries;
  };
  pseudo: {
    v0: number;
    a0: number;
    path_exhausted: boolean;
    degenerate_path: boolean;
    t_eval: number;
    hyp_ego_poses: Pose[];
    md_pseudo: MdSeries;
    md_observed: MdSeries;
  };
}

export const BUG_FLAGS = ['bbox_overlap', 'implausible_motion', 'other'] as const;
export type BugFlag = (typeof BUG_FLAGS)[number];
