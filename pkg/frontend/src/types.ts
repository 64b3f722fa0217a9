/** Wire schema mirrored from the bridge (versioned JSON frames). */

export type FrameType =
  | "force_sample"
  | "control_event"
  | "prompt"
  | "transcript"
  | "mode"
  | "speed"
  | "waypoint"
  | "status"
  | "error";

export interface ServerFrame {
  v: number;
  session_id: string;
  t: number; // sim seconds
  type: FrameType;
  payload: Record<string, any>;
}

export interface ClientFrame {
  type: "chat" | "estop" | "start" | "reset";
  text?: string;
}

export interface SessionInfo {
  v: number;
  session_id: string;
  status: "lobby" | "running" | "terminal";
  plan_name: string;
  variant: string;
  sim_time: number;
  trial_status: string | null;
}

export const WAYPOINT_ORDER = ["HAND", "LWRS", "LELB", "LSHO"] as const;

/** Fixed guide lines on the force chart, in newtons. */
export const GUIDE_LINES = [15, 35] as const;
