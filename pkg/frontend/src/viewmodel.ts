/**
 * Console view state, derived purely from the server stream.
 *
 * No control logic lives here: the view model only accumulates what the
 * bridge reports and shapes outgoing chat text / e-stop presses. Everything
 * the panels and chart render comes from this one object, which keeps it
 * directly testable without a DOM.
 */

import { ServerFrame, WAYPOINT_ORDER } from "./types";

export interface SeriesPoint {
  t: number;
  value: number;
}

export interface TimelineMarker {
  t: number;
  kind: string;
  force: number | null;
}

export interface TranscriptLine {
  speaker: string;
  text: string;
  t: number;
  pending: boolean;
}

export interface ActivePrompt {
  kind: string;
  text: string;
  allowedIntents: string[];
}

/** Canned utterance per intent for the quick-reply buttons. The button only
 * ever sends its text; the server classifies it like any typed message. */
export const QUICK_REPLY_TEXT: Record<string, string> = {
  snag_assist: "Yes, I will adjust the garment.",
  confirm_fixed: "I have fixed the snag, please resume",
  cannot_resolve: "I cannot resolve this snag",
  abort_task: "Abort the task",
  autonomous_recover: "Try to fix it yourself",
  more_gentle: "Be more gentle",
  speed_ok: "This is better",
  resume_dressing: "Resume",
  emergency_stop: "Emergency stop",
};

export interface QuickReply {
  intent: string;
  text: string;
}

const DEFAULT_WINDOW_S = 120;
const MAX_POINTS = 4096;

export class ConsoleViewModel {
  windowS: number;
  force: SeriesPoint[] = [];
  velocity: SeriesPoint[] = [];
  markers: TimelineMarker[] = [];
  transcript: TranscriptLine[] = [];
  mode = "Idle";
  speedScale = 1.0;
  waypointsReached: string[] = [];
  activePrompt: ActivePrompt | null = null;
  status: "lobby" | "running" | "terminal" = "lobby";
  trialStatus: string | null = null;
  estopLatched = false;
  stale = false;
  simTime = 0;
  lastFrameWall = 0;

  constructor(windowS: number = DEFAULT_WINDOW_S) {
    this.windowS = windowS;
  }

  /** Whether the e-stop control should accept presses. */
  get estopEnabled(): boolean {
    return this.status !== "terminal";
  }

  get quickReplies(): QuickReply[] {
    if (this.activePrompt === null) return [];
    return this.activePrompt.allowedIntents
      .filter((intent) => intent in QUICK_REPLY_TEXT)
      .map((intent) => ({ intent, text: QUICK_REPLY_TEXT[intent] }));
  }

  get waypointProgress(): { label: string; reached: boolean }[] {
    return WAYPOINT_ORDER.map((label) => ({
      label,
      reached: this.waypointsReached.includes(label),
    }));
  }

  apply(frame: ServerFrame, wallNow: number = Date.now()): void {
    this.lastFrameWall = wallNow;
    this.stale = false;
    this.simTime = Math.max(this.simTime, frame.t);
    const p = frame.payload;
    switch (frame.type) {
      case "force_sample":
        this.force.push({ t: frame.t, value: p.force });
        this.velocity.push({ t: frame.t, value: p.velocity });
        this.pruneSeries();
        break;
      case "control_event":
        this.markers.push({ t: p.t, kind: p.kind, force: p.force ?? null });
        if (p.kind === "EmergencyStop") this.estopLatched = true;
        break;
      case "prompt":
        this.activePrompt = {
          kind: p.kind,
          text: p.text,
          allowedIntents: p.allowed_intents ?? [],
        };
        break;
      case "transcript":
        this.reconcileTranscript(p.speaker, p.text, p.t);
        if (p.speaker === "user" && this.activePrompt !== null) {
          // a reply is in flight; the next prompt frame reopens if needed
          this.activePrompt = null;
        }
        break;
      case "mode":
        this.mode = p.mode;
        break;
      case "speed":
        this.speedScale = p.scale;
        break;
      case "waypoint":
        if (!this.waypointsReached.includes(p.label)) {
          this.waypointsReached.push(p.label);
        }
        break;
      case "status":
        this.status = p.status;
        if (p.trial_status !== undefined) this.trialStatus = p.trial_status;
        break;
      case "error":
        break;
    }
  }

  /** Optimistic local echo for a message being sent. */
  echoUserText(text: string, wallNow: number = Date.now()): void {
    this.transcript.push({
      speaker: "user",
      text,
      t: this.simTime,
      pending: true,
    });
    void wallNow;
  }

  private reconcileTranscript(speaker: string, text: string, t: number): void {
    if (speaker === "user") {
      const pending = this.transcript.find(
        (line) => line.pending && line.speaker === "user" && line.text === text
      );
      if (pending) {
        pending.pending = false;
        pending.t = t;
        return;
      }
    }
    this.transcript.push({ speaker, text, t, pending: false });
  }

  markStale(wallNow: number, gapMs: number = 2000): void {
    if (this.status === "running" && wallNow - this.lastFrameWall > gapMs) {
      this.stale = true;
    }
  }

  pressEstop(): boolean {
    if (!this.estopEnabled || this.estopLatched) return false;
    this.estopLatched = true;
    return true;
  }

  /** Series trimmed to the rolling window and a hard point budget. */
  private pruneSeries(): void {
    const cutoff = this.simTime - this.windowS;
    for (const series of [this.force, this.velocity]) {
      while (series.length > 0 && series[0].t < cutoff) series.shift();
      if (series.length > MAX_POINTS) series.splice(0, series.length - MAX_POINTS);
    }
    const markerCutoff = this.simTime - this.windowS;
    while (this.markers.length > 2048 && this.markers[0].t < markerCutoff) {
      this.markers.shift();
    }
  }

  get pointBudgetRespected(): boolean {
    return this.force.length <= MAX_POINTS && this.velocity.length <= MAX_POINTS;
  }
}
