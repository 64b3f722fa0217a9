/**
 * Canvas force/velocity chart with fixed 15 N / 35 N guide lines and
 * control-event markers along the timeline, drawn in stream order.
 */

import { ConsoleViewModel, SeriesPoint } from "./viewmodel";
import { GUIDE_LINES } from "./types";

const MARKER_COLORS: Record<string, string> = {
  Cross35: "#d9534f",
  PotentialSnagDetected: "#f0ad4e",
  RobotStopped: "#777777",
  ComplianceEntered: "#9b59b6",
  RecoveryEntered: "#2e9e4f",
  TrajectoryModeEntered: "#2a7fd4",
  SnagResolved: "#2e9e4f",
  SpeedReduced: "#2a7fd4",
  PainReported: "#d9534f",
  GripperOpened: "#d9534f",
  EmergencyStop: "#c0392b",
};

export class ForceChart {
  private canvas: HTMLCanvasElement;
  private vm: ConsoleViewModel;
  maxForce = 60;

  constructor(canvas: HTMLCanvasElement, vm: ConsoleViewModel) {
    this.canvas = canvas;
    this.vm = vm;
  }

  private xOf(t: number, t0: number, t1: number): number {
    const w = this.canvas.width;
    if (t1 <= t0) return w;
    return ((t - t0) / (t1 - t0)) * w;
  }

  private yOfForce(f: number): number {
    const h = this.canvas.height;
    return h - (Math.min(f, this.maxForce) / this.maxForce) * (h - 18) - 2;
  }

  private drawSeries(
    ctx: CanvasRenderingContext2D,
    series: SeriesPoint[],
    t0: number,
    t1: number,
    color: string,
    scale: (v: number) => number
  ): void {
    if (series.length < 2) return;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    series.forEach((pt, i) => {
      const x = this.xOf(pt.t, t0, t1);
      const y = scale(pt.value);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#fafafa";
    ctx.fillRect(0, 0, width, height);

    const vm = this.vm;
    const t1 = vm.simTime;
    const t0 = Math.max(0, t1 - vm.windowS);

    for (const guide of GUIDE_LINES) {
      const y = this.yOfForce(guide);
      ctx.strokeStyle = guide === 35 ? "#d9534f" : "#f0ad4e";
      ctx.setLineDash([6, 4]);
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(width, y);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillStyle = "#666";
      ctx.font = "10px sans-serif";
      ctx.fillText(`${guide} N`, 4, y - 3);
    }

    for (const marker of vm.markers) {
      if (marker.t < t0) continue;
      const x = this.xOf(marker.t, t0, t1);
      ctx.strokeStyle = MARKER_COLORS[marker.kind] ?? "#bbbbbb";
      ctx.globalAlpha = 0.7;
      ctx.beginPath();
      ctx.moveTo(x, 12);
      ctx.lineTo(x, height);
      ctx.stroke();
      ctx.globalAlpha = 1.0;
    }

    this.drawSeries(ctx, vm.force, t0, t1, "#1f3b70", (f) => this.yOfForce(f));
    // velocity on its own scale (m/s, full height = 0.12)
    this.drawSeries(
      ctx,
      vm.velocity,
      t0,
      t1,
      "#2e9e4f",
      (v) => height - (Math.min(Math.abs(v), 0.12) / 0.12) * (height - 18) - 2
    );
  }
}
